// Copyright 2026 The relsvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Leaf-to-root and root-to-leaf message passing over a join tree.
//!
//! Messages are keyed by the values of the separator between a node and its
//! parent. Rows of a node are processed per [`RowGroup`], so each distinct
//! combination of separator keys costs one product regardless of how many
//! rows share it.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::One;

use super::{CommutativeMonoid, CommutativeSemiring, CountedSum, FactorAssignment};
use crate::relational::{JoinTree, Key};

type FactorRef<'a, E> = &'a (dyn Fn(f64) -> E + Send + Sync + 'a);

pub(crate) struct Messages<'a, S: CommutativeSemiring> {
    tree: &'a JoinTree,
    sr: &'a S,
    own: Vec<Vec<S::Elem>>,
    up: Vec<HashMap<Key, S::Elem>>,
    down: Vec<HashMap<Key, S::Elem>>,
    total: S::Elem,
}

impl<'a, S: CommutativeSemiring> Messages<'a, S> {
    /// Runs the upward pass and aggregates the root.
    pub(crate) fn upward(tree: &'a JoinTree, sr: &'a S, factors: &'a FactorAssignment<'_, S::Elem>) -> Self {
        let spec = tree.spec();
        let by_attr: Vec<Option<FactorRef<'a, S::Elem>>> = spec.attributes().iter().map(|a| factors.get(a)).collect();

        let m = tree.node_count();
        let own: Vec<Vec<S::Elem>> = (0..m)
            .map(|t| {
                let rows = spec.tables()[t].rows();
                let owned: Vec<(usize, FactorRef<'a, S::Elem>)> = tree
                    .owned_columns(t)
                    .filter_map(|(c, a)| by_attr[a].map(|f| (c, f)))
                    .collect();
                tree.groups(t)
                    .iter()
                    .map(|g| {
                        let mut acc = sr.zero();
                        for &r in &g.rows {
                            let mut prod: Option<S::Elem> = None;
                            for &(c, f) in &owned {
                                let v = f(rows[r][c]);
                                prod = Some(match prod {
                                    None => v,
                                    Some(p) => sr.mul(&p, &v),
                                });
                            }
                            let prod = prod.unwrap_or_else(|| sr.one());
                            if !sr.is_zero(&prod) {
                                sr.add_assign(&mut acc, &prod);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        let mut msgs = Messages {
            tree,
            sr,
            own,
            up: vec![HashMap::new(); m],
            down: vec![HashMap::new(); m],
            total: sr.zero(),
        };

        for t in tree.post_order() {
            let mut out: HashMap<Key, S::Elem> = HashMap::new();
            let mut total = sr.zero();
            for (gi, g) in tree.groups(t).iter().enumerate() {
                let own = &msgs.own[t][gi];
                if sr.is_zero(own) {
                    continue;
                }
                let Some(val) = msgs.product_with_children(t, gi, own.clone()) else {
                    continue;
                };
                if tree.parent(t).is_some() {
                    match out.get_mut(&g.parent_key) {
                        Some(acc) => sr.add_assign(acc, &val),
                        None => {
                            out.insert(g.parent_key.clone(), val);
                        }
                    }
                } else {
                    sr.add_assign(&mut total, &val);
                }
            }
            if tree.parent(t).is_some() {
                msgs.up[t] = out;
            } else {
                msgs.total = total;
            }
        }
        msgs
    }

    fn child_messages(&self, t: usize, gi: usize) -> Option<Vec<&S::Elem>> {
        let g = &self.tree.groups(t)[gi];
        self.tree
            .children(t)
            .iter()
            .zip(&g.child_keys)
            .map(|(&c, k)| self.up[c].get(k))
            .collect()
    }

    fn product_with_children(&self, t: usize, gi: usize, start: S::Elem) -> Option<S::Elem> {
        let children = self.child_messages(t, gi)?;
        let mut val = start;
        for msg in children {
            val = self.sr.mul(&val, msg);
            if self.sr.is_zero(&val) {
                return None;
            }
        }
        Some(val)
    }

    /// Runs the downward pass; afterwards [`Messages::context`] is available.
    pub(crate) fn with_downward(mut self) -> Self {
        let tree = self.tree;
        let sr = self.sr;
        for &t in tree.order() {
            let children = tree.children(t);
            if children.is_empty() {
                continue;
            }
            let mut outs: Vec<HashMap<Key, S::Elem>> = vec![HashMap::new(); children.len()];
            for (gi, g) in tree.groups(t).iter().enumerate() {
                let own = &self.own[t][gi];
                if sr.is_zero(own) {
                    continue;
                }
                let base = if tree.parent(t).is_some() {
                    match self.down[t].get(&g.parent_key) {
                        Some(d) => sr.mul(own, d),
                        None => continue,
                    }
                } else {
                    own.clone()
                };
                let Some(ups) = self.child_messages(t, gi) else {
                    continue;
                };
                let k = ups.len();
                let mut prefix = Vec::with_capacity(k);
                prefix.push(base);
                for u in &ups[..k - 1] {
                    let next = sr.mul(prefix.last().unwrap(), u);
                    prefix.push(next);
                }
                let mut suffix: Option<S::Elem> = None;
                for i in (0..k).rev() {
                    let contrib = match &suffix {
                        None => prefix[i].clone(),
                        Some(s) => sr.mul(&prefix[i], s),
                    };
                    if !sr.is_zero(&contrib) {
                        let key = &g.child_keys[i];
                        match outs[i].get_mut(key) {
                            Some(acc) => sr.add_assign(acc, &contrib),
                            None => {
                                outs[i].insert(key.clone(), contrib);
                            }
                        }
                    }
                    if i > 0 {
                        suffix = Some(match suffix {
                            None => ups[i].clone(),
                            Some(s) => sr.mul(ups[i], &s),
                        });
                    }
                }
            }
            for (&c, out) in children.iter().zip(outs) {
                self.down[c] = out;
            }
        }
        self
    }

    pub(crate) fn into_total(self) -> S::Elem {
        self.total
    }

    /// Aggregate over every completion of a row of group `gi` at node `t` to
    /// a full join tuple, excluding the row's own factor. `None` when no
    /// completion exists. Requires the downward pass.
    pub(crate) fn context(&self, t: usize, gi: usize) -> Option<S::Elem> {
        let g = &self.tree.groups(t)[gi];
        let start = if self.tree.parent(t).is_some() {
            self.down[t].get(&g.parent_key)?.clone()
        } else {
            self.sr.one()
        };
        let children = self.child_messages(t, gi)?;
        let mut iter = children.into_iter();
        let mut val = if self.tree.parent(t).is_some() {
            start
        } else {
            match iter.next() {
                Some(first) => first.clone(),
                None => return Some(start),
            }
        };
        for msg in iter {
            val = self.sr.mul(&val, msg);
        }
        if self.sr.is_zero(&val) {
            None
        } else {
            Some(val)
        }
    }

    /// Every upward and downward message, for size accounting.
    pub(crate) fn all_messages(&self) -> impl Iterator<Item = &S::Elem> {
        self.up.iter().chain(self.down.iter()).flat_map(|m| m.values())
    }
}

/// `⊕_{x ∈ J} ⊗_i F_i(x_i)` without materializing `J`.
pub fn eval_sumprod<S: CommutativeSemiring>(
    tree: &JoinTree,
    sr: &S,
    factors: &FactorAssignment<'_, S::Elem>,
) -> S::Elem {
    Messages::upward(tree, sr, factors).into_total()
}

/// `⊕_{x ∈ J} ⊕_i F_i(x_i)`, as one SumProd query over [`CountedSum`].
pub fn eval_sumsum<M: CommutativeMonoid>(
    tree: &JoinTree,
    monoid: &M,
    factors: &FactorAssignment<'_, M::Elem>,
) -> M::Elem
where
    M::Elem: Send + Sync,
{
    let sr = CountedSum(monoid);
    let mut lifted: FactorAssignment<'_, (BigUint, M::Elem)> = FactorAssignment::new();
    for a in tree.spec().attributes() {
        if let Some(f) = factors.get(a) {
            lifted.set(a, move |v| (BigUint::one(), f(v)));
        }
    }
    eval_sumprod(tree, &sr, &lifted).1
}
