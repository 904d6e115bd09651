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

//! The oracle path: full join output via semijoin reduction (Yannakakis).

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::join_tree::{key_bits, project_key, Key};
use crate::relational::JoinTree;
use crate::semiring::{eval_sumprod, Counting, FactorAssignment};

/// Default cap on oracle output rows.
pub const DEFAULT_OUTPUT_CAP: u64 = 1_000_000;

/// The materialized join: one labeled point per output row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub features: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(features: Vec<String>, points: Vec<Vec<f64>>, labels: Vec<f64>) -> Self {
        assert_eq!(points.len(), labels.len(), "one label per point");
        debug_assert!(points.iter().all(|p| p.len() == features.len()));
        DesignMatrix {
            features,
            points,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self) -> usize {
        self.features.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(Vec::as_slice).zip(self.labels.iter().copied())
    }
}

/// Exact join cardinality via the counting semiring; nothing is materialized.
pub fn count_join_rows(tree: &JoinTree) -> BigUint {
    eval_sumprod(tree, &Counting, &FactorAssignment::new())
}

pub fn materialize_join(tree: &JoinTree) -> Result<DesignMatrix> {
    materialize_join_with_cap(tree, DEFAULT_OUTPUT_CAP)
}

/// Materializes the join, refusing with [`Error::OutputCapExceeded`] when the
/// output would exceed `cap` rows.
pub fn materialize_join_with_cap(tree: &JoinTree, cap: u64) -> Result<DesignMatrix> {
    let estimated = count_join_rows(tree);
    if estimated > BigUint::from(cap) {
        return Err(Error::OutputCapExceeded { estimated, cap });
    }

    let spec = tree.spec();
    let alive = semijoin_reduce(tree);

    let width = spec.attributes().len();
    let root = tree.root();
    let root_table = &spec.tables()[root];
    let mut partials: Vec<Vec<f64>> = Vec::new();
    for (r, row) in root_table.rows().iter().enumerate() {
        if alive[root][r] {
            let mut p = vec![f64::NAN; width];
            for (c, &a) in tree.node_attrs(root).iter().enumerate() {
                p[a] = row[c];
            }
            partials.push(p);
        }
    }

    for &t in &tree.order()[1..] {
        let table = &spec.tables()[t];
        let mut index: HashMap<Key, Vec<usize>> = HashMap::new();
        for (r, row) in table.rows().iter().enumerate() {
            if alive[t][r] {
                index.entry(project_key(row, tree.sep_cols(t))).or_default().push(r);
            }
        }
        let sep_attrs: Vec<usize> = tree.sep_cols(t).iter().map(|&c| tree.node_attrs(t)[c]).collect();
        let mut next = Vec::with_capacity(partials.len());
        for p in partials {
            let key: Key = sep_attrs.iter().map(|&a| key_bits(p[a])).collect();
            let Some(matches) = index.get(&key) else {
                continue;
            };
            for &r in matches {
                let mut q = p.clone();
                for (c, &a) in tree.node_attrs(t).iter().enumerate() {
                    q[a] = table.rows()[r][c];
                }
                next.push(q);
            }
        }
        partials = next;
    }

    let label = spec.attribute_index(spec.label()).expect("label attribute");
    let feature_attrs: Vec<usize> = spec.features().map(|f| spec.attribute_index(f).unwrap()).collect();
    let labels = partials.iter().map(|p| p[label]).collect();
    let points = partials
        .iter()
        .map(|p| feature_attrs.iter().map(|&a| p[a]).collect())
        .collect();
    Ok(DesignMatrix::new(spec.feature_names(), points, labels))
}

/// Full reducer: after an upward and a downward semijoin pass no row is
/// dangling.
fn semijoin_reduce(tree: &JoinTree) -> Vec<Vec<bool>> {
    let tables = tree.spec().tables();
    let mut alive: Vec<Vec<bool>> = tables.iter().map(|t| vec![true; t.len()]).collect();

    let keys_of = |alive: &[Vec<bool>], node: usize, cols: &[usize]| -> HashSet<Key> {
        tables[node]
            .rows()
            .iter()
            .zip(&alive[node])
            .filter(|(_, &a)| a)
            .map(|(row, _)| project_key(row, cols))
            .collect()
    };

    for t in tree.post_order() {
        for &c in tree.children(t) {
            let keys = keys_of(&alive, c, tree.sep_cols(c));
            let cols = tree.sep_cols_in_parent(c);
            for (row, a) in tables[t].rows().iter().zip(alive[t].iter_mut()) {
                *a = *a && keys.contains(&project_key(row, cols));
            }
        }
    }
    for &t in tree.order() {
        for &c in tree.children(t) {
            let keys = keys_of(&alive, t, tree.sep_cols_in_parent(c));
            let cols = tree.sep_cols(c);
            for (row, a) in tables[c].rows().iter().zip(alive[c].iter_mut()) {
                *a = *a && keys.contains(&project_key(row, cols));
            }
        }
    }
    alive
}
