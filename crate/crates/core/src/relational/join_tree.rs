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

//! Acyclicity test and join-tree construction by GYO reduction.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::relational::JoinSpec;

/// Join values of a separator, as normalized `f64` bit patterns.
pub(crate) type Key = Vec<u64>;

pub(crate) fn key_bits(v: f64) -> u64 {
    // -0.0 and 0.0 must join.
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Rows of one node that agree on every separator key (to the parent and to
/// each child). Message passing works per group instead of per row.
#[derive(Clone, Debug)]
pub(crate) struct RowGroup {
    pub(crate) parent_key: Key,
    pub(crate) child_keys: Vec<Key>,
    pub(crate) rows: Vec<usize>,
}

/// A rooted join tree over the tables of a [`JoinSpec`].
///
/// Node `i` is table `i` of the `JoinSpec`. Every node's bag is exactly its table's
/// attribute set, and for every attribute the nodes carrying it form a
/// connected subtree.
#[derive(Clone, Debug)]
pub struct JoinTree {
    spec: JoinSpec,
    root: usize,
    adjacency: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    order: Vec<usize>,
    node_attrs: Vec<Vec<usize>>,
    sep_attrs: Vec<Vec<usize>>,
    sep_cols: Vec<Vec<usize>>,
    sep_cols_in_parent: Vec<Vec<usize>>,
    owner: Vec<usize>,
    groups: Vec<Vec<RowGroup>>,
}

/// Builds a join tree for `spec`, or reports [`Error::CyclicQuery`].
///
/// GYO reduction: repeatedly drop attributes that occur in a single hyperedge
/// and hyperedges contained in another one. The query is acyclic iff one
/// hyperedge survives; each removed hyperedge hangs off the one containing it.
pub fn build_join_tree(spec: &JoinSpec) -> Result<JoinTree> {
    let edges: Vec<BTreeSet<usize>> = spec
        .tables()
        .iter()
        .map(|t| {
            t.columns()
                .iter()
                .map(|c| spec.attribute_index(c).expect("column in joined schema"))
                .collect()
        })
        .collect();
    let m = edges.len();
    let mut current = edges;
    let mut alive = vec![true; m];
    let mut tree_edges = Vec::with_capacity(m.saturating_sub(1));

    loop {
        let mut changed = false;

        let mut occurrences: HashMap<usize, usize> = HashMap::new();
        for (e, attrs) in current.iter().enumerate() {
            if alive[e] {
                for a in attrs {
                    *occurrences.entry(*a).or_default() += 1;
                }
            }
        }
        for (e, attrs) in current.iter_mut().enumerate() {
            if alive[e] {
                let before = attrs.len();
                attrs.retain(|a| occurrences[a] > 1);
                changed |= attrs.len() != before;
            }
        }

        for e in 0..m {
            if !alive[e] {
                continue;
            }
            let container = (0..m).find(|&f| f != e && alive[f] && current[e].is_subset(&current[f]));
            if let Some(f) = container {
                alive[e] = false;
                tree_edges.push((e, f));
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }

    let survivors: Vec<usize> = (0..m).filter(|&e| alive[e]).collect();
    if survivors.len() != 1 {
        return Err(Error::CyclicQuery);
    }
    Ok(JoinTree::from_edges(spec.clone(), &tree_edges, survivors[0]))
}

impl JoinTree {
    fn from_edges(spec: JoinSpec, edges: &[(usize, usize)], root: usize) -> JoinTree {
        let m = spec.tables().len();
        let mut adjacency = vec![Vec::new(); m];
        for &(a, b) in edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self::rooted(spec, adjacency, root)
    }

    fn rooted(spec: JoinSpec, adjacency: Vec<Vec<usize>>, root: usize) -> JoinTree {
        let m = spec.tables().len();
        let mut parent = vec![None; m];
        let mut children = vec![Vec::new(); m];
        let mut order = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(t) = queue.pop_front() {
            order.push(t);
            for &c in &adjacency[t] {
                if !seen[c] {
                    seen[c] = true;
                    parent[c] = Some(t);
                    children[t].push(c);
                    queue.push_back(c);
                }
            }
        }

        let node_attrs: Vec<Vec<usize>> = spec
            .tables()
            .iter()
            .map(|t| {
                t.columns()
                    .iter()
                    .map(|c| spec.attribute_index(c).expect("column in joined schema"))
                    .collect()
            })
            .collect();

        let mut sep_attrs = vec![Vec::new(); m];
        let mut sep_cols = vec![Vec::new(); m];
        let mut sep_cols_in_parent = vec![Vec::new(); m];
        for t in 0..m {
            if let Some(p) = parent[t] {
                let mut shared: Vec<usize> = node_attrs[t]
                    .iter()
                    .copied()
                    .filter(|a| node_attrs[p].contains(a))
                    .collect();
                shared.sort_unstable();
                sep_cols[t] = shared
                    .iter()
                    .map(|a| node_attrs[t].iter().position(|x| x == a).unwrap())
                    .collect();
                sep_cols_in_parent[t] = shared
                    .iter()
                    .map(|a| node_attrs[p].iter().position(|x| x == a).unwrap())
                    .collect();
                sep_attrs[t] = shared;
            }
        }

        let mut owner = vec![usize::MAX; spec.attributes().len()];
        for &t in &order {
            for &a in &node_attrs[t] {
                if owner[a] == usize::MAX {
                    owner[a] = t;
                }
            }
        }

        let mut tree = JoinTree {
            spec,
            root,
            adjacency,
            parent,
            children,
            order,
            node_attrs,
            sep_attrs,
            sep_cols,
            sep_cols_in_parent,
            owner,
            groups: Vec::new(),
        };
        tree.groups = (0..m).map(|t| tree.group_rows(t)).collect();
        tree
    }

    fn group_rows(&self, t: usize) -> Vec<RowGroup> {
        let table = &self.spec.tables()[t];
        let mut index: HashMap<(Key, Vec<Key>), usize> = HashMap::new();
        let mut groups: Vec<RowGroup> = Vec::new();
        for (r, row) in table.rows().iter().enumerate() {
            let parent_key = project_key(row, &self.sep_cols[t]);
            let child_keys: Vec<Key> = self.children[t]
                .iter()
                .map(|&c| project_key(row, &self.sep_cols_in_parent[c]))
                .collect();
            let g = *index
                .entry((parent_key.clone(), child_keys.clone()))
                .or_insert_with(|| {
                    groups.push(RowGroup {
                        parent_key,
                        child_keys,
                        rows: Vec::new(),
                    });
                    groups.len() - 1
                });
            groups[g].rows.push(r);
        }
        groups
    }

    /// The same tree rooted at `root`.
    pub fn rerooted(&self, root: usize) -> JoinTree {
        assert!(root < self.node_count(), "root {root} out of range");
        JoinTree::rooted(self.spec.clone(), self.adjacency.clone(), root)
    }

    pub fn spec(&self) -> &JoinSpec {
        &self.spec
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Nodes in breadth-first order from the root.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Undirected tree edges as `(child, parent)` under the current root.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count())
            .filter_map(|t| self.parent[t].map(|p| (t, p)))
            .collect()
    }

    /// Attributes shared between `node` and its parent.
    pub fn separator(&self, node: usize) -> Vec<&str> {
        self.sep_attrs[node]
            .iter()
            .map(|&a| self.spec.attributes()[a].as_str())
            .collect()
    }

    /// Attribute names of the bag at `node`.
    pub fn bag(&self, node: usize) -> Vec<&str> {
        self.node_attrs[node]
            .iter()
            .map(|&a| self.spec.attributes()[a].as_str())
            .collect()
    }

    pub(crate) fn node_attrs(&self, node: usize) -> &[usize] {
        &self.node_attrs[node]
    }

    /// Columns of `node` (positions in its table) that it owns, i.e. whose
    /// attribute is evaluated at this node and nowhere else.
    pub(crate) fn owned_columns(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.node_attrs[node]
            .iter()
            .enumerate()
            .filter(move |(_, &a)| self.owner[a] == node)
            .map(|(c, &a)| (c, a))
    }

    pub(crate) fn groups(&self, node: usize) -> &[RowGroup] {
        &self.groups[node]
    }

    pub(crate) fn sep_cols(&self, node: usize) -> &[usize] {
        &self.sep_cols[node]
    }

    pub(crate) fn sep_cols_in_parent(&self, node: usize) -> &[usize] {
        &self.sep_cols_in_parent[node]
    }

    /// Post-order (children before parents).
    pub(crate) fn post_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().rev().copied()
    }
}

pub(crate) fn project_key(row: &[f64], cols: &[usize]) -> Key {
    cols.iter().map(|&c| key_bits(row[c])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::Table;

    fn spec(tables: &[(&str, &[&str])]) -> JoinSpec {
        let mut ts: Vec<Table> = tables
            .iter()
            .map(|(n, cols)| Table::from_rows(n, cols, &[]).unwrap())
            .collect();
        ts.push(Table::from_rows("labels", &["y"], &[]).unwrap());
        JoinSpec::new(ts, "y").unwrap()
    }

    #[test]
    fn two_tables_form_a_path() {
        let s = spec(&[("R", &["A", "B"]), ("S", &["B", "C"])]);
        let tree = build_join_tree(&s).unwrap();
        assert_eq!(tree.node_count(), 3);
        let (r, s_) = (0, 1);
        let linked = tree.parent(r) == Some(s_) || tree.parent(s_) == Some(r);
        assert!(linked);
    }

    #[test]
    fn triangle_is_cyclic() {
        let s = spec(&[("R", &["A", "B"]), ("S", &["B", "C"]), ("T", &["C", "A"])]);
        assert!(matches!(build_join_tree(&s), Err(Error::CyclicQuery)));
    }

    #[test]
    fn star_edges_share_the_key() {
        let names: Vec<String> = (0..6).map(|i| format!("F{i}")).collect();
        let mut tables = Vec::new();
        for (i, f) in names.iter().enumerate() {
            let cols: Vec<String> = if i == 0 {
                vec!["K".into(), f.clone(), "y".into()]
            } else {
                vec!["K".into(), f.clone()]
            };
            tables.push(Table::new(format!("R{i}"), cols, vec![]).unwrap());
        }
        let spec = JoinSpec::new(tables, "y").unwrap();
        let tree = build_join_tree(&spec).unwrap();
        for root in 0..6 {
            let t = tree.rerooted(root);
            assert_eq!(t.root(), root);
            for (c, _) in t.edges() {
                assert_eq!(t.separator(c), vec!["K"]);
            }
        }
    }

    #[test]
    fn disconnected_tables_still_form_a_tree() {
        let s = spec(&[("R", &["A"]), ("S", &["B"])]);
        let tree = build_join_tree(&s).unwrap();
        assert_eq!(tree.edges().len(), 2);
    }

    #[test]
    fn negative_zero_joins_zero() {
        assert_eq!(key_bits(-0.0), key_bits(0.0));
    }
}
