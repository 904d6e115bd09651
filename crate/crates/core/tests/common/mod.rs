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

//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::test_runner::Config;
use rand::Rng;
use relsvm_core::counting::{AdditiveInequality, SignSplit};
use relsvm_core::{DesignMatrix, JoinSpec, JoinTree};

/// Every combination of one row per table that agrees on shared attributes,
/// as full tuples over `spec.attributes()`.
pub fn nested_loop_join(spec: &JoinSpec) -> Vec<Vec<f64>> {
    let attrs = spec.attributes();
    let mut partial: Vec<Vec<Option<f64>>> = vec![vec![None; attrs.len()]];
    for t in spec.tables() {
        let idx: Vec<usize> = t.columns().iter().map(|c| spec.attribute_index(c).unwrap()).collect();
        let mut next = Vec::new();
        for p in &partial {
            'row: for row in t.rows() {
                let mut q = p.clone();
                for (&a, &v) in idx.iter().zip(row) {
                    match q[a] {
                        Some(w) if w != v => continue 'row,
                        _ => q[a] = Some(v),
                    }
                }
                next.push(q);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|p| p.into_iter().map(Option::unwrap).collect())
        .collect()
}

/// Nested-loop join split into points (feature order) and labels.
pub fn nested_loop_matrix(spec: &JoinSpec) -> DesignMatrix {
    let li = spec.attribute_index(spec.label()).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for row in nested_loop_join(spec) {
        labels.push(row[li]);
        points.push(
            row.iter()
                .enumerate()
                .filter(|&(i, _)| i != li)
                .map(|(_, &v)| v)
                .collect(),
        );
    }
    DesignMatrix::new(spec.feature_names(), points, labels)
}

/// Bit pattern with `-0.0` folded into `0.0`.
pub fn bits(v: f64) -> u64 {
    (v + 0.0).to_bits()
}

/// Rows of a design matrix as a sorted multiset of bit patterns.
pub fn multiset(x: &DesignMatrix) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = x
        .rows()
        .map(|(p, y)| p.iter().chain(std::iter::once(&y)).map(|v| v.to_bits()).collect())
        .collect();
    rows.sort();
    rows
}

/// `C_{j,v}`: label-`label` rows with `x_j = v` satisfying `ineq`.
pub fn brute_counts(x: &DesignMatrix, ineq: &AdditiveInequality, label: f64) -> Vec<HashMap<u64, u64>> {
    let mut out = vec![HashMap::new(); x.d()];
    for (p, y) in x.rows() {
        if y != label || !ineq.satisfied(p) {
            continue;
        }
        for (j, &v) in p.iter().enumerate() {
            *out[j].entry(bits(v)).or_insert(0) += 1;
        }
    }
    out
}

/// Scores `Σ g_j(x_j) + offset` of label-`label` rows.
pub fn brute_scores(x: &DesignMatrix, expr: &AdditiveInequality, label: f64) -> Vec<f64> {
    x.rows()
        .filter(|&(_, y)| y == label)
        .map(|(p, _)| expr.score(p))
        .collect()
}

/// `N(H)`.
pub fn count_at_least(scores: &[f64], h: f64) -> u64 {
    scores.iter().filter(|&&s| s >= h).count() as u64
}

/// Points strictly between consecutive distinct scores, plus one on each
/// side; every one is at least `gap` away from all scores.
pub fn probe_thresholds(scores: &[f64], gap: f64) -> Vec<f64> {
    let mut s: Vec<f64> = scores.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let mut out = Vec::new();
    if let (Some(lo), Some(hi)) = (s.first(), s.last()) {
        out.push(lo - 1.0);
        out.push(hi + 1.0);
    }
    for w in s.windows(2) {
        if w[1] - w[0] > 2.0 * gap {
            out.push(0.5 * (w[0] + w[1]));
        }
    }
    out
}

/// Independent running-intersection check: for every attribute, the tree
/// nodes holding it form a connected subgraph, and every node's bag is its
/// table's schema.
pub fn running_intersection(tree: &JoinTree) -> Result<(), String> {
    let spec = tree.spec();
    let n = tree.node_count();
    if tree.edges().len() + 1 != n {
        return Err(format!("{} edges for {} nodes", tree.edges().len(), n));
    }
    for node in 0..n {
        let bag: BTreeSet<&str> = tree.bag(node).into_iter().collect();
        let schema: BTreeSet<&str> = spec.tables()[node].columns().iter().map(String::as_str).collect();
        if bag != schema {
            return Err(format!("bag of node {node} is not its table's schema"));
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in tree.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    for attr in spec.attributes() {
        let holders: BTreeSet<usize> = (0..n).filter(|&t| tree.bag(t).contains(&attr.as_str())).collect();
        let start = *holders.iter().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if holders.contains(&v) && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        if seen != holders {
            return Err(format!("nodes holding `{attr}` are disconnected"));
        }
    }
    Ok(())
}

/// `C_L`: subsets of `weights` with total at most `capacity`.
pub fn knapsack_count(weights: &[u64], capacity: u64) -> u64 {
    let m = weights.len();
    (0u64..1 << m)
        .filter(|mask| {
            let w: u64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
            w <= capacity
        })
        .count() as u64
}

/// Value frequencies per feature among label-`label` rows.
pub fn value_frequencies(x: &DesignMatrix, label: f64) -> Vec<BTreeMap<u64, u64>> {
    let mut out = vec![BTreeMap::new(); x.d()];
    for (p, _) in x.rows().filter(|&(_, y)| y == label) {
        for (j, &v) in p.iter().enumerate() {
            *out[j].entry(bits(v)).or_insert(0) += 1;
        }
    }
    out
}

/// Proptest settings without on-disk regression files.
pub fn cases(n: u32) -> Config {
    Config {
        cases: n,
        failure_persistence: None,
        ..Config::default()
    }
}

/// Random sign-split terms, a random offset, and a threshold placed among the
/// label-`label` scores but at least `1e-9` from every one of them.
pub fn random_inequality<R: Rng>(rng: &mut R, x: &DesignMatrix, label: f64) -> AdditiveInequality {
    let terms: Vec<SignSplit> = (0..x.d())
        .map(|_| SignSplit {
            pos: rng.random_range(-2.0..2.0),
            neg: rng.random_range(-2.0..2.0),
        })
        .collect();
    let offset = rng.random_range(-1.0..1.0);
    let mut ineq = AdditiveInequality::new(terms, offset, 0.0).unwrap();
    let scores = brute_scores(x, &ineq, label);
    loop {
        let base = if scores.is_empty() {
            0.0
        } else {
            scores[rng.random_range(0..scores.len())]
        };
        let th = base + rng.random_range(-0.05..0.05);
        if scores.iter().all(|s| (s - th).abs() > 1e-9) {
            ineq.threshold = th;
            return ineq;
        }
    }
}
