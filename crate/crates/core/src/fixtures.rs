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

//! Seeded instance builders shared by tests, the CLI and the demo.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::relational::{JoinSpec, Table};

/// Bounds for [`random_acyclic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomShape {
    pub max_tables: usize,
    pub max_rows: usize,
    /// Upper bound on non-label attributes.
    pub max_features: usize,
    /// Distinct values per attribute; small domains make joins dense.
    pub domain: usize,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape {
            max_tables: 4,
            max_rows: 30,
            max_features: 6,
            domain: 3,
        }
    }
}

/// A random acyclic join: each table after the first shares one or two
/// attributes with an earlier table and may add one fresh attribute. The
/// label column `y` goes on a random table.
pub fn random_acyclic(seed: u64, shape: &RandomShape) -> JoinSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=shape.max_tables.max(1));
    let max_features = shape.max_features.max(1);
    let mut next_attr = 0usize;
    let mut fresh = |rng: &mut ChaCha8Rng, budget: &mut usize| -> Option<String> {
        let _ = rng;
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        next_attr += 1;
        Some(format!("a{}", next_attr - 1))
    };
    let mut budget = max_features;
    let mut schemas: Vec<Vec<String>> = Vec::with_capacity(m);
    let first_width = rng.random_range(1..=2usize.min(max_features));
    let mut first = Vec::new();
    for _ in 0..first_width {
        first.extend(fresh(&mut rng, &mut budget));
    }
    schemas.push(first);
    for _ in 1..m {
        let parent = schemas[rng.random_range(0..schemas.len())].clone();
        let share = rng.random_range(1..=parent.len().min(2));
        let mut cols: Vec<String> = parent.choose_multiple(&mut rng, share).cloned().collect();
        if rng.random_bool(0.8) {
            cols.extend(fresh(&mut rng, &mut budget));
        }
        schemas.push(cols);
    }

    // a per-attribute pool of values in [-1, 1]
    let pools: Vec<Vec<f64>> = (0..next_attr)
        .map(|_| {
            (0..shape.domain.max(1))
                .map(|_| (rng.random_range(-1.0..=1.0f64) * 100.0).round() / 100.0 + 0.0)
                .collect()
        })
        .collect();
    let label_table = rng.random_range(0..m);
    let tables = schemas
        .into_iter()
        .enumerate()
        .map(|(i, mut cols)| {
            let n = rng.random_range(1..=shape.max_rows.max(1));
            let rows = (0..n)
                .map(|_| {
                    let mut row: Vec<f64> = cols
                        .iter()
                        .map(|c| {
                            let a: usize = c[1..].parse().expect("generated name");
                            *pools[a].choose(&mut rng).expect("nonempty pool")
                        })
                        .collect();
                    if i == label_table {
                        row.push(if rng.random_bool(0.5) { 1.0 } else { -1.0 });
                    }
                    row
                })
                .collect();
            if i == label_table {
                cols.push("y".into());
            }
            Table::new(format!("t{i}"), cols, rows).expect("well-formed table")
        })
        .collect();
    JoinSpec::new(tables, "y").expect("label present")
}

/// `R_0(K, F_0, y), R_1(K, F_1), …, R_{m−1}(K, F_{m−1})` with `n` rows each
/// and a single key value, so the join has `n^m` rows.
pub fn star_join(m: usize, n: usize, seed: u64) -> JoinSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = (0..m.max(1))
        .map(|i| {
            let mut cols = vec!["K".to_string(), format!("F{i}")];
            if i == 0 {
                cols.push("y".into());
            }
            let rows = (0..n)
                .map(|_| {
                    let mut row = vec![0.0, rng.random_range(-1.0..=1.0)];
                    if i == 0 {
                        row.push(if rng.random_bool(0.5) { 1.0 } else { -1.0 });
                    }
                    row
                })
                .collect();
            Table::new(format!("R{i}"), cols, rows).expect("well-formed table")
        })
        .collect();
    JoinSpec::new(tables, "y").expect("label present")
}

/// `R(A, B, y), S(B, C), T(C, A)`: the smallest cyclic join.
pub fn triangle() -> JoinSpec {
    let r = Table::from_rows("R", &["A", "B", "y"], &[&[1.0, 2.0, 1.0]]).expect("table");
    let s = Table::from_rows("S", &["B", "C"], &[&[2.0, 3.0]]).expect("table");
    let t = Table::from_rows("T", &["C", "A"], &[&[3.0, 1.0]]).expect("table");
    JoinSpec::new(vec![r, s, t], "y").expect("label present")
}
