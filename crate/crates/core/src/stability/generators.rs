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

//! Instance generators.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::{build_join_tree, count_join_rows, materialize_join, JoinSpec, Table};
use crate::svm::{gradient_exact, Hypothesis};

/// Counting-knapsack gadget: a `(Key, Value, y)` table with rows
/// `(1, 1, +1)` and `(0, −k, +1)`, and per weight a table `(Key, E_i)` with
/// rows `(1, 0)`, `(1, w_i/L)`, `(0, 0)`.
///
/// Key-1 join rows enumerate the subsets of the items. At
/// `β = (0, 0, 1, …, 1)` exactly the subsets with total weight at most `L`
/// (plus the key-0 row) are on the active side of the hinge.
pub fn gen_knapsack_instance(weights: &[f64], capacity: f64, k: u64) -> Result<JoinSpec> {
    if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::Config("weights must be positive and finite".into()));
    }
    if !(capacity > 0.0 && capacity.is_finite()) {
        return Err(Error::Config("capacity must be positive".into()));
    }
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut tables = vec![Table::from_rows(
        "value",
        &["Key", "Value", "y"],
        &[&[1.0, 1.0, 1.0], &[0.0, -(k as f64), 1.0]],
    )?];
    for (i, w) in weights.iter().enumerate() {
        let col = format!("E{}", i + 1);
        tables.push(Table::from_rows(
            &format!("item{}", i + 1),
            &["Key", &col],
            &[&[1.0, 0.0], &[1.0, w / capacity], &[0.0, 0.0]],
        )?);
    }
    JoinSpec::new(tables, "y")
}

/// `G_2 = −N · ∂F/∂β_Value` at `β = (0, 0, 1, …, 1)` and `λ = 0`, on the
/// materialized gadget. Equals the number of fitting subsets minus `k`.
pub fn gadget_g2(spec: &JoinSpec) -> Result<f64> {
    let value = spec
        .feature_index("Value")
        .ok_or_else(|| Error::Spec("not a knapsack gadget: no Value feature".into()))?;
    let key = spec
        .feature_index("Key")
        .ok_or_else(|| Error::Spec("not a knapsack gadget: no Key feature".into()))?;
    let x = materialize_join(&build_join_tree(spec)?)?;
    let beta = (0..spec.d())
        .map(|j| if j == value || j == key { 0.0 } else { 1.0 })
        .collect();
    let g = gradient_exact(&Hypothesis::new(beta, 0.0), &x)?;
    Ok(-(x.len() as f64) * g[value])
}

/// Generation parameters and the quantities tests need to pick stability
/// constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableMeta {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub margin: f64,
    pub noise: f64,
    pub seed: u64,
    /// Rows per key value in each dimension table.
    pub fanout: usize,
    /// Ground-truth direction, one weight per feature; zero off the fact
    /// features.
    pub beta_true: Vec<f64>,
    pub join_size: u64,
    pub labels_flipped: usize,
    /// Perturbation size the margin absorbs: a point at margin `μ` keeps
    /// the sign of `β°·x` under any `μ/4`-perturbation.
    pub alpha: f64,
    /// `min(1, μ)`.
    pub delta: f64,
    /// `(1 + 2δ)(1 + δ) − 1`: a `(1+2δ)`-approximation may lose the same
    /// `1 + δ` factor an exact optimum is allowed to lose.
    pub gamma: f64,
    /// Regularization weight the constants refer to.
    pub lambda: f64,
}

/// Regularization weight recorded with generated stable instances.
pub const STABLE_LAMBDA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct StableInstance {
    pub spec: JoinSpec,
    pub meta: StableMeta,
}

const FANOUT: usize = 3;
const KEY_VALUES: usize = 4;

/// A fact table `(K_1..K_{m−1}, A_1..A_f, y)` and `m − 1` dimension tables
/// `(K_i, D_i)` with [`FANOUT`] rows per key value, so `d = 2(m−1) + f`.
///
/// Fact points are drawn uniformly from `[-1, 1]^f` and kept only when
/// `|β°·a| >= margin` for a random unit `β°`; the label is the sign, flipped
/// with probability `noise`.
pub fn gen_stable_instance(d: usize, m: usize, n: usize, margin: f64, noise: f64, seed: u64) -> Result<StableInstance> {
    if m == 0 || d < 2 * (m - 1) + 1 {
        return Err(Error::Config(format!(
            "need d >= 2(m-1) + 1 features for m = {m} tables, got d = {d}"
        )));
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Config(format!("margin must lie in (0, 1), got {margin}")));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Config(format!("noise must lie in [0, 1], got {noise}")));
    }
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let f = d - 2 * (m - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let direction: Vec<f64> = loop {
        let v: Vec<f64> = (0..f).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let nv = crate::svm::norm(&v);
        if nv > 1e-3 {
            break v.iter().map(|x| x / nv).collect();
        }
    };
    // the coordinate-wise largest |β°·a| over the cube is ‖β°‖₁ >= 1 > margin
    let keys = m - 1;
    let mut fact_rows = Vec::with_capacity(n);
    let mut flipped = 0;
    let mut tries = 0usize;
    while fact_rows.len() < n {
        tries += 1;
        if tries > 1000 * n + 100_000 {
            return Err(Error::Config(format!("margin {margin} rejects almost every point")));
        }
        let a: Vec<f64> = (0..f).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let s = crate::svm::dot(&direction, &a);
        if s.abs() < margin {
            continue;
        }
        let mut y = s.signum();
        if rng.random::<f64>() < noise {
            y = -y;
            flipped += 1;
        }
        let mut row: Vec<f64> = (0..keys)
            .map(|_| rng.random_range(0..KEY_VALUES) as f64 / KEY_VALUES as f64)
            .collect();
        row.extend(a);
        row.push(y);
        fact_rows.push(row);
    }

    let mut columns: Vec<String> = (1..=keys).map(|i| format!("K{i}")).collect();
    columns.extend((1..=f).map(|j| format!("A{j}")));
    columns.push("y".into());
    let mut tables = vec![Table::new("fact", columns, fact_rows)?];
    for i in 1..=keys {
        let rows = (0..KEY_VALUES)
            .flat_map(|k| (0..FANOUT).map(move |_| k))
            .map(|k| vec![k as f64 / KEY_VALUES as f64, rng.random_range(-1.0..=1.0)])
            .collect();
        tables.push(Table::new(
            format!("dim{i}"),
            vec![format!("K{i}"), format!("D{i}")],
            rows,
        )?);
    }
    let spec = JoinSpec::new(tables, "y")?;
    let beta_true = spec
        .features()
        .map(|name| {
            name.strip_prefix('A')
                .and_then(|j| j.parse::<usize>().ok())
                .map_or(0.0, |j| direction[j - 1])
        })
        .collect();
    let join_size = count_join_rows(&build_join_tree(&spec)?).to_u64().unwrap_or(u64::MAX);
    Ok(StableInstance {
        meta: StableMeta {
            d,
            m,
            n,
            margin,
            noise,
            seed,
            fanout: FANOUT,
            beta_true,
            join_size,
            labels_flipped: flipped,
            alpha: margin / 4.0,
            delta: margin.min(1.0),
            gamma: (1.0 + 2.0 * margin.min(1.0)) * (1.0 + margin.min(1.0)) - 1.0,
            lambda: STABLE_LAMBDA,
        },
        spec,
    })
}
