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

//! Quantile ladders: for `k = 0, 1, …` the largest threshold `H_k` such that
//! at least `⌊(1+step)^k⌋` label-`ℓ` rows score `>= H_k`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{blowup, check_label, dist_semiring, score_factors, AdditiveInequality, CountMode, CountOptions};
use crate::error::{Error, Result};
use crate::relational::JoinTree;
use crate::semiring::{eval_sumprod, Counting, FactorAssignment};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileLadder {
    pub label: f64,
    pub eps: f64,
    /// Geometric ratio of the count targets; at most `eps`.
    pub step: f64,
    pub mode: CountMode,
    /// `⌊(1+step)^k⌋`, one per threshold.
    pub targets: Vec<f64>,
    /// Non-increasing.
    pub thresholds: Vec<f64>,
    #[serde(with = "crate::biguint_string")]
    pub n_label: BigUint,
    pub peak_dist_size: usize,
}

impl QuantileLadder {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// `∫_0^∞ N̂(τ) dτ`: the ladder's estimate of the summed positive part of
    /// the scores. Zero when no threshold is nonnegative.
    pub fn positive_mass(&self) -> f64 {
        let last = self.thresholds.partition_point(|&h| h >= 0.0);
        if last == 0 {
            return 0.0;
        }
        let l = last - 1;
        let mut sum = self.targets[l] * self.thresholds[l];
        for k in 0..l {
            sum += self.targets[k] * (self.thresholds[k] - self.thresholds[k + 1]);
        }
        sum
    }
}

/// `⌊(1+step)^k⌋` for every `k` with value at most `n`.
fn targets(step: f64, n: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0i32;
    loop {
        let f = (1.0 + step).powi(k).floor();
        if f > n {
            break;
        }
        out.push(f);
        k += 1;
    }
    out
}

/// Largest ratio between a count in `[f_k, f_{k+1})` (capped at `n`) and the
/// reported `f_k`.
fn ladder_ratio(targets: &[f64], step: f64, n: f64) -> f64 {
    let mut worst: f64 = 1.0;
    for (k, &f) in targets.iter().enumerate() {
        let next = targets
            .get(k + 1)
            .copied()
            .unwrap_or_else(|| (1.0 + step).powi(k as i32 + 1).floor());
        worst = worst.max((next - 1.0).min(n) / f);
    }
    worst
}

/// Drops trailing slots that repeat the previous target; they answer every
/// query identically.
fn trim(mut t: Vec<f64>) -> Vec<f64> {
    while t.len() >= 2 && t[t.len() - 1] == t[t.len() - 2] {
        t.pop();
    }
    t
}

/// Picks the target ratio and the sketch accuracy so that the reported count
/// is within `1 + eps` of the true one.
fn plan(eps: f64, n: f64, mode: CountMode) -> (f64, Vec<f64>, f64) {
    match mode {
        CountMode::Exact => {
            let t = targets(eps, n);
            if ladder_ratio(&t, eps, n) <= 1.0 + eps {
                (eps, trim(t), 0.0)
            } else {
                let step = eps / 2.0;
                (step, trim(targets(step, n)), 0.0)
            }
        }
        CountMode::Sketch => {
            let step = eps / 4.0;
            let t = targets(step, n);
            let rho = ladder_ratio(&t, step, n);
            (step, trim(t), (1.0 + eps) / rho - 1.0)
        }
    }
}

pub fn quantile_ladder(
    tree: &JoinTree,
    expr: &AdditiveInequality,
    label: f64,
    eps: f64,
    mode: CountMode,
) -> Result<QuantileLadder> {
    quantile_ladder_with(tree, expr, label, eps, mode, &CountOptions::default())
}

/// Ladder over the scores `Σ_j g_j(x_j) + offset` of label-`label` rows; the
/// inequality's threshold is ignored.
pub fn quantile_ladder_with(
    tree: &JoinTree,
    expr: &AdditiveInequality,
    label: f64,
    eps: f64,
    mode: CountMode,
    opts: &CountOptions,
) -> Result<QuantileLadder> {
    check_label(label)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("ladder needs eps > 0, got {eps}")));
    }
    let spec = tree.spec();
    let gate = FactorAssignment::new().with(spec.label(), move |y| {
        if y == label {
            BigUint::from(1u32)
        } else {
            BigUint::zero()
        }
    });
    let n_label = eval_sumprod(tree, &Counting, &gate);
    let n = n_label.to_f64().unwrap_or(f64::INFINITY);

    let (step, targets, sketch_eps) = plan(eps, n, mode);
    let sr = dist_semiring(tree, mode, sketch_eps, opts)?;
    let factors = score_factors(tree, expr, label)?;
    let dist = eval_sumprod(tree, &sr, &factors);
    if dist.overflowed() {
        return Err(blowup(&sr));
    }
    let dist = dist.shifted(expr.offset);
    let tails = dist.tails();
    let lowest = dist.entries().last().map_or(f64::NEG_INFINITY, |e| e.0);
    let thresholds = targets.iter().map(|&f| tails.quantile(f).unwrap_or(lowest)).collect();

    Ok(QuantileLadder {
        label,
        eps,
        step,
        mode,
        targets,
        thresholds,
        n_label,
        peak_dist_size: sr.peak_size(),
    })
}

/// `⌊(1+step)^k⌋` for the largest `k` with `H_k >= h`, or 0.
pub fn approx_count_at(ladder: &QuantileLadder, h: f64) -> f64 {
    match ladder.thresholds.partition_point(|&t| t >= h) {
        0 => 0.0,
        k => ladder.targets[k - 1],
    }
}
