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

//! Far points, the pseudo-gradient and the ladder estimate of the objective.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{dot, DescentConfig, Hypothesis};
use crate::counting::{
    quantile_ladder_with, row_counts_with, AdditiveInequality, CountMode, CountOptions, CountResult, SignSplit,
};
use crate::error::{Error, Result};
use crate::relational::{count_join_rows, JoinTree};

/// `1 − yβ·x − ε|β|·|x| >= 0` for `y = +1` and for `y = −1`, in that order.
/// A point satisfying its label's inequality stays on the active side of the
/// hinge under every ε-perturbation.
pub fn far_point_inequalities(h: &Hypothesis, eps: f64) -> (AdditiveInequality, AdditiveInequality) {
    let side = |sign: f64| AdditiveInequality {
        terms: h
            .beta
            .iter()
            .map(|&b| SignSplit {
                pos: -sign * b - eps * b.abs(),
                neg: -sign * b + eps * b.abs(),
            })
            .collect(),
        offset: 1.0,
        threshold: 0.0,
    };
    (side(1.0), side(-1.0))
}

/// The two same-signed halves of the loss part of the pseudo-gradient,
/// before division by `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientParts {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    #[serde(with = "crate::biguint_string")]
    pub n: BigUint,
    pub peak_dist_size: usize,
}

pub(crate) fn join_size(tree: &JoinTree) -> Result<(BigUint, f64)> {
    let n = count_join_rows(tree);
    let nf = n.to_f64().unwrap_or(f64::INFINITY);
    if nf == 0.0 {
        return Err(Error::EmptyInstance);
    }
    Ok((n, nf))
}

/// Ĝ from far-point counts: `(Ĝ⁻ + Ĝ⁺)/N + c·β`.
pub fn pseudo_gradient(tree: &JoinTree, h: &Hypothesis, cfg: &DescentConfig) -> Result<(Vec<f64>, GradientParts)> {
    let (n, nf) = join_size(tree)?;
    let (ineq_pos, ineq_neg) = far_point_inequalities(h, cfg.eps);
    let opts = cfg.count_options();
    let (pos, neg) = crate::par::join(
        || row_counts_with(tree, &ineq_pos, 1.0, cfg.eps, cfg.mode, &opts),
        || row_counts_with(tree, &ineq_neg, -1.0, cfg.eps, cfg.mode, &opts),
    );
    let (pos, neg) = (pos?, neg?);
    let (minus, plus) = split_sums(&pos, &neg);
    let c = cfg.reg_coef.value(cfg.lambda);
    let g = minus
        .iter()
        .zip(&plus)
        .zip(&h.beta)
        .map(|((m, p), b)| (m + p) / nf + c * b)
        .collect();
    Ok((
        g,
        GradientParts {
            minus,
            plus,
            n,
            peak_dist_size: pos.peak_dist_size.max(neg.peak_dist_size),
        },
    ))
}

/// `Ĝ⁻_k = Σ_{v<0} v C⁻ − Σ_{v≥0} v C⁺` and `Ĝ⁺_k = Σ_{v≥0} v C⁻ − Σ_{v<0} v C⁺`.
fn split_sums(pos: &CountResult, neg: &CountResult) -> (Vec<f64>, Vec<f64>) {
    let d = pos.columns.len();
    let mut minus = vec![0.0; d];
    let mut plus = vec![0.0; d];
    for k in 0..d {
        for &(v, c) in &neg.columns[k].values {
            if v < 0.0 {
                minus[k] += v * c;
            } else {
                plus[k] += v * c;
            }
        }
        for &(v, c) in &pos.columns[k].values {
            if v >= 0.0 {
                minus[k] -= v * c;
            } else {
                plus[k] -= v * c;
            }
        }
    }
    (minus, plus)
}

/// Ladder-based pieces of `F̂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FhatParts {
    /// Estimated `Σ max(0, score)` over label `+1` rows.
    pub loss_pos: f64,
    pub loss_neg: f64,
    pub n: f64,
    pub regularizer: f64,
    pub peak_dist_size: usize,
}

impl FhatParts {
    pub fn value(&self) -> f64 {
        (self.loss_pos + self.loss_neg) / self.n + self.regularizer
    }
}

pub fn fhat(h: &Hypothesis, tree: &JoinTree, eps: f64, mode: CountMode) -> Result<f64> {
    fhat_parts(h, tree, eps, mode, &CountOptions::default()).map(|p| p.value())
}

/// Builds the score ladders of `1 − yβ·x − ε|β|·|x|` for both labels.
pub fn fhat_parts(
    h: &Hypothesis,
    tree: &JoinTree,
    eps: f64,
    mode: CountMode,
    opts: &CountOptions,
) -> Result<FhatParts> {
    let (_, nf) = join_size(tree)?;
    let (ineq_pos, ineq_neg) = far_point_inequalities(h, eps);
    let (pos, neg) = crate::par::join(
        || quantile_ladder_with(tree, &ineq_pos, 1.0, eps, mode, opts),
        || quantile_ladder_with(tree, &ineq_neg, -1.0, eps, mode, opts),
    );
    let (pos, neg) = (pos?, neg?);
    Ok(FhatParts {
        loss_pos: pos.positive_mass(),
        loss_neg: neg.positive_mass(),
        n: nf,
        regularizer: h.lambda * dot(&h.beta, &h.beta),
        peak_dist_size: pos.peak_dist_size.max(neg.peak_dist_size),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{build_join_tree, materialize_join, JoinSpec, Table};
    use crate::svm::gradient_exact;

    fn tree(rows: &[&[f64]]) -> JoinTree {
        let t = Table::from_rows("t", &["x", "y"], rows).unwrap();
        build_join_tree(&JoinSpec::new(vec![t], "y").unwrap()).unwrap()
    }

    #[test]
    fn far_point_examples() {
        let (pos, neg) = far_point_inequalities(&Hypothesis::origin(2, 0.1), 0.3);
        assert!(pos.satisfied(&[5.0, -5.0]) && neg.satisfied(&[-1.0, 1.0]));
        let (pos, _) = far_point_inequalities(&Hypothesis::new(vec![0.5], 0.1), 0.1);
        assert!(pos.satisfied(&[1.0]));
        let (pos, _) = far_point_inequalities(&Hypothesis::new(vec![1.0], 0.1), 0.1);
        assert!(!pos.satisfied(&[1.0]));
    }

    #[test]
    fn origin_gradient_is_mean_signed_point() {
        let t = tree(&[&[0.5, 1.0], &[-0.25, -1.0], &[1.0, 1.0]]);
        let cfg = DescentConfig::new(0.7, 0.2, 1).with_mode(CountMode::Exact);
        let (g, parts) = pseudo_gradient(&t, &Hypothesis::origin(1, 0.7), &cfg).unwrap();
        let x = materialize_join(&t).unwrap();
        assert_eq!(g, gradient_exact(&Hypothesis::origin(1, 0.7), &x).unwrap());
        assert!(parts.minus[0] <= 0.0 && parts.plus[0] >= 0.0);
        assert_eq!(parts.n, BigUint::from(3u32));
    }

    #[test]
    fn fhat_examples() {
        let t = tree(&[&[1.0, 1.0]]);
        for mode in [CountMode::Exact, CountMode::Sketch] {
            assert_eq!(fhat(&Hypothesis::origin(1, 0.0), &t, 0.3, mode).unwrap(), 1.0);
            // margin 1 − 0.95 = 0.05 below ε|β||x| = 0.095: only the regularizer remains
            let h = Hypothesis::new(vec![0.95], 0.2);
            let f = fhat(&h, &t, 0.1, mode).unwrap();
            assert!((f - 0.2 * 0.95 * 0.95).abs() < 1e-15);
        }
    }
}
