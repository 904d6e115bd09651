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

//! Multiplicative perturbations of point sets, stability probing and
//! instance generators.
//!
//! An ε-perturbation multiplies every coordinate of every point by its own
//! factor in `[1 − ε, 1 + ε]`.

mod generators;
mod probe;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::DesignMatrix;
use crate::svm::Hypothesis;

pub use generators::{
    gadget_g2, gen_knapsack_instance, gen_stable_instance, StableInstance, StableMeta, STABLE_LAMBDA,
};
pub use probe::{
    approx_optimum, replay_sample, stability_probe, Counterexample, OptimizerSettings, ProbeParams, ProbeSample,
    StabilityReport, Verdict,
};

/// Per-entry multipliers `s_ik` with `|s_ik| <= eps`; applied as
/// `x'_ik = (1 + s_ik) x_ik`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub eps: f64,
    pub multipliers: Vec<Vec<f64>>,
}

impl Perturbation {
    pub fn apply(&self, x: &DesignMatrix) -> DesignMatrix {
        let points = x
            .points
            .iter()
            .zip(&self.multipliers)
            .map(|(p, s)| p.iter().zip(s).map(|(v, s)| (1.0 + s) * v).collect())
            .collect();
        DesignMatrix::new(x.features.clone(), points, x.labels.clone())
    }

    /// Independent uniform multipliers.
    pub fn random(x: &DesignMatrix, eps: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let multipliers = x
            .points
            .iter()
            .map(|p| p.iter().map(|_| rng.random_range(-eps..=eps)).collect())
            .collect();
        Perturbation { eps, multipliers }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PerturbRule<'h> {
    Random {
        seed: u64,
    },
    /// The perturbation minimizing `F(β, ·)`; see [`z_perturbation`].
    Adversarial(&'h Hypothesis),
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("perturbation eps must lie in (0, 1], got {eps}")))
    }
}

pub fn perturb(x: &DesignMatrix, eps: f64, rule: PerturbRule<'_>) -> Result<DesignMatrix> {
    check_eps(eps)?;
    Ok(match rule {
        PerturbRule::Random { seed } => Perturbation::random(x, eps, seed).apply(x),
        PerturbRule::Adversarial(h) => z_perturbation(x, h, eps),
    })
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `z_ik = (1 + ε·sign(y_i β_k x_ik)) x_ik`, so that
/// `1 − y_i β·z_i = 1 − y_i β·x_i − ε|β|·|x_i|` on every row.
pub fn z_perturbation(x: &DesignMatrix, h: &Hypothesis, eps: f64) -> DesignMatrix {
    let points = x
        .rows()
        .map(|(p, y)| {
            p.iter()
                .zip(&h.beta)
                .map(|(&v, &b)| (1.0 + eps * signum0(y * b * v)) * v)
                .collect()
        })
        .collect();
    DesignMatrix::new(x.features.clone(), points, x.labels.clone())
}

/// The case rule on the sign of `y_i β_k` alone: `(1 − ε) x_ik` when
/// `y_i β_k >= 0`, else `(1 + ε) x_ik`.
pub fn z_perturbation_literal(x: &DesignMatrix, h: &Hypothesis, eps: f64) -> DesignMatrix {
    let points = x
        .rows()
        .map(|(p, y)| {
            p.iter()
                .zip(&h.beta)
                .map(|(&v, &b)| if y * b >= 0.0 { (1.0 - eps) * v } else { (1.0 + eps) * v })
                .collect()
        })
        .collect();
    DesignMatrix::new(x.features.clone(), points, x.labels.clone())
}
