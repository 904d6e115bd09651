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

//! The relational trainer and the materialized baseline.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::pseudo::{fhat_parts, join_size, pseudo_gradient};
use super::{
    descent_step, gradient_exact, norm, objective_exact, project, DescentConfig, Hypothesis, RegCoef, Schedule,
};
use crate::counting::CountMode;
use crate::error::{Error, Result};
use crate::relational::{build_join_tree, rescale_features, DesignMatrix, JoinSpec, JoinTree};
use crate::timing::Stopwatch;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub beta: Vec<f64>,
    pub fhat: f64,
    /// Pseudo-gradient at this iterate; absent on the last one.
    pub gradient: Option<Vec<f64>>,
    /// Step size applied to `gradient`.
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentTrace {
    pub steps: Vec<StepRecord>,
    pub selected: usize,
    pub beta_hat: Vec<f64>,
    pub fhat_hat: f64,
    pub lambda: f64,
    pub eps: f64,
    pub mode: CountMode,
    pub schedule: Schedule,
    pub reg_coef: RegCoef,
    /// Factor each feature was divided by before training.
    pub scale: Vec<f64>,
    #[serde(with = "crate::biguint_string")]
    pub n: BigUint,
    pub peak_dist_size: usize,
    pub wall_clock_secs: f64,
}

/// Rescales (unless disabled), builds the join tree and runs [`train_tree`].
/// The returned weights are for the rescaled features; see
/// [`Hypothesis::unscaled`].
pub fn train(spec: &JoinSpec, cfg: &DescentConfig) -> Result<(Hypothesis, DescentTrace)> {
    cfg.validate()?;
    let (spec, scale) = if cfg.rescale {
        rescale_features(spec)
    } else {
        (spec.clone(), vec![1.0; spec.d()])
    };
    let tree = build_join_tree(&spec)?;
    let (h, mut trace) = train_tree(&tree, cfg)?;
    trace.scale = scale;
    Ok((h, trace))
}

/// Projected pseudo-gradient descent from the origin; returns the iterate
/// with the smallest `F̂`.
pub fn train_tree(tree: &JoinTree, cfg: &DescentConfig) -> Result<(Hypothesis, DescentTrace)> {
    cfg.validate()?;
    let clock = Stopwatch::start();
    let d = tree.spec().d();
    let (n, _) = join_size(tree)?;
    let opts = cfg.count_options();

    let mut h = Hypothesis::origin(d, cfg.lambda);
    let mut steps = Vec::with_capacity(cfg.steps);
    let mut peak = 0;
    for t in 0..cfg.steps {
        let f = fhat_parts(&h, tree, cfg.eps, cfg.mode, &opts)?;
        peak = peak.max(f.peak_dist_size);
        let mut record = StepRecord {
            t,
            beta: h.beta.clone(),
            fhat: f.value(),
            gradient: None,
            eta: None,
        };
        if t + 1 < cfg.steps {
            let (g, parts) = pseudo_gradient(tree, &h, cfg)?;
            peak = peak.max(parts.peak_dist_size);
            let next = descent_step(&h, &g, t, cfg);
            record.eta = Some(cfg.schedule.eta(cfg.lambda, d, t + 1));
            record.gradient = Some(g);
            h = next;
        }
        steps.push(record);
    }

    let selected = steps
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if s.fhat < steps[best].fhat { i } else { best });
    let best = &steps[selected];
    let beta_hat = best.beta.clone();
    let trace = DescentTrace {
        selected,
        beta_hat: beta_hat.clone(),
        fhat_hat: best.fhat,
        lambda: cfg.lambda,
        eps: cfg.eps,
        mode: cfg.mode,
        schedule: cfg.schedule,
        reg_coef: cfg.reg_coef,
        scale: vec![1.0; d],
        n,
        peak_dist_size: peak,
        wall_clock_secs: clock.elapsed_secs(),
        steps,
    };
    Ok((Hypothesis::new(beta_hat, cfg.lambda), trace))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BaselineOptions {
    /// Stop once `T >= (4 d^{3/2} / (ε λ F(β̂_T)))²` for this `ε`.
    pub stop_eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineTrace {
    pub iterations: usize,
    pub stopped_early: bool,
    pub objective: f64,
    /// Largest iterate norm seen.
    pub max_norm: f64,
}

pub fn baseline_train(x: &DesignMatrix, lambda: f64, steps: usize) -> Result<(Hypothesis, BaselineTrace)> {
    baseline_train_with(x, lambda, steps, &BaselineOptions::default())
}

/// Projected gradient descent on the exact gradient with step
/// `1/(8λ√(dt))`, returning the average of the iterates.
pub fn baseline_train_with(
    x: &DesignMatrix,
    lambda: f64,
    steps: usize,
    opts: &BaselineOptions,
) -> Result<(Hypothesis, BaselineTrace)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be > 0, got {lambda}")));
    }
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let d = x.d();
    let mut h = Hypothesis::origin(d, lambda);
    let mut sum = vec![0.0; d];
    let mut max_norm: f64 = 0.0;
    let mut iterations = 0;
    let mut stopped_early = false;
    for t in 0..steps {
        for (s, b) in sum.iter_mut().zip(&h.beta) {
            *s += b;
        }
        iterations = t + 1;
        max_norm = max_norm.max(h.norm());
        if let Some(eps) = opts.stop_eps {
            let avg = Hypothesis::new(sum.iter().map(|s| s / iterations as f64).collect(), lambda);
            let f = objective_exact(&avg, x)?;
            let needed = (4.0 * (d as f64).powf(1.5) / (eps * lambda * f)).powi(2);
            if iterations as f64 >= needed {
                stopped_early = iterations < steps;
                break;
            }
        }
        if t + 1 == steps {
            break;
        }
        let g = gradient_exact(&h, x)?;
        let eta = Schedule::Conservative.eta(lambda, d, t + 1);
        let moved: Vec<f64> = h.beta.iter().zip(&g).map(|(b, gi)| b - eta * gi).collect();
        h = Hypothesis::new(project(&moved, lambda), lambda);
    }
    let avg = Hypothesis::new(sum.iter().map(|s| s / iterations as f64).collect(), lambda);
    let objective = objective_exact(&avg, x)?;
    debug_assert!(norm(&avg.beta) <= super::radius(d, lambda) * (1.0 + 1e-12));
    Ok((
        avg,
        BaselineTrace {
            iterations,
            stopped_early,
            objective,
            max_norm,
        },
    ))
}
