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

//! The soft-margin linear SVM objective and its descent machinery.
//!
//! `F(β, X) = (1/N) Σ_i max(0, 1 − y_i β·x_i) + λ‖β‖²`, with no intercept.
//! The exact objective and gradient here work on a materialized
//! [`DesignMatrix`]; [`pseudo_gradient`] and [`fhat`] work on the join tree.

mod pseudo;
mod train;

use serde::{Deserialize, Serialize};

use crate::counting::CountMode;
use crate::error::{Error, Result};
use crate::relational::DesignMatrix;

pub use pseudo::{far_point_inequalities, fhat, fhat_parts, pseudo_gradient, FhatParts, GradientParts};
pub use train::{
    baseline_train, baseline_train_with, train, train_tree, BaselineOptions, BaselineTrace, DescentTrace, StepRecord,
};

/// A weight vector together with its regularization weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl Hypothesis {
    pub fn new(beta: Vec<f64>, lambda: f64) -> Self {
        Hypothesis { beta, lambda }
    }

    pub fn origin(d: usize, lambda: f64) -> Self {
        Hypothesis {
            beta: vec![0.0; d],
            lambda,
        }
    }

    pub fn d(&self) -> usize {
        self.beta.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.beta)
    }

    /// Weights for unscaled features, given the factors each feature was
    /// divided by.
    pub fn unscaled(&self, factors: &[f64]) -> Vec<f64> {
        self.beta.iter().zip(factors).map(|(b, s)| b / s).collect()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Step-size schedule `η_t`, `t >= 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `1 / (λ √(d t))`
    #[default]
    Standard,
    /// `1 / (8 λ √(d t))`
    Conservative,
}

impl Schedule {
    pub fn eta(self, lambda: f64, d: usize, t: usize) -> f64 {
        let base = 1.0 / (lambda * ((d.max(1) * t.max(1)) as f64).sqrt());
        match self {
            Schedule::Standard => base,
            Schedule::Conservative => base / 8.0,
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Schedule::Standard),
            "conservative" => Ok(Schedule::Conservative),
            other => Err(Error::Config(format!("unknown schedule `{other}`"))),
        }
    }
}

/// Coefficient on `β` in the regularizer part of the pseudo-gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegCoef {
    /// `2λ`, the derivative of `λ‖β‖²`.
    #[default]
    TwoLambda,
    Lambda,
}

impl RegCoef {
    pub fn value(self, lambda: f64) -> f64 {
        match self {
            RegCoef::TwoLambda => 2.0 * lambda,
            RegCoef::Lambda => lambda,
        }
    }
}

impl std::str::FromStr for RegCoef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_lambda" | "2lambda" => Ok(RegCoef::TwoLambda),
            "lambda" => Ok(RegCoef::Lambda),
            other => Err(Error::Config(format!("unknown regularizer coefficient `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescentConfig {
    pub lambda: f64,
    pub eps: f64,
    /// Number of iterates, including the origin.
    pub steps: usize,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub reg_coef: RegCoef,
    #[serde(default = "default_mode")]
    pub mode: CountMode,
    #[serde(default)]
    pub seed: u64,
    /// Divide each feature by its largest magnitude before training.
    #[serde(default = "default_true")]
    pub rescale: bool,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
}

fn default_mode() -> CountMode {
    CountMode::Sketch
}

fn default_true() -> bool {
    true
}

fn default_exact_cap() -> usize {
    crate::counting::DEFAULT_EXACT_CAP
}

impl DescentConfig {
    pub fn new(lambda: f64, eps: f64, steps: usize) -> Self {
        DescentConfig {
            lambda,
            eps,
            steps,
            schedule: Schedule::default(),
            reg_coef: RegCoef::default(),
            mode: default_mode(),
            seed: 0,
            rescale: true,
            exact_cap: default_exact_cap(),
        }
    }

    pub fn with_mode(mut self, mode: CountMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_reg_coef(mut self, reg_coef: RegCoef) -> Self {
        self.reg_coef = reg_coef;
        self
    }

    pub fn with_rescale(mut self, rescale: bool) -> Self {
        self.rescale = rescale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Config(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn count_options(&self) -> crate::counting::CountOptions {
        crate::counting::CountOptions {
            exact_cap: self.exact_cap,
        }
    }
}

fn nonempty(x: &DesignMatrix) -> Result<f64> {
    if x.is_empty() {
        Err(Error::EmptyInstance)
    } else {
        Ok(x.len() as f64)
    }
}

pub fn objective_exact(h: &Hypothesis, x: &DesignMatrix) -> Result<f64> {
    let n = nonempty(x)?;
    let loss: f64 = x.rows().map(|(p, y)| (1.0 - y * dot(&h.beta, p)).max(0.0)).sum();
    Ok(loss / n + h.lambda * dot(&h.beta, &h.beta))
}

/// `2λβ − (1/N) Σ y_i x_i` over points with `1 − y_i β·x_i >= 0`.
pub fn gradient_exact(h: &Hypothesis, x: &DesignMatrix) -> Result<Vec<f64>> {
    let n = nonempty(x)?;
    let mut acc = vec![0.0; h.d()];
    for (p, y) in x.rows() {
        if 1.0 - y * dot(&h.beta, p) >= 0.0 {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += y * v;
            }
        }
    }
    Ok(h.beta
        .iter()
        .zip(acc)
        .map(|(b, a)| 2.0 * h.lambda * b - a / n)
        .collect())
}

/// `c·β − (1/N) Σ y_i x_i` over far points only, on a materialized join.
/// This is what [`pseudo_gradient`] computes with exact counts.
pub fn far_point_gradient(h: &Hypothesis, x: &DesignMatrix, eps: f64, reg_coef: RegCoef) -> Result<Vec<f64>> {
    let n = nonempty(x)?;
    let (pos, neg) = far_point_inequalities(h, eps);
    let mut acc = vec![0.0; h.d()];
    for (p, y) in x.rows() {
        let far = if y > 0.0 { pos.satisfied(p) } else { neg.satisfied(p) };
        if far {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += y * v;
            }
        }
    }
    let c = reg_coef.value(h.lambda);
    Ok(h.beta.iter().zip(acc).map(|(b, a)| c * b - a / n).collect())
}

/// Radius of the feasible ball.
pub fn radius(d: usize, lambda: f64) -> f64 {
    (d as f64).sqrt() / (2.0 * lambda)
}

/// Euclidean projection onto the ball of radius `√d / (2λ)`.
pub fn project(beta: &[f64], lambda: f64) -> Vec<f64> {
    let r = radius(beta.len(), lambda);
    let n = norm(beta);
    if n <= r {
        beta.to_vec()
    } else {
        beta.iter().map(|b| b * r / n).collect()
    }
}

/// `β_{t+1} = Π(β_t − η_{t+1} Ĝ)`.
pub fn descent_step(h: &Hypothesis, g: &[f64], t: usize, cfg: &DescentConfig) -> Hypothesis {
    let eta = cfg.schedule.eta(cfg.lambda, h.d(), t + 1);
    let moved: Vec<f64> = h.beta.iter().zip(g).map(|(b, gi)| b - eta * gi).collect();
    Hypothesis::new(project(&moved, cfg.lambda), h.lambda)
}
