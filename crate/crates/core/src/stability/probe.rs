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

//! Sampling-based stability probe.
//!
//! Stability quantifies over every pair of α-perturbations, so the probe can
//! only refute it: a violation on a sampled pair is a counterexample
//! (replayable from its seed), while a clean run is evidence. Optima are
//! approximated by the baseline trainer followed by a shrinking coordinate
//! grid search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Perturbation;
use crate::error::{Error, Result};
use crate::relational::{build_join_tree, materialize_join_with_cap, DesignMatrix, JoinSpec};
use crate::svm::{baseline_train, dot, norm, objective_exact, project, radius, Hypothesis};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub baseline_steps: usize,
    /// Initial grid pitch of the refinement.
    pub refine_radius: f64,
    /// Refinement stops below this pitch.
    pub refine_pitch: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            baseline_steps: 2000,
            refine_radius: 1.0,
            refine_pitch: 1e-7,
        }
    }
}

/// Approximate `argmin_β F(β, X)` inside the feasible ball and its value.
pub fn approx_optimum(x: &DesignMatrix, lambda: f64, s: &OptimizerSettings) -> Result<(Hypothesis, f64)> {
    let (start, _) = baseline_train(x, lambda, s.baseline_steps.max(1))?;
    let f = |b: &[f64]| objective_exact(&Hypothesis::new(b.to_vec(), lambda), x);
    let mut best = start.beta;
    let mut fbest = f(&best)?;
    let d = best.len();
    let mut pitch = s.refine_radius;
    while pitch >= s.refine_pitch {
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 200 {
            improved = false;
            rounds += 1;
            let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * d + 1);
            for k in 0..d {
                for sign in [1.0, -1.0] {
                    let mut e = vec![0.0; d];
                    e[k] = sign;
                    dirs.push(e);
                }
            }
            let g = crate::svm::gradient_exact(&Hypothesis::new(best.clone(), lambda), x)?;
            let gn = norm(&g);
            if gn > 0.0 {
                dirs.push(g.iter().map(|v| -v / gn).collect());
            }
            for dir in dirs {
                let cand: Vec<f64> = best.iter().zip(&dir).map(|(b, u)| b + pitch * u).collect();
                let cand = project(&cand, lambda);
                let fc = f(&cand)?;
                if fc < fbest {
                    best = cand;
                    fbest = fc;
                    improved = true;
                }
            }
        }
        pitch /= 2.0;
    }
    Ok((Hypothesis::new(best, lambda), fbest))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub alpha: f64,
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub budget: usize,
    pub seed: u64,
    /// Near-optimal hypotheses tried per sample for the second condition.
    pub candidates: usize,
    pub optimizer: OptimizerSettings,
    pub output_cap: u64,
}

impl ProbeParams {
    pub fn new(alpha: f64, delta: f64, gamma: f64, lambda: f64, budget: usize, seed: u64) -> Self {
        ProbeParams {
            alpha,
            delta,
            gamma,
            lambda,
            budget,
            seed,
            candidates: 8,
            optimizer: OptimizerSettings::default(),
            output_cap: crate::relational::DEFAULT_OUTPUT_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("probe budget must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.gamma >= 0.0 && self.lambda > 0.0) {
            return Err(Error::Config("gamma must be >= 0 and lambda > 0".into()));
        }
        Ok(())
    }
}

/// One sampled pair `(X_a, X_b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub index: usize,
    pub seed: u64,
    pub opt_a: f64,
    pub opt_b: f64,
    pub opt_x: f64,
    /// `F(β*_a, X_b) / min F(·, X_b)`.
    pub ratio_optimum: f64,
    /// Worst `F(β_a, X_b) / min F(·, X_b)` over `(1+2δ)`-approximate `β_a`.
    pub ratio_near_optimal: f64,
    /// The same with `X_b = X`.
    pub ratio_near_optimal_at_x: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EvidenceOfStability,
    CounterexampleFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sample: usize,
    pub seed: u64,
    /// `optimum`, `near_optimal` or `near_optimal_at_x`.
    pub condition: String,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: ProbeParams,
    pub samples: Vec<ProbeSample>,
    pub worst_ratio_optimum: f64,
    pub worst_ratio_near_optimal: f64,
    pub worst_ratio_near_optimal_at_x: f64,
    /// Largest excess over `1 + γ` among the near-optimal checks; negative
    /// when none was violated.
    pub worst_gamma_violation: f64,
    pub verdict: Verdict,
    /// Verdict of the near-optimal check restricted to `X_b = X`.
    pub verdict_at_x: Verdict,
    pub counterexample: Option<Counterexample>,
}

fn sample_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.random()
}

pub fn stability_probe(spec: &JoinSpec, params: &ProbeParams) -> Result<StabilityReport> {
    params.validate()?;
    let tree = build_join_tree(spec)?;
    let x = materialize_join_with_cap(&tree, params.output_cap)?;
    if x.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let opt_x = approx_optimum(&x, params.lambda, &params.optimizer)?.1;
    let samples: Vec<Result<ProbeSample>> = crate::par::map_range(params.budget, |i| {
        run_sample(&x, opt_x, params, i, sample_seed(params.seed, i))
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;

    let worst = |f: fn(&ProbeSample) -> f64| samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let worst_ratio_optimum = worst(|s| s.ratio_optimum);
    let worst_ratio_near_optimal = worst(|s| s.ratio_near_optimal);
    let worst_ratio_near_optimal_at_x = worst(|s| s.ratio_near_optimal_at_x);

    let mut counterexample = None;
    for s in &samples {
        let checks = [
            ("optimum", s.ratio_optimum, 1.0 + params.delta),
            ("near_optimal", s.ratio_near_optimal, 1.0 + params.gamma),
            ("near_optimal_at_x", s.ratio_near_optimal_at_x, 1.0 + params.gamma),
        ];
        if let Some((name, ratio, bound)) = checks.into_iter().find(|c| c.1 > c.2) {
            counterexample = Some(Counterexample {
                sample: s.index,
                seed: s.seed,
                condition: name.to_string(),
                ratio,
                bound,
            });
            break;
        }
    }
    let verdict_of = |bad: bool| {
        if bad {
            Verdict::CounterexampleFound
        } else {
            Verdict::EvidenceOfStability
        }
    };
    Ok(StabilityReport {
        params: params.clone(),
        worst_ratio_optimum,
        worst_ratio_near_optimal,
        worst_ratio_near_optimal_at_x,
        worst_gamma_violation: worst_ratio_near_optimal.max(worst_ratio_near_optimal_at_x) - (1.0 + params.gamma),
        verdict: verdict_of(counterexample.is_some()),
        verdict_at_x: verdict_of(worst_ratio_near_optimal_at_x > 1.0 + params.gamma),
        counterexample,
        samples,
    })
}

/// Recomputes one sample from its stored seed.
pub fn replay_sample(spec: &JoinSpec, params: &ProbeParams, index: usize, seed: u64) -> Result<ProbeSample> {
    let tree = build_join_tree(spec)?;
    let x = materialize_join_with_cap(&tree, params.output_cap)?;
    let opt_x = approx_optimum(&x, params.lambda, &params.optimizer)?.1;
    run_sample(&x, opt_x, params, index, seed)
}

fn run_sample(x: &DesignMatrix, opt_x: f64, p: &ProbeParams, index: usize, seed: u64) -> Result<ProbeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xa = Perturbation::random(x, p.alpha, rng.random()).apply(x);
    let xb = Perturbation::random(x, p.alpha, rng.random()).apply(x);
    let (beta_a, opt_a) = approx_optimum(&xa, p.lambda, &p.optimizer)?;
    let (_, opt_b) = approx_optimum(&xb, p.lambda, &p.optimizer)?;
    let f = |b: &[f64], m: &DesignMatrix| objective_exact(&Hypothesis::new(b.to_vec(), p.lambda), m);

    let ratio_optimum = f(&beta_a.beta, &xb)? / opt_b;
    let level = (1.0 + 2.0 * p.delta) * opt_a;
    let mut candidates = vec![beta_a.beta.clone()];
    let d = beta_a.d();
    for _ in 0..p.candidates {
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let un = norm(&u);
        if un == 0.0 {
            continue;
        }
        let u: Vec<f64> = u.iter().map(|v| v / un).collect();
        candidates.push(sublevel_boundary(&beta_a.beta, &u, level, p.lambda, &xa)?);
    }
    let mut near = f64::NEG_INFINITY;
    let mut near_x = f64::NEG_INFINITY;
    for c in &candidates {
        near = near.max(f(c, &xb)? / opt_b);
        near_x = near_x.max(f(c, x)? / opt_x);
    }
    Ok(ProbeSample {
        index,
        seed,
        opt_a,
        opt_b,
        opt_x,
        ratio_optimum,
        ratio_near_optimal: near,
        ratio_near_optimal_at_x: near_x,
    })
}

/// Farthest point from `start` along `u`, inside the ball, whose objective
/// stays within `level`. `F` is convex along the ray, so bisection applies.
fn sublevel_boundary(start: &[f64], u: &[f64], level: f64, lambda: f64, x: &DesignMatrix) -> Result<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { start.iter().zip(u).map(|(b, v)| b + t * v).collect() };
    let f = |t: f64| objective_exact(&Hypothesis::new(at(t), lambda), x);
    // largest t keeping the point in the ball
    let r = radius(start.len(), lambda);
    let bu = dot(start, u);
    let disc = bu * bu - (dot(start, start) - r * r);
    let t_ball = (-bu + disc.max(0.0).sqrt()).max(0.0);
    let (mut lo, mut hi) = (0.0, t_ball);
    if f(hi)? <= level {
        return Ok(at(hi));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::Table;

    #[test]
    fn optimum_of_one_point() {
        // F(b) = max(0, 1 − b/2) + 0.01 b², minimized at b = 2
        let x = DesignMatrix::new(vec!["x".into()], vec![vec![0.5]], vec![1.0]);
        let (h, f) = approx_optimum(&x, 0.01, &OptimizerSettings::default()).unwrap();
        assert!((h.beta[0] - 2.0).abs() < 1e-4, "{:?}", h.beta);
        assert!((f - 0.04).abs() < 1e-6);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let t = Table::from_rows("t", &["x", "y"], &[&[0.5, 1.0]]).unwrap();
        let spec = JoinSpec::new(vec![t], "y").unwrap();
        let params = ProbeParams::new(0.01, 0.1, 0.1, 0.01, 0, 1);
        assert!(matches!(stability_probe(&spec, &params), Err(Error::Config(_))));
    }

    fn single_point() -> JoinSpec {
        let t = Table::from_rows("t", &["x", "y"], &[&[0.5, 1.0]]).unwrap();
        JoinSpec::new(vec![t], "y").unwrap()
    }

    #[test]
    fn single_point_small_lambda_is_refuted() {
        // β*_a = 1/x_a and min F = λ/x², so opposite 1% perturbations give
        // F(β*_a, X_b) / min F(·, X_b) ≈ (0.0198 + 0.0392) / 0.0408 ≈ 1.45.
        let params = ProbeParams::new(0.01, 0.1, 0.1, 0.01, 100, 7);
        let report = stability_probe(&single_point(), &params).unwrap();
        assert_eq!(report.verdict, Verdict::CounterexampleFound);
        assert!(report.worst_ratio_optimum > 1.3 && report.worst_ratio_optimum < 1.5);
        // γ < 2δ is refuted even without perturbation: the sublevel boundary
        // itself is a (1+2δ)-approximation.
        assert!(report.worst_ratio_near_optimal_at_x > 1.2);
    }

    #[test]
    fn single_point_within_consistent_constants() {
        let (delta, alpha) = (0.1, 0.001);
        let gamma = (1.0 + 2.0 * delta) * (1.0 + delta) - 1.0;
        let params = ProbeParams::new(alpha, delta, gamma, 0.01, 50, 7);
        let report = stability_probe(&single_point(), &params).unwrap();
        assert_eq!(report.verdict, Verdict::EvidenceOfStability, "{report:?}");
    }

    #[test]
    fn seeds_are_replayable() {
        let t = Table::from_rows("t", &["x", "y"], &[&[0.5, 1.0], &[-0.2, -1.0]]).unwrap();
        let spec = JoinSpec::new(vec![t], "y").unwrap();
        let mut params = ProbeParams::new(0.05, 0.1, 0.1, 0.05, 3, 9);
        params.optimizer.baseline_steps = 200;
        let report = stability_probe(&spec, &params).unwrap();
        let again = stability_probe(&spec, &params).unwrap();
        assert_eq!(report, again);
        let s = &report.samples[2];
        assert_eq!(&replay_sample(&spec, &params, 2, s.seed).unwrap(), s);
    }
}
