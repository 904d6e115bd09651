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

//! Oracle-equivalence suites behind `relsvm verify`.

use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relsvm_core::counting::CountOptions;
use relsvm_core::io::load_spec;
use relsvm_core::stability::z_perturbation;
use relsvm_core::svm::{fhat_parts, radius};
use relsvm_core::{
    build_join_tree, count_join_rows, far_point_gradient, materialize_join_with_cap, objective_exact, pseudo_gradient,
    rescale_features_with, CountMode, DescentConfig, DesignMatrix, Hypothesis, JoinTree,
};
use serde::Serialize;

use crate::cli::VerifyArgs;
use crate::error::{CliError, CliResult};
use crate::run::{prepare_dir, write_config, write_json, Metadata, RunConfig};

#[derive(Debug, Serialize)]
pub struct Property {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    /// Largest violation margin seen; `<= tolerance` passes.
    pub worst_deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub n: u64,
    pub d: usize,
    pub lambda: f64,
    pub eps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub properties: Vec<Property>,
    pub all_passed: bool,
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    checked: usize,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            name,
            tolerance,
            worst: f64::NEG_INFINITY,
            checked: 0,
        }
    }

    fn see(&mut self, deviation: f64) {
        self.checked += 1;
        // NaN counts as a failure
        self.worst = if deviation.is_nan() {
            f64::INFINITY
        } else {
            self.worst.max(deviation)
        };
    }

    fn finish(self) -> Property {
        let worst = if self.checked == 0 { 0.0 } else { self.worst };
        Property {
            name: self.name,
            passed: worst <= self.tolerance,
            checked: self.checked,
            worst_deviation: worst,
            tolerance: self.tolerance,
        }
    }
}

fn sample_beta(rng: &mut ChaCha8Rng, d: usize, lambda: f64) -> Vec<f64> {
    // spread over the ball, up to a radius where both hinge sides occur
    let r = radius(d, lambda).min(3.0) * rng.random::<f64>();
    let dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    dir.iter().map(|v| v * r / norm).collect()
}

/// Same-signed halves of `Σ_far −y x`.
fn far_halves(x: &DesignMatrix, h: &Hypothesis, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let (pos, neg) = relsvm_core::far_point_inequalities(h, eps);
    let mut minus = vec![0.0; x.d()];
    let mut plus = vec![0.0; x.d()];
    for (p, y) in x.rows() {
        let far = if y > 0.0 { pos.satisfied(p) } else { neg.satisfied(p) };
        if !far {
            continue;
        }
        for (k, &v) in p.iter().enumerate() {
            let t = -y * v;
            if t <= 0.0 {
                minus[k] += t;
            } else {
                plus[k] += t;
            }
        }
    }
    (minus, plus)
}

/// Relative distance outside `[exact/(1+ε)², exact(1+ε)]` for same-signed values.
fn half_deviation(exact: f64, est: f64, eps: f64) -> f64 {
    let (a, b) = (exact.abs(), est.abs());
    if a == 0.0 {
        return b;
    }
    let lo = a / (1.0 + eps).powi(2);
    let hi = a * (1.0 + eps);
    (lo - b).max(b - hi) / a
}

pub fn run_suites(tree: &JoinTree, x: &DesignMatrix, args: &VerifyArgs) -> CliResult<VerifyReport> {
    let n = count_join_rows(tree);
    let mut join = Tracker::new("join_cardinality", 0.0);
    join.see((n.to_f64().unwrap_or(f64::INFINITY) - x.len() as f64).abs());

    let mut gradient = Tracker::new("gradient_oracle", 1e-9);
    let mut halves = Tracker::new("sketch_sign_halves", 1e-9);
    let mut sandwich = Tracker::new("fhat_sandwich", 1e-9);
    let d = x.d();
    let scale = args.count_scale.unwrap_or(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for &eps in &args.eps {
        for s in 0..args.samples {
            let beta = if s == 0 {
                vec![0.0; d]
            } else {
                sample_beta(&mut rng, d, args.lambda)
            };
            let h = Hypothesis::new(beta, args.lambda);

            let exact_cfg = DescentConfig::new(args.lambda, eps, 1).with_mode(CountMode::Exact);
            let (g, _) = pseudo_gradient(tree, &h, &exact_cfg)?;
            let oracle = far_point_gradient(&h, x, eps, exact_cfg.reg_coef)?;
            gradient.see(g.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

            let sketch_cfg = exact_cfg.clone().with_mode(CountMode::Sketch);
            let (_, parts) = pseudo_gradient(tree, &h, &sketch_cfg)?;
            let (minus, plus) = far_halves(x, &h, eps);
            for k in 0..d {
                halves.see(half_deviation(minus[k], parts.minus[k], eps));
                halves.see(half_deviation(plus[k], parts.plus[k], eps));
            }

            let f = objective_exact(&h, &z_perturbation(x, &h, eps))?;
            for mode in [CountMode::Exact, CountMode::Sketch] {
                let mut p = fhat_parts(&h, tree, eps, mode, &CountOptions::default())?;
                p.loss_pos *= scale;
                p.loss_neg *= scale;
                let est = p.value();
                sandwich.see((est - f).max(f / (1.0 + eps) - est));
            }
        }
    }
    let properties: Vec<Property> = [join, gradient, halves, sandwich]
        .into_iter()
        .map(Tracker::finish)
        .collect();
    Ok(VerifyReport {
        n: x.len() as u64,
        d,
        lambda: args.lambda,
        eps: args.eps.clone(),
        samples: args.samples,
        seed: args.seed,
        all_passed: properties.iter().all(|p| p.passed),
        properties,
    })
}

pub fn verify_cmd(args: &VerifyArgs, verbosity: u8) -> CliResult<()> {
    if args.eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) || args.lambda.is_nan() || args.lambda <= 0.0 {
        return Err(CliError::Usage("need 0 < eps <= 1 and lambda > 0".into()));
    }
    let loaded = load_spec(&args.spec)?;
    let spec = if args.no_rescale {
        loaded.spec.clone()
    } else {
        rescale_features_with(&loaded.spec, &loaded.scale_overrides).0
    };
    let tree = build_join_tree(&spec)?;
    let x = match materialize_join_with_cap(&tree, args.oracle_cap) {
        Err(e @ relsvm_core::Error::OutputCapExceeded { .. }) => {
            eprintln!("the oracle cannot materialize this join; raise RELSVM_ORACLE_CAP or --oracle-cap to verify it");
            return Err(e.into());
        }
        other => other?,
    };
    if x.is_empty() {
        return Err(relsvm_core::Error::EmptyInstance.into());
    }
    prepare_dir(&args.run.out, args.run.force)?;
    let mut cfg = RunConfig::new("verify", &args.run.out, verbosity)
        .param("lambda", args.lambda)
        .param("eps", &args.eps)
        .param("samples", args.samples)
        .param("seed", args.seed)
        .param("rescale", !args.no_rescale)
        .param("oracle_cap", args.oracle_cap);
    if let Some(s) = args.count_scale {
        cfg = cfg.param("count_scale", s);
    }
    cfg.spec = Some(args.spec.clone());
    write_config(&args.run.out, &cfg)?;

    let clock = Instant::now();
    let report = run_suites(&tree, &x, args)?;
    let wall = clock.elapsed().as_secs_f64();
    write_json(
        &args.run.out,
        "report.json",
        "verify_report",
        &report,
        Metadata::now(Some(wall)),
    )?;
    for p in &report.properties {
        println!(
            "{} {} (checked {}, worst deviation {:.3e}, tolerance {:.0e})",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            p.checked,
            p.worst_deviation,
            p.tolerance
        );
    }
    let failed = report.properties.iter().filter(|p| !p.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed {
            failed,
            total: report.properties.len(),
        });
    }
    Ok(())
}
