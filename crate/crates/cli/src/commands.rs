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

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use relsvm_core::counting::{row_counts_with, CountOptions, SignSplit};
use relsvm_core::io::{load_spec, write_spec_dir, write_table, LoadedSpec};
use relsvm_core::stability::{gen_knapsack_instance, gen_stable_instance, stability_probe, ProbeParams};
use relsvm_core::{
    baseline_train, build_join_tree, materialize_join_with_cap, quantile_ladder, rescale_features_with, train,
    AdditiveInequality, CountResult, DescentTrace, Hypothesis, JoinSpec, QuantileLadder, Table,
};
use serde::Serialize;

use crate::cli::{CountArgs, KnapsackArgs, OracleArgs, ProbeArgs, StableArgs, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::run::{prepare_dir, write_config, write_json, write_text, Metadata, RunConfig};

/// The spec as the trainer sees it: rescaled (honouring overrides) unless
/// disabled, with the factors used.
fn prepared(loaded: &LoadedSpec, rescale: bool) -> (JoinSpec, Vec<f64>) {
    if rescale {
        rescale_features_with(&loaded.spec, &loaded.scale_overrides)
    } else {
        (loaded.spec.clone(), vec![1.0; loaded.spec.d()])
    }
}

fn log(verbosity: u8, level: u8, msg: impl FnOnce() -> String) {
    if verbosity >= level {
        eprintln!("{}", msg());
    }
}

pub fn train_cmd(args: &TrainArgs, verbosity: u8) -> CliResult<()> {
    let (spec_path, descent) = match &args.config {
        Some(path) => {
            let prior = RunConfig::load(path)?;
            if prior.subcommand != "train" {
                return Err(CliError::Usage(format!(
                    "{} records a `{}` run, not `train`",
                    path.display(),
                    prior.subcommand
                )));
            }
            let spec = prior
                .spec
                .ok_or_else(|| CliError::Usage(format!("{}: no spec path", path.display())))?;
            let descent = prior
                .descent
                .ok_or_else(|| CliError::Usage(format!("{}: no descent settings", path.display())))?;
            (spec, descent)
        }
        None => (args.spec.clone().expect("clap requires --spec"), args.descent.config()),
    };
    descent.validate()?;
    let loaded = load_spec(&spec_path)?;
    build_join_tree(&loaded.spec)?;
    prepare_dir(&args.run.out, args.run.force)?;

    let mut cfg = RunConfig::new("train", &args.run.out, verbosity);
    cfg.spec = Some(spec_path);
    cfg.descent = Some(descent.clone());
    write_config(&args.run.out, &cfg)?;

    let (spec, scale) = prepared(&loaded, descent.rescale);
    log(verbosity, 1, || {
        format!("training on {} features for {} iterates", spec.d(), descent.steps)
    });
    let (h, mut trace) = train(&spec, &descent.clone().with_rescale(false))?;
    trace.scale = scale;
    let wall = trace.wall_clock_secs;
    // timing belongs to the metadata block only
    let mut body = serde_json::to_value(&trace).expect("trace serializes");
    if let Some(obj) = body.as_object_mut() {
        obj.remove("wall_clock_secs");
    }
    write_json(
        &args.run.out,
        "trace.json",
        "train_trace",
        &body,
        Metadata::now(Some(wall)),
    )?;

    let summary = summary(&spec, &h, &trace, wall);
    write_text(&args.run.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn summary(spec: &JoinSpec, h: &Hypothesis, trace: &DescentTrace, wall: f64) -> String {
    let mut s = String::new();
    let unscaled = h.unscaled(&trace.scale);
    let _ = writeln!(s, "join rows   {}", trace.n);
    let _ = writeln!(s, "iterates    {} (selected t = {})", trace.steps.len(), trace.selected);
    let _ = writeln!(s, "F̂(β̂)       {:.6}", trace.fhat_hat);
    let _ = writeln!(s, "time        {wall:.3} s");
    let _ = writeln!(s, "{:<16} {:>12} {:>12}", "feature", "β̂ (scaled)", "β̂ (raw)");
    for ((f, b), u) in spec.features().zip(&h.beta).zip(&unscaled) {
        let _ = writeln!(s, "{f:<16} {b:>12.6} {u:>12.6}");
    }
    s
}

#[derive(Serialize)]
struct GenOutput<T: Serialize> {
    generator: &'static str,
    spec: String,
    tables: Vec<String>,
    details: T,
}

fn gen_output<T: Serialize>(generator: &'static str, spec: &JoinSpec, details: T) -> GenOutput<T> {
    GenOutput {
        generator,
        spec: "spec.json".into(),
        tables: spec.tables().iter().map(|t| format!("{}.csv", t.name())).collect(),
        details,
    }
}

#[derive(Serialize)]
struct KnapsackDetails<'a> {
    weights: &'a [f64],
    capacity: f64,
    k: u64,
}

pub fn gen_knapsack(args: &KnapsackArgs, verbosity: u8) -> CliResult<()> {
    let spec = gen_knapsack_instance(&args.weights, args.capacity, args.k)?;
    prepare_dir(&args.run.out, args.run.force)?;
    let cfg = RunConfig::new("gen knapsack", &args.run.out, verbosity)
        .param("weights", &args.weights)
        .param("capacity", args.capacity)
        .param("k", args.k);
    write_config(&args.run.out, &cfg)?;
    let path = write_spec_dir(&args.run.out, &spec)?;
    let details = KnapsackDetails {
        weights: &args.weights,
        capacity: args.capacity,
        k: args.k,
    };
    write_json(
        &args.run.out,
        "gen.json",
        "gen",
        &gen_output("knapsack", &spec, details),
        Metadata::now(None),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn gen_stable(args: &StableArgs, verbosity: u8) -> CliResult<()> {
    let inst = gen_stable_instance(args.d, args.m, args.n, args.margin, args.noise, args.seed)?;
    prepare_dir(&args.run.out, args.run.force)?;
    let cfg = RunConfig::new("gen stable", &args.run.out, verbosity)
        .param("d", args.d)
        .param("m", args.m)
        .param("n", args.n)
        .param("margin", args.margin)
        .param("noise", args.noise)
        .param("seed", args.seed);
    write_config(&args.run.out, &cfg)?;
    let path = write_spec_dir(&args.run.out, &inst.spec)?;
    write_json(
        &args.run.out,
        "gen.json",
        "gen",
        &gen_output("stable", &inst.spec, &inst.meta),
        Metadata::now(None),
    )?;
    println!(
        "wrote {} (|J| = {}, alpha {}, delta {}, gamma {})",
        path.display(),
        inst.meta.join_size,
        inst.meta.alpha,
        inst.meta.delta,
        inst.meta.gamma
    );
    Ok(())
}

pub fn probe_cmd(args: &ProbeArgs, verbosity: u8) -> CliResult<()> {
    let loaded = load_spec(&args.spec)?;
    let mut params = ProbeParams::new(args.alpha, args.delta, args.gamma, args.lambda, args.budget, args.seed);
    params.candidates = args.candidates;
    params.optimizer.baseline_steps = args.baseline_steps;
    params.output_cap = args.oracle_cap;
    build_join_tree(&loaded.spec)?;
    prepare_dir(&args.run.out, args.run.force)?;
    let mut cfg = RunConfig::new("probe", &args.run.out, verbosity).param("probe", &params);
    cfg.spec = Some(args.spec.clone());
    write_config(&args.run.out, &cfg)?;

    let clock = Instant::now();
    let report = stability_probe(&loaded.spec, &params)?;
    let wall = clock.elapsed().as_secs_f64();
    write_json(
        &args.run.out,
        "report.json",
        "probe_report",
        &report,
        Metadata::now(Some(wall)),
    )?;
    println!(
        "{:?} over {} samples (worst ratios: optimum {:.4}, near-optimal {:.4}, near-optimal at X {:.4})",
        report.verdict,
        report.samples.len(),
        report.worst_ratio_optimum,
        report.worst_ratio_near_optimal,
        report.worst_ratio_near_optimal_at_x
    );
    if let Some(c) = &report.counterexample {
        println!(
            "counterexample: sample {} (seed {}), {} ratio {:.4} > {:.4}",
            c.sample, c.seed, c.condition, c.ratio, c.bound
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CountOutput {
    inequality: AdditiveInequality,
    features: Vec<String>,
    counts: CountResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder: Option<QuantileLadder>,
}

pub fn count_cmd(args: &CountArgs, verbosity: u8) -> CliResult<()> {
    let loaded = load_spec(&args.spec)?;
    let spec = &loaded.spec;
    let coef = if args.coef.is_empty() {
        vec![0.0; spec.d()]
    } else {
        args.coef.clone()
    };
    if coef.len() != spec.d() {
        return Err(CliError::Usage(format!(
            "--coef has {} entries but the join has {} features",
            coef.len(),
            spec.d()
        )));
    }
    let ineq = AdditiveInequality::new(
        coef.into_iter().map(SignSplit::linear).collect(),
        args.offset,
        args.threshold,
    )?;
    let tree = build_join_tree(spec)?;
    prepare_dir(&args.run.out, args.run.force)?;
    let mut cfg = RunConfig::new("count", &args.run.out, verbosity)
        .param("inequality", &ineq)
        .param("label", args.label)
        .param("eps", args.eps)
        .param("mode", args.mode)
        .param("exact_cap", args.exact_cap)
        .param("ladder", args.ladder);
    cfg.spec = Some(args.spec.clone());
    write_config(&args.run.out, &cfg)?;

    let clock = Instant::now();
    let opts = CountOptions {
        exact_cap: args.exact_cap,
    };
    let counts = row_counts_with(&tree, &ineq, args.label, args.eps, args.mode, &opts)?;
    let ladder = if args.ladder {
        Some(quantile_ladder(&tree, &ineq, args.label, args.eps, args.mode)?)
    } else {
        None
    };
    let wall = clock.elapsed().as_secs_f64();
    let features = spec.feature_names();
    for (f, col) in features.iter().zip(&counts.columns) {
        println!(
            "{f}: {} values, total {}",
            col.values.len(),
            col.values.iter().map(|v| v.1).sum::<f64>()
        );
    }
    let out = CountOutput {
        inequality: ineq,
        features,
        counts,
        ladder,
    };
    write_json(&args.run.out, "counts.json", "counts", &out, Metadata::now(Some(wall)))?;
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    n: usize,
    features: Vec<String>,
    scale: Vec<f64>,
    lambda: f64,
    steps: usize,
    iterations: usize,
    beta: Vec<f64>,
    beta_unscaled: Vec<f64>,
    objective: f64,
}

pub fn oracle_cmd(args: &OracleArgs, verbosity: u8) -> CliResult<()> {
    let loaded = load_spec(&args.spec)?;
    let (spec, scale) = prepared(&loaded, !args.no_rescale);
    let tree = build_join_tree(&spec)?;
    let x = materialize_join_with_cap(&tree, args.oracle_cap)?;
    prepare_dir(&args.run.out, args.run.force)?;
    let mut cfg = RunConfig::new("oracle", &args.run.out, verbosity)
        .param("lambda", args.lambda)
        .param("steps", args.steps)
        .param("rescale", !args.no_rescale)
        .param("oracle_cap", args.oracle_cap)
        .param("write_matrix", args.write_matrix);
    cfg.spec = Some(args.spec.clone());
    write_config(&args.run.out, &cfg)?;

    let clock = Instant::now();
    let (h, trace) = baseline_train(&x, args.lambda, args.steps)?;
    let wall = clock.elapsed().as_secs_f64();
    if args.write_matrix {
        write_matrix(&args.run.out.join("design.csv"), &x, spec.label())?;
    }
    let out = OracleOutput {
        n: x.len(),
        features: x.features.clone(),
        beta_unscaled: h.unscaled(&scale),
        scale,
        lambda: args.lambda,
        steps: args.steps,
        iterations: trace.iterations,
        beta: h.beta,
        objective: trace.objective,
    };
    println!(
        "N = {}, F(β̂) = {:.6} after {} iterations",
        out.n, out.objective, out.iterations
    );
    write_json(&args.run.out, "oracle.json", "oracle", &out, Metadata::now(Some(wall)))?;
    Ok(())
}

fn write_matrix(path: &Path, x: &relsvm_core::DesignMatrix, label: &str) -> CliResult<()> {
    let mut columns = x.features.clone();
    columns.push(label.to_string());
    let rows = x
        .rows()
        .map(|(p, y)| p.iter().copied().chain(std::iter::once(y)).collect())
        .collect();
    let table = Table::new("design", columns, rows)?;
    Ok(write_table(path, &table)?)
}
