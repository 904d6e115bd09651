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

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use relsvm_core::{CountMode, DescentConfig, RegCoef, Schedule, DEFAULT_OUTPUT_CAP};

/// Linear SVM training over acyclic joins of CSV tables.
///
/// Exit codes: 0 success, 1 configuration or usage error, 2 cyclic join,
/// 3 data error, 4 size cap exceeded, 5 verification failed.
#[derive(Debug, Parser)]
#[command(name = "relsvm", version, allow_negative_numbers = true)]
pub struct Cli {
    /// Extra progress on stderr; repeat for more.
    #[arg(long, short = 'v', action = ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Worker threads for counting; 0 uses every core.
    #[arg(long, env = "RELSVM_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Projected pseudo-gradient descent; writes config.json, trace.json and summary.txt.
    Train(TrainArgs),
    /// Compare the counting path against the materialized join.
    Verify(VerifyArgs),
    /// Write a generated instance (CSV tables plus spec.json).
    #[command(subcommand)]
    Gen(GenCommand),
    /// Sample perturbation pairs and test the stability conditions.
    Probe(ProbeArgs),
    /// Per-value row counts under a linear inequality.
    Count(CountArgs),
    /// Materialize the join and run the classical trainer on it.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct RunDir {
    /// Run directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,

    /// Write into a non-empty run directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DescentArgs {
    /// Regularization weight.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,

    /// Accuracy parameter; also the perturbation size behind far points.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,

    /// Iterates, including the origin.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,

    /// Step sizes: standard 1/(λ√(dt)) or conservative 1/(8λ√(dt)).
    #[arg(long, default_value = "standard")]
    pub schedule: Schedule,

    /// Regularizer gradient coefficient: two_lambda or lambda.
    #[arg(long, default_value = "two_lambda")]
    pub reg_coef: RegCoef,

    /// Counting mode: sketch or exact.
    #[arg(long, default_value = "sketch")]
    pub mode: CountMode,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Train on the features as given.
    #[arg(long)]
    pub no_rescale: bool,

    /// Distinct partial sums allowed per distribution in exact mode.
    #[arg(long, default_value_t = relsvm_core::counting::DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
}

impl DescentArgs {
    pub fn config(&self) -> DescentConfig {
        let mut cfg = DescentConfig::new(self.lambda, self.eps, self.steps)
            .with_schedule(self.schedule)
            .with_reg_coef(self.reg_coef)
            .with_mode(self.mode)
            .with_rescale(!self.no_rescale);
        cfg.seed = self.seed;
        cfg.exact_cap = self.exact_cap;
        cfg
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TrainArgs {
    /// Join spec JSON.
    #[arg(long, required_unless_present = "config")]
    pub spec: Option<PathBuf>,

    /// Repeat a previous run from its config.json; other training flags are ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub descent: DescentArgs,

    #[command(flatten)]
    pub run: RunDir,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: PathBuf,

    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,

    /// Accuracy parameters to check, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.1")]
    pub eps: Vec<f64>,

    /// Random hypotheses per accuracy parameter.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub no_rescale: bool,

    /// Largest join the oracle may materialize.
    #[arg(long, env = "RELSVM_ORACLE_CAP", default_value_t = DEFAULT_OUTPUT_CAP)]
    pub oracle_cap: u64,

    /// Multiplies the estimated losses before the sandwich check.
    #[arg(long, hide = true)]
    pub count_scale: Option<f64>,

    #[command(flatten)]
    pub run: RunDir,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Counting-knapsack gadget: a value table and one table per weight.
    Knapsack(KnapsackArgs),
    /// Margin-separated star schema with generation metadata.
    Stable(StableArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct KnapsackArgs {
    /// Item weights, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub weights: Vec<f64>,

    /// Knapsack capacity.
    #[arg(long = "L", visible_alias = "capacity")]
    pub capacity: f64,

    #[arg(long)]
    pub k: u64,

    #[command(flatten)]
    pub run: RunDir,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct StableArgs {
    /// Feature count, 2(m − 1) + fact attributes.
    #[arg(long, default_value_t = 6)]
    pub d: usize,

    /// Tables.
    #[arg(long, default_value_t = 3)]
    pub m: usize,

    /// Fact rows.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    #[arg(long, default_value_t = 0.3)]
    pub margin: f64,

    /// Label flip probability.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub run: RunDir,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ProbeArgs {
    #[arg(long)]
    pub spec: PathBuf,

    #[arg(long)]
    pub alpha: f64,

    #[arg(long)]
    pub delta: f64,

    #[arg(long)]
    pub gamma: f64,

    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,

    /// Sampled perturbation pairs.
    #[arg(long, default_value_t = 20)]
    pub budget: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Near-optimal hypotheses per sample.
    #[arg(long, default_value_t = 8)]
    pub candidates: usize,

    /// Baseline iterations inside each optimum search.
    #[arg(long, default_value_t = 2000)]
    pub baseline_steps: usize,

    #[arg(long, env = "RELSVM_ORACLE_CAP", default_value_t = DEFAULT_OUTPUT_CAP)]
    pub oracle_cap: u64,

    #[command(flatten)]
    pub run: RunDir,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CountArgs {
    #[arg(long)]
    pub spec: PathBuf,

    /// Inequality coefficients in feature order, comma separated; zeros if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coef: Vec<f64>,

    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,

    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,

    /// Label class to count, 1 or -1.
    #[arg(long, default_value_t = 1.0)]
    pub label: f64,

    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,

    #[arg(long, default_value = "sketch")]
    pub mode: CountMode,

    #[arg(long, default_value_t = relsvm_core::counting::DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,

    /// Also report the quantile ladder of the inequality's score.
    #[arg(long)]
    pub ladder: bool,

    #[command(flatten)]
    pub run: RunDir,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct OracleArgs {
    #[arg(long)]
    pub spec: PathBuf,

    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,

    #[arg(long, default_value_t = 2000)]
    pub steps: usize,

    #[arg(long)]
    pub no_rescale: bool,

    /// Also write the design matrix as design.csv.
    #[arg(long)]
    pub write_matrix: bool,

    #[arg(long, env = "RELSVM_ORACLE_CAP", default_value_t = DEFAULT_OUTPUT_CAP)]
    pub oracle_cap: u64,

    #[command(flatten)]
    pub run: RunDir,
}
