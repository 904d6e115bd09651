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

mod cli;
mod commands;
mod error;
mod run;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command, GenCommand};
use crate::error::{CliError, CliResult};

fn dispatch(cli: &Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    }
    let v = cli.verbose;
    match &cli.command {
        Command::Train(a) => commands::train_cmd(a, v),
        Command::Verify(a) => verify::verify_cmd(a, v),
        Command::Gen(GenCommand::Knapsack(a)) => commands::gen_knapsack(a, v),
        Command::Gen(GenCommand::Stable(a)) => commands::gen_stable(a, v),
        Command::Probe(a) => commands::probe_cmd(a, v),
        Command::Count(a) => commands::count_cmd(a, v),
        Command::Oracle(a) => commands::oracle_cmd(a, v),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::exit::CONFIG } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
