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

use thiserror::Error;

/// Exit codes; part of the scripting contract.
pub mod exit {
    pub const CONFIG: u8 = 1;
    pub const CYCLIC: u8 = 2;
    pub const DATA: u8 = 3;
    pub const CAP: u8 = 4;
    pub const VERIFY_FAILED: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] relsvm_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("run directory {} is not empty; pass --force to write into it", .0.display())]
    RunDirExists(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} properties failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use relsvm_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Io { .. } | E::Config(_) => exit::CONFIG,
                E::CyclicQuery => exit::CYCLIC,
                E::OutputCapExceeded { .. } | E::PartialSumBlowup { .. } => exit::CAP,
                E::Parse { .. } | E::InvalidLabel { .. } | E::Schema(_) | E::Spec(_) | E::EmptyInstance => exit::DATA,
            },
            CliError::Usage(_) | CliError::RunDirExists(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::VerifyFailed { .. } => exit::VERIFY_FAILED,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
