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

use num_bigint::BigUint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },

    #[error("invalid label {value} in table `{table}` row {row}: labels must be -1 or +1")]
    InvalidLabel { table: String, row: usize, value: f64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("join spec: {0}")]
    Spec(String),

    #[error("the join query is cyclic; only acyclic joins are supported")]
    CyclicQuery,

    #[error("join output has {estimated} rows, above the oracle cap of {cap}")]
    OutputCapExceeded { estimated: BigUint, cap: u64 },

    #[error("exact counting produced {size} distinct partial sums (cap {cap}); retry in sketch mode")]
    PartialSumBlowup { size: usize, cap: usize },

    #[error("the design matrix is empty")]
    EmptyInstance,

    #[error("invalid configuration: {0}")]
    Config(String),
}
