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

//! Run directories, the persisted run configuration and the JSON envelope
//! every output file shares.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use relsvm_core::DescentConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Everything needed to repeat an invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descent: Option<DescentConfig>,
    pub out: PathBuf,
    #[serde(default)]
    pub verbosity: u8,
    /// Subcommand-specific settings.
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(subcommand: &str, out: &Path, verbosity: u8) -> Self {
        RunConfig {
            subcommand: subcommand.to_string(),
            spec: None,
            descent: None,
            out: out.to_path_buf(),
            verbosity,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
        self
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a run config: {e}", path.display())))
    }
}

/// Creates `dir`, refusing a non-empty one unless `force` is set.
pub fn prepare_dir(dir: &Path, force: bool) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    };
    if dir.exists() {
        let occupied = fs::read_dir(dir).map_err(io)?.next().is_some();
        if occupied && !force {
            return Err(CliError::RunDirExists(dir.to_path_buf()));
        }
    }
    fs::create_dir_all(dir).map_err(io)
}

/// Fields that change between otherwise identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool_version: &'static str,
    pub created_unix_secs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,
}

impl Metadata {
    pub fn now(wall_clock_secs: Option<f64>) -> Self {
        Metadata {
            tool_version: env!("CARGO_PKG_VERSION"),
            created_unix_secs: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_clock_secs,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    kind: &'a str,
    result: &'a T,
    metadata: Metadata,
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    file: &str,
    kind: &str,
    result: &T,
    metadata: Metadata,
) -> CliResult<PathBuf> {
    let path = dir.join(file);
    let text = serde_json::to_string_pretty(&Envelope { kind, result, metadata }).expect("outputs serialize");
    write_text(&path, &(text + "\n"))?;
    Ok(path)
}

pub fn write_config(dir: &Path, cfg: &RunConfig) -> CliResult<()> {
    let text = serde_json::to_string_pretty(cfg).expect("config serializes");
    write_text(&dir.join("config.json"), &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use relsvm_core::{CountMode, RegCoef, Schedule};

    fn descent() -> impl Strategy<Value = DescentConfig> {
        (
            1e-6f64..10.0,
            1e-6f64..1.0,
            1usize..10_000,
            any::<bool>(),
            any::<bool>(),
            any::<bool>(),
            any::<u64>(),
            any::<bool>(),
            1usize..1_000_000,
        )
            .prop_map(|(lambda, eps, steps, cons, lam, exact, seed, rescale, cap)| {
                let mut c = DescentConfig::new(lambda, eps, steps)
                    .with_schedule(if cons {
                        Schedule::Conservative
                    } else {
                        Schedule::Standard
                    })
                    .with_reg_coef(if lam { RegCoef::Lambda } else { RegCoef::TwoLambda })
                    .with_mode(if exact { CountMode::Exact } else { CountMode::Sketch })
                    .with_rescale(rescale);
                c.seed = seed;
                c.exact_cap = cap;
                c
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn run_config_round_trips(
            sub in "[a-z]{1,8}",
            spec in proptest::option::of("[a-z/]{1,12}\\.json"),
            descent in proptest::option::of(descent()),
            out in "[a-z_/]{1,12}",
            verbosity in any::<u8>(),
            x in any::<f64>().prop_filter("finite", |v| v.is_finite()),
            n in any::<u64>(),
        ) {
            let mut cfg = RunConfig::new(&sub, Path::new(&out), verbosity).param("x", x).param("n", n);
            cfg.spec = spec.map(PathBuf::from);
            cfg.descent = descent;
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            let back: RunConfig = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        }
    }

    #[test]
    fn occupied_dir_needs_force() {
        let dir = tempfile::tempdir().unwrap();
        prepare_dir(&dir.path().join("fresh"), false).unwrap();
        write_text(&dir.path().join("fresh/x"), "1").unwrap();
        assert!(matches!(
            prepare_dir(&dir.path().join("fresh"), false),
            Err(CliError::RunDirExists(_))
        ));
        prepare_dir(&dir.path().join("fresh"), true).unwrap();
    }
}
