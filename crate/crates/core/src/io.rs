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

//! File formats: CSV tables and the JSON join-spec file.
//!
//! A spec file lists tables by path (relative paths resolve against the
//! spec file's directory), names the label attribute and may fix the scale
//! factor of some features:
//!
//! ```json
//! {
//!   "tables": [{"name": "orders", "path": "orders.csv"}],
//!   "label": "y",
//!   "scale_overrides": {"amount": 1000.0}
//! }
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::{JoinSpec, Table};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a CSV table whose header row names the attributes.
///
/// When `schema` is given the header must match it exactly. Values of the
/// `label` column, if present, must be `-1` or `+1`.
pub fn load_table(path: &Path, name: &str, schema: Option<&[String]>, label: Option<&str>) -> Result<Table> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let parse_err = |line: u64, column: &str, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, "", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if let Some(schema) = schema {
        if schema != header.as_slice() {
            return Err(Error::Schema(format!(
                "{}: header {:?} does not match declared columns {:?}",
                path.display(),
                header,
                schema
            )));
        }
    }
    let label_col = label.and_then(|l| header.iter().position(|c| c == l));
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| parse_err(line, "", e.to_string()))?;
        let mut row = Vec::with_capacity(header.len());
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, &header[c], format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, &header[c], format!("`{cell}` is not finite")));
            }
            row.push(v);
        }
        if let Some(lc) = label_col {
            if row[lc] != 1.0 && row[lc] != -1.0 {
                return Err(Error::InvalidLabel {
                    table: name.to_string(),
                    row: i,
                    value: row[lc],
                });
            }
        }
        rows.push(row);
    }
    Table::new(name, header, rows)
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(table.columns()).map_err(|e| csv_io(path, e))?;
    for row in table.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub tables: Vec<TableEntry>,
    pub label: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scale_overrides: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedSpec {
    pub spec: JoinSpec,
    pub scale_overrides: HashMap<String, f64>,
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: SpecFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        column: String::new(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let tables = file
        .tables
        .iter()
        .map(|t| {
            let p = if t.path.is_absolute() {
                t.path.clone()
            } else {
                base.join(&t.path)
            };
            load_table(&p, &t.name, t.columns.as_deref(), Some(&file.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = JoinSpec::new(tables, file.label.clone())?;
    for (f, s) in &file.scale_overrides {
        if spec.feature_index(f).is_none() {
            return Err(Error::Spec(format!("scale override for unknown feature `{f}`")));
        }
        if !(*s > 0.0 && s.is_finite()) {
            return Err(Error::Spec(format!("scale override for `{f}` must be positive")));
        }
    }
    Ok(LoadedSpec {
        spec,
        scale_overrides: file.scale_overrides.into_iter().collect(),
    })
}

/// Writes one CSV per table and `spec.json` into `dir`; returns the `spec.json`
/// file's path.
pub fn write_spec_dir(dir: &Path, spec: &JoinSpec) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut entries = Vec::new();
    for t in spec.tables() {
        let file = format!("{}.csv", t.name());
        write_table(&dir.join(&file), t)?;
        entries.push(TableEntry {
            name: t.name().to_string(),
            path: PathBuf::from(file),
            columns: None,
        });
    }
    let file = SpecFile {
        tables: entries,
        label: spec.label().to_string(),
        scale_overrides: BTreeMap::new(),
    };
    let path = dir.join("spec.json");
    let text = serde_json::to_string_pretty(&file).expect("spec file serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}
