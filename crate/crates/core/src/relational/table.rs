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

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named relation over named attributes. Rows are bags: duplicates are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let name = name.into();
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(Error::Schema(format!("table `{name}` declares column `{c}` twice")));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Schema(format!(
                    "table `{name}` row {r} has {} entries, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!(
                    "table `{name}` row {r} column `{}` is not finite",
                    columns[c]
                )));
            }
        }
        Ok(Table { name, columns, rows })
    }

    /// Convenience constructor for literal tables in tests and fixtures.
    pub fn from_rows(name: &str, columns: &[&str], rows: &[&[f64]]) -> Result<Self> {
        Table::new(
            name,
            columns.iter().map(|c| c.to_string()).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Tables joined by attribute name, with one designated label attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JoinSpec {
    tables: Vec<Table>,
    label: String,
    attributes: Vec<String>,
}

impl JoinSpec {
    pub fn new(tables: Vec<Table>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if tables.is_empty() {
            return Err(Error::Spec("a join needs at least one table".into()));
        }
        let mut attributes: Vec<String> = Vec::new();
        for t in &tables {
            for c in t.columns() {
                if !attributes.contains(c) {
                    attributes.push(c.clone());
                }
            }
        }
        if !attributes.contains(&label) {
            return Err(Error::Spec(format!(
                "label attribute `{label}` does not appear in any table"
            )));
        }
        for t in &tables {
            if let Some(li) = t.column_index(&label) {
                for (r, row) in t.rows().iter().enumerate() {
                    let y = row[li];
                    if y != 1.0 && y != -1.0 {
                        return Err(Error::InvalidLabel {
                            table: t.name().to_string(),
                            row: r,
                            value: y,
                        });
                    }
                }
            }
        }
        Ok(JoinSpec {
            tables,
            label,
            attributes,
        })
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Joined schema in first-appearance order, label included.
    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    /// Non-label attributes of the joined schema; the coordinates of a point.
    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.attributes
            .iter()
            .filter(move |a| **a != self.label)
            .map(String::as_str)
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features().map(str::to_string).collect()
    }

    pub fn d(&self) -> usize {
        self.attributes.len() - 1
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features().position(|f| f == name)
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    /// Map from joined attribute index to feature index (`None` for the label).
    pub(crate) fn attribute_to_feature(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.attributes
            .iter()
            .map(|a| {
                if *a == self.label {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    }
}

/// Divides every feature by its maximum absolute value over all tables.
///
/// Features that are identically zero keep factor 1. The label is untouched.
/// Returns the rescaled spec and the per-feature factors in feature order.
pub fn rescale_features(spec: &JoinSpec) -> (JoinSpec, Vec<f64>) {
    rescale_features_with(spec, &HashMap::new())
}

/// As [`rescale_features`], with explicit factors for some features.
pub fn rescale_features_with(spec: &JoinSpec, overrides: &HashMap<String, f64>) -> (JoinSpec, Vec<f64>) {
    let features = spec.feature_names();
    let factors: Vec<f64> = features
        .iter()
        .map(|f| {
            if let Some(&o) = overrides.get(f) {
                return o;
            }
            let max = spec
                .tables()
                .iter()
                .filter_map(|t| t.column_index(f).map(|c| (t, c)))
                .flat_map(|(t, c)| t.rows().iter().map(move |r| r[c].abs()))
                .fold(0.0_f64, f64::max);
            if max > 0.0 {
                max
            } else {
                1.0
            }
        })
        .collect();

    let tables = spec
        .tables()
        .iter()
        .map(|t| {
            let col_factor: Vec<f64> = t
                .columns()
                .iter()
                .map(|c| spec.feature_index(c).map_or(1.0, |f| factors[f]))
                .collect();
            let rows = t
                .rows()
                .iter()
                .map(|r| r.iter().zip(&col_factor).map(|(v, s)| v / s).collect())
                .collect();
            Table {
                name: t.name.clone(),
                columns: t.columns.clone(),
                rows,
            }
        })
        .collect();
    (
        JoinSpec {
            tables,
            label: spec.label.clone(),
            attributes: spec.attributes.clone(),
        },
        factors,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_feature(values: &[f64]) -> JoinSpec {
        let rows: Vec<Vec<f64>> = values.iter().map(|v| vec![*v, 1.0]).collect();
        let t = Table::new("t", vec!["x".into(), "y".into()], rows).unwrap();
        JoinSpec::new(vec![t], "y").unwrap()
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = Table::new("t", vec!["a".into(), "b".into()], vec![vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn rejects_non_finite() {
        let err = Table::from_rows("t", &["a"], &[&[f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn rejects_bad_label() {
        let t = Table::from_rows("t", &["x", "y"], &[&[1.0, 0.0]]).unwrap();
        let err = JoinSpec::new(vec![t], "y").unwrap_err();
        assert!(matches!(err, Error::InvalidLabel { value, .. } if value == 0.0));
    }

    #[test]
    fn missing_label_attribute() {
        let t = Table::from_rows("t", &["x"], &[&[1.0]]).unwrap();
        assert!(matches!(JoinSpec::new(vec![t], "y"), Err(Error::Spec(_))));
    }

    #[test]
    fn rescale_by_max_abs() {
        let (s, f) = rescale_features(&one_feature(&[2.0, -4.0, 1.0]));
        assert_eq!(f, vec![4.0]);
        let xs: Vec<f64> = s.tables()[0].rows().iter().map(|r| r[0]).collect();
        assert_eq!(xs, vec![0.5, -1.0, 0.25]);
        let ys: Vec<f64> = s.tables()[0].rows().iter().map(|r| r[1]).collect();
        assert_eq!(ys, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rescale_identity_when_already_unit() {
        let spec = one_feature(&[1.0, -0.5]);
        let (s, f) = rescale_features(&spec);
        assert_eq!(f, vec![1.0]);
        assert_eq!(s, spec);
    }

    #[test]
    fn all_zero_feature_keeps_factor_one() {
        let (s, f) = rescale_features(&one_feature(&[0.0, 0.0]));
        assert_eq!(f, vec![1.0]);
        assert!(s.tables()[0].rows().iter().all(|r| r[0] == 0.0));
    }

    #[test]
    fn shared_attribute_scaled_consistently() {
        let r = Table::from_rows("r", &["k", "y"], &[&[3.0, 1.0], &[-6.0, -1.0]]).unwrap();
        let s = Table::from_rows("s", &["k", "z"], &[&[3.0, 5.0]]).unwrap();
        let (spec, f) = rescale_features(&JoinSpec::new(vec![r, s], "y").unwrap());
        assert_eq!(f, vec![6.0, 5.0]);
        assert_eq!(spec.tables()[0].rows()[0][0], spec.tables()[1].rows()[0][0]);
    }
}
