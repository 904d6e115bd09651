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

//! Counting under one additive inequality over the join.
//!
//! Both primitives run the same two-pass message passing over the join tree,
//! with messages that are distributions of partial scores (see [`dist`]).
//! Every table row learns the distribution of scores of its completions to a
//! full join tuple, which answers threshold queries for that row.

pub mod dist;
mod ladder;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::{key_bits, JoinTree};
use crate::semiring::{FactorAssignment, Messages};
use dist::{DistMode, DistSemiring, ScoreDist};

pub use ladder::{approx_count_at, quantile_ladder, quantile_ladder_with, QuantileLadder};

/// Default cap on distinct partial sums per distribution in exact mode.
pub const DEFAULT_EXACT_CAP: usize = 100_000;

/// `g(v) = pos * v` for `v >= 0`, `neg * v` otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignSplit {
    pub pos: f64,
    pub neg: f64,
}

impl SignSplit {
    pub fn linear(coef: f64) -> Self {
        SignSplit { pos: coef, neg: coef }
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        if v >= 0.0 {
            self.pos * v
        } else {
            self.neg * v
        }
    }
}

/// `Σ_j g_j(x_j) + offset >= threshold`, one term per feature in feature
/// order. The label never contributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveInequality {
    pub terms: Vec<SignSplit>,
    pub offset: f64,
    pub threshold: f64,
}

impl AdditiveInequality {
    pub fn new(terms: Vec<SignSplit>, offset: f64, threshold: f64) -> Result<Self> {
        let finite =
            terms.iter().all(|t| t.pos.is_finite() && t.neg.is_finite()) && offset.is_finite() && threshold.is_finite();
        if !finite {
            return Err(Error::Config("inequality coefficients must be finite".into()));
        }
        Ok(AdditiveInequality {
            terms,
            offset,
            threshold,
        })
    }

    /// Always satisfied: every term zero, `0 >= 0`.
    pub fn trivial(d: usize) -> Self {
        AdditiveInequality {
            terms: vec![SignSplit::default(); d],
            offset: 0.0,
            threshold: 0.0,
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.terms.iter().zip(x).map(|(g, &v)| g.eval(v)).sum::<f64>() + self.offset
    }

    pub fn satisfied(&self, x: &[f64]) -> bool {
        self.score(x) >= self.threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Exact,
    Sketch,
}

impl std::str::FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CountMode::Exact),
            "sketch" => Ok(CountMode::Sketch),
            other => Err(Error::Config(format!("unknown counting mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountOptions {
    pub exact_cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnCounts {
    pub feature: String,
    /// `(value, count)` for every distinct value of the column, ascending.
    pub values: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub mode: CountMode,
    pub label: f64,
    pub eps: f64,
    pub columns: Vec<ColumnCounts>,
    /// Largest score distribution built while counting.
    pub peak_dist_size: usize,
}

impl CountResult {
    pub fn count(&self, feature: usize, value: f64) -> f64 {
        let vals = &self.columns[feature].values;
        vals.binary_search_by(|e| e.0.total_cmp(&value))
            .map(|i| vals[i].1)
            .unwrap_or(0.0)
    }

    /// Sum of counts over the values of one column.
    pub fn column_total(&self, feature: usize) -> f64 {
        self.columns[feature].values.iter().map(|e| e.1).sum()
    }
}

/// Per-compaction accuracy so that `charges` compactions compound to at
/// most `1 + eps`.
pub(crate) fn compaction_step(eps: f64, charges: usize) -> f64 {
    (1.0 + eps).powf(1.0 / charges.max(1) as f64) - 1.0
}

pub(crate) fn dist_semiring(tree: &JoinTree, mode: CountMode, eps: f64, opts: &CountOptions) -> Result<DistSemiring> {
    match mode {
        CountMode::Exact => Ok(DistSemiring::new(DistMode::Exact { cap: opts.exact_cap })),
        CountMode::Sketch => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Config(format!("sketch mode needs eps > 0, got {eps}")));
            }
            let step = compaction_step(eps, tree.node_count().saturating_sub(1));
            Ok(DistSemiring::new(DistMode::Sketch { step }))
        }
    }
}

/// Score factors for the features and a gate on the label column.
pub(crate) fn score_factors<'a>(
    tree: &JoinTree,
    expr: &'a AdditiveInequality,
    label: f64,
) -> Result<FactorAssignment<'a, ScoreDist>> {
    let spec = tree.spec();
    if expr.terms.len() != spec.d() {
        return Err(Error::Config(format!(
            "inequality has {} terms but the join has {} features",
            expr.terms.len(),
            spec.d()
        )));
    }
    check_label(label)?;
    let mut factors = FactorAssignment::new();
    for (j, name) in spec.features().enumerate() {
        let g = expr.terms[j];
        factors.set(name, move |v| ScoreDist::point(g.eval(v)));
    }
    factors.set(spec.label(), move |y| {
        if y == label {
            ScoreDist::point(0.0)
        } else {
            ScoreDist::empty()
        }
    });
    Ok(factors)
}

pub(crate) fn check_label(label: f64) -> Result<()> {
    if label == 1.0 || label == -1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("label must be +1 or -1, got {label}")))
    }
}

fn blowup(sr: &DistSemiring) -> Error {
    let cap = match sr.mode() {
        DistMode::Exact { cap } => cap,
        DistMode::Sketch { .. } => usize::MAX,
    };
    Error::PartialSumBlowup {
        size: cap.saturating_add(1),
        cap,
    }
}

/// For every feature `j` and value `v`, the number of label-`label` join rows
/// with `x_j = v` satisfying `ineq`.
///
/// Sketch mode undercounts by at most a factor `1 + eps`.
pub fn row_counts(
    tree: &JoinTree,
    ineq: &AdditiveInequality,
    label: f64,
    eps: f64,
    mode: CountMode,
) -> Result<CountResult> {
    row_counts_with(tree, ineq, label, eps, mode, &CountOptions::default())
}

pub fn row_counts_with(
    tree: &JoinTree,
    ineq: &AdditiveInequality,
    label: f64,
    eps: f64,
    mode: CountMode,
    opts: &CountOptions,
) -> Result<CountResult> {
    let spec = tree.spec();
    let sr = dist_semiring(tree, mode, eps, opts)?;
    let factors = score_factors(tree, ineq, label)?;
    let msgs = Messages::upward(tree, &sr, &factors).with_downward();
    if msgs.all_messages().any(ScoreDist::overflowed) {
        return Err(blowup(&sr));
    }

    let a2f = spec.attribute_to_feature();
    let label_attr = spec.attribute_index(spec.label()).expect("label is an attribute");
    let cut = ineq.threshold - ineq.offset;
    let mut acc: Vec<HashMap<u64, (f64, f64)>> = vec![HashMap::new(); spec.d()];

    for t in 0..tree.node_count() {
        let rows = spec.tables()[t].rows();
        let mut owned: Vec<(usize, usize)> = Vec::new();
        let mut label_col = None;
        for (c, a) in tree.owned_columns(t) {
            match a2f[a] {
                Some(j) => owned.push((c, j)),
                None if a == label_attr => label_col = Some(c),
                None => {}
            }
        }
        if owned.is_empty() {
            continue;
        }
        for (gi, g) in tree.groups(t).iter().enumerate() {
            let ctx = msgs.context(t, gi);
            if ctx.as_ref().is_some_and(ScoreDist::overflowed) {
                return Err(blowup(&sr));
            }
            let tails = ctx.as_ref().map(ScoreDist::tails);
            for &r in &g.rows {
                let row = &rows[r];
                let gated = label_col.is_some_and(|c| row[c] != label);
                let n = match &tails {
                    Some(tails) if !gated => {
                        let own: f64 = owned.iter().map(|&(c, j)| ineq.terms[j].eval(row[c])).sum();
                        tails.at_least(cut - own)
                    }
                    _ => 0.0,
                };
                for &(c, j) in &owned {
                    let v = row[c];
                    acc[j].entry(key_bits(v)).or_insert((v, 0.0)).1 += n;
                }
            }
        }
    }

    let columns = spec
        .features()
        .zip(acc)
        .map(|(name, m)| {
            let mut values: Vec<(f64, f64)> = m
                .into_values()
                .map(|(v, n)| (if v == 0.0 { 0.0 } else { v }, n))
                .collect();
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            ColumnCounts {
                feature: name.to_string(),
                values,
            }
        })
        .collect();
    Ok(CountResult {
        mode,
        label,
        eps,
        columns,
        peak_dist_size: sr.peak_size(),
    })
}
