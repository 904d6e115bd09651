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

//! Browser demo: three small operations over generated joins, each returning
//! a JSON string for `www/index.html` to draw.

use relsvm_core::counting::SignSplit;
use relsvm_core::stability::{gadget_g2, gen_knapsack_instance, gen_stable_instance};
use relsvm_core::svm::train_tree;
use relsvm_core::{
    build_join_tree, materialize_join, materialize_join_with_cap, objective_exact, quantile_ladder, rescale_features,
    AdditiveInequality, CountMode, DescentConfig, Error, Hypothesis,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Joins above this many rows are not materialized for the exact objective.
pub const EXACT_LIMIT: u64 = 50_000;

fn mode(name: &str) -> Result<CountMode, Error> {
    name.parse()
}

/// Generates a stable star instance and trains on it, returning the `F̂`
/// curve and, when the join is small enough, the exact objective at `β̂`.
#[allow(clippy::too_many_arguments)]
pub fn train_curve_json(
    d: usize,
    m: usize,
    n: usize,
    margin: f64,
    noise: f64,
    seed: u64,
    lambda: f64,
    eps: f64,
    steps: usize,
    count_mode: &str,
) -> Result<Value, Error> {
    let inst = gen_stable_instance(d, m, n, margin, noise, seed)?;
    let (spec, _) = rescale_features(&inst.spec);
    let tree = build_join_tree(&spec)?;
    let mut cfg = DescentConfig::new(lambda, eps, steps).with_mode(mode(count_mode)?);
    cfg.rescale = false;
    let (h, trace) = train_tree(&tree, &cfg)?;
    let objective = match materialize_join_with_cap(&tree, EXACT_LIMIT) {
        Ok(x) => Some(objective_exact(&h, &x)?),
        Err(Error::OutputCapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(json!({
        "join_size": inst.meta.join_size,
        "features": spec.feature_names(),
        "fhat": trace.steps.iter().map(|s| s.fhat).collect::<Vec<_>>(),
        "selected": trace.selected,
        "fhat_hat": trace.fhat_hat,
        "beta_hat": trace.beta_hat,
        "objective": objective,
        "peak_dist_size": trace.peak_dist_size,
    }))
}

/// Builds the counting-knapsack gadget and reports `G_2` next to a direct
/// count of the fitting subsets.
pub fn knapsack_json(weights: &str, capacity: f64, k: u64) -> Result<Value, Error> {
    let w: Vec<f64> = weights
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad weight `{}`", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    if w.len() > 16 {
        return Err(Error::Config("at most 16 items in the demo".into()));
    }
    let spec = gen_knapsack_instance(&w, capacity, k)?;
    let g2 = gadget_g2(&spec)?;
    let fitting = (0u32..1 << w.len())
        .filter(|mask| {
            let total: f64 = w
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, x)| x)
                .sum();
            total <= capacity
        })
        .count();
    let rows = materialize_join(&build_join_tree(&spec)?)?.len();
    Ok(json!({
        "items": w.len(),
        "join_size": rows,
        "g2": g2,
        "fitting_subsets": fitting,
        "k": k,
        "sign": if g2 > 0.0 { "positive" } else if g2 < 0.0 { "negative" } else { "zero" },
    }))
}

/// Quantile ladder of the label-`label` scores under a seeded random linear
/// form, with the exact count at each threshold.
#[allow(clippy::too_many_arguments)]
pub fn ladder_json(
    d: usize,
    m: usize,
    n: usize,
    seed: u64,
    eps: f64,
    label: f64,
    count_mode: &str,
) -> Result<Value, Error> {
    let inst = gen_stable_instance(d, m, n, 0.2, 0.0, seed)?;
    let (spec, _) = rescale_features(&inst.spec);
    let tree = build_join_tree(&spec)?;
    let h = Hypothesis::new(inst.meta.beta_true.clone(), 0.0);
    let terms = h.beta.iter().map(|&b| SignSplit::linear(label * b)).collect();
    let ineq = AdditiveInequality::new(terms, 0.0, 0.0)?;
    let ladder = quantile_ladder(&tree, &ineq, label, eps, mode(count_mode)?)?;
    let exact = match materialize_join_with_cap(&tree, EXACT_LIMIT) {
        Ok(x) => {
            let scores: Vec<f64> = x
                .rows()
                .filter(|&(_, y)| y == label)
                .map(|(p, _)| label * p.iter().zip(&h.beta).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            Some(
                ladder
                    .thresholds
                    .iter()
                    .map(|&t| scores.iter().filter(|&&s| s >= t).count())
                    .collect::<Vec<_>>(),
            )
        }
        Err(Error::OutputCapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(json!({
        "join_size": inst.meta.join_size,
        "n_label": ladder.n_label.to_string(),
        "step": ladder.step,
        "thresholds": ladder.thresholds,
        "targets": ladder.targets,
        "exact": exact,
    }))
}

fn to_js(r: Result<Value, Error>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn train_curve(
    d: usize,
    m: usize,
    n: usize,
    margin: f64,
    noise: f64,
    seed: u64,
    lambda: f64,
    eps: f64,
    steps: usize,
    count_mode: &str,
) -> Result<String, JsError> {
    to_js(train_curve_json(
        d, m, n, margin, noise, seed, lambda, eps, steps, count_mode,
    ))
}

#[wasm_bindgen]
pub fn knapsack(weights: &str, capacity: f64, k: u64) -> Result<String, JsError> {
    to_js(knapsack_json(weights, capacity, k))
}

#[wasm_bindgen]
pub fn ladder(
    d: usize,
    m: usize,
    n: usize,
    seed: u64,
    eps: f64,
    label: f64,
    count_mode: &str,
) -> Result<String, JsError> {
    to_js(ladder_json(d, m, n, seed, eps, label, count_mode))
}
