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

//! Relational SVM training.
//!
//! Trains a soft-margin linear SVM with projected pseudo-gradient descent
//! directly over tables combined by an acyclic natural join. The join is
//! never materialized on the training path: every quantity the descent loop
//! needs (row counts, per-value counts under an additive inequality, score
//! quantiles) is computed by message passing over a join tree.
//!
//! A brute-force path (Yannakakis materialization, exact gradients, a
//! classical projected gradient trainer) is kept alongside as an oracle for
//! desk-scale instances, together with perturbation and stability tooling.

pub(crate) mod biguint_string;
pub mod counting;
pub mod error;
pub mod fixtures;
pub mod io;
mod par;
pub mod relational;
pub mod semiring;
pub mod stability;
pub mod svm;
mod timing;

pub use counting::{
    approx_count_at, quantile_ladder, row_counts, AdditiveInequality, CountMode, CountResult, QuantileLadder,
};
pub use error::{Error, Result};
pub use relational::{
    build_join_tree, count_join_rows, materialize_join, materialize_join_with_cap, rescale_features,
    rescale_features_with, DesignMatrix, JoinSpec, JoinTree, Table, DEFAULT_OUTPUT_CAP,
};
pub use svm::{
    baseline_train, descent_step, far_point_gradient, far_point_inequalities, fhat, gradient_exact, objective_exact,
    project, pseudo_gradient, train, BaselineTrace, DescentConfig, DescentTrace, GradientParts, Hypothesis, RegCoef,
    Schedule,
};
