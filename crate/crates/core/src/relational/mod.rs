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

//! Tables, join specs, join trees and the materializing oracle.

mod join_tree;
mod materialize;
mod table;

pub use join_tree::{build_join_tree, JoinTree};
pub(crate) use join_tree::{key_bits, Key};
pub use materialize::{count_join_rows, materialize_join, materialize_join_with_cap, DesignMatrix, DEFAULT_OUTPUT_CAP};
pub use table::{rescale_features, rescale_features_with, JoinSpec, Table};
