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

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relsvm_core::counting::{row_counts_with, CountOptions};
use relsvm_core::fixtures::{random_acyclic, RandomShape};
use relsvm_core::{
    approx_count_at, build_join_tree, materialize_join, quantile_ladder, row_counts, AdditiveInequality, CountMode,
};

proptest! {
    #![proptest_config(common::cases(48))]

    #[test]
    fn exact_counts_match_brute_force(seed in any::<u64>(), positive in any::<bool>()) {
        let label = if positive { 1.0 } else { -1.0 };
        let spec = random_acyclic(seed, &RandomShape::default());
        let tree = build_join_tree(&spec).unwrap();
        let x = materialize_join(&tree).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ineq = common::random_inequality(&mut rng, &x, label);
        let brute = common::brute_counts(&x, &ineq, label);
        let got = row_counts(&tree, &ineq, label, 0.1, CountMode::Exact).unwrap();
        for (j, col) in got.columns.iter().enumerate() {
            let nonzero: Vec<_> = col.values.iter().filter(|e| e.1 > 0.0).collect();
            prop_assert_eq!(nonzero.len(), brute[j].len());
            for &&(v, c) in &nonzero {
                prop_assert_eq!(c as u64, brute[j][&common::bits(v)]);
            }
        }
    }

    #[test]
    fn sketch_counts_are_sandwiched(seed in any::<u64>(), eps in 0.05f64..1.0) {
        let spec = random_acyclic(seed, &RandomShape::default());
        let tree = build_join_tree(&spec).unwrap();
        let x = materialize_join(&tree).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for label in [1.0, -1.0] {
            let ineq = common::random_inequality(&mut rng, &x, label);
            let brute = common::brute_counts(&x, &ineq, label);
            let got = row_counts(&tree, &ineq, label, eps, CountMode::Sketch).unwrap();
            for (j, col) in brute.iter().enumerate() {
                for (&bits, &c) in col {
                    let est = got.count(j, f64::from_bits(bits));
                    let c = c as f64;
                    prop_assert!(est >= c / (1.0 + eps) - 1e-9 && est <= c * (1.0 + eps) + 1e-9,
                        "C={} est={} eps={}", c, est, eps);
                }
            }
        }
    }

    #[test]
    fn ladder_is_sandwiched_and_monotone(seed in any::<u64>(), eps in 0.05f64..1.0, exact in any::<bool>()) {
        let mode = if exact { CountMode::Exact } else { CountMode::Sketch };
        let spec = random_acyclic(seed, &RandomShape::default());
        let tree = build_join_tree(&spec).unwrap();
        let x = materialize_join(&tree).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for label in [1.0, -1.0] {
            let expr = common::random_inequality(&mut rng, &x, label);
            let scores = common::brute_scores(&x, &expr, label);
            let ladder = quantile_ladder(&tree, &expr, label, eps, mode).unwrap();
            prop_assert!(ladder.thresholds.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(ladder.targets.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(ladder.n_label.to_string(), scores.len().to_string());
            for h in common::probe_thresholds(&scores, 1e-9) {
                let n = common::count_at_least(&scores, h) as f64;
                let est = approx_count_at(&ladder, h);
                prop_assert!(est <= n && est * (1.0 + eps) >= n, "H={} N={} est={}", h, n, est);
            }
        }
    }
}

#[test]
fn zero_inequality_counts_value_frequencies() {
    let spec = random_acyclic(11, &RandomShape::default());
    let tree = build_join_tree(&spec).unwrap();
    let x = materialize_join(&tree).unwrap();
    for mode in [CountMode::Exact, CountMode::Sketch] {
        let got = row_counts(&tree, &AdditiveInequality::trivial(x.d()), 1.0, 0.5, mode).unwrap();
        for (j, col) in common::value_frequencies(&x, 1.0).iter().enumerate() {
            for (&bits, &c) in col {
                assert_eq!(got.count(j, f64::from_bits(bits)), c as f64);
            }
        }
    }
}

#[test]
fn tiny_exact_cap_surfaces_blowup() {
    let spec = relsvm_core::fixtures::star_join(4, 40, 0);
    let tree = build_join_tree(&spec).unwrap();
    let ineq =
        AdditiveInequality::new(vec![relsvm_core::counting::SignSplit::linear(1.0); spec.d()], 0.0, 0.0).unwrap();
    let opts = CountOptions { exact_cap: 50 };
    let err = row_counts_with(&tree, &ineq, 1.0, 0.1, CountMode::Exact, &opts).unwrap_err();
    assert!(matches!(err, relsvm_core::Error::PartialSumBlowup { .. }), "{err}");
    assert!(row_counts_with(&tree, &ineq, 1.0, 0.1, CountMode::Sketch, &opts).is_ok());
}
