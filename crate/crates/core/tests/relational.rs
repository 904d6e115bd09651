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

use num_bigint::BigUint;
use proptest::prelude::*;
use relsvm_core::fixtures::{random_acyclic, star_join, triangle, RandomShape};
use relsvm_core::io::{load_spec, write_spec_dir};
use relsvm_core::relational::materialize_join_with_cap;
use relsvm_core::semiring::{eval_sumprod, Counting, FactorAssignment};
use relsvm_core::{build_join_tree, count_join_rows, materialize_join, rescale_features, Error, JoinSpec, Table};

fn shape() -> RandomShape {
    RandomShape::default()
}

proptest! {
    #![proptest_config(common::cases(64))]

    #[test]
    fn oracles_agree(seed in any::<u64>()) {
        let spec = random_acyclic(seed, &shape());
        let tree = build_join_tree(&spec).unwrap();
        let x = materialize_join(&tree).unwrap();
        let nl = common::nested_loop_matrix(&spec);
        prop_assert_eq!(common::multiset(&x), common::multiset(&nl));
        prop_assert_eq!(count_join_rows(&tree), BigUint::from(nl.len()));
        let ones: FactorAssignment<'_, BigUint> = FactorAssignment::new();
        prop_assert_eq!(eval_sumprod(&tree, &Counting, &ones), BigUint::from(nl.len()));
    }

    #[test]
    fn join_tree_has_running_intersection(seed in any::<u64>(), root in 0usize..4) {
        let spec = random_acyclic(seed, &shape());
        let tree = build_join_tree(&spec).unwrap();
        prop_assert_eq!(common::running_intersection(&tree), Ok(()));
        let rerooted = tree.rerooted(root % tree.node_count());
        prop_assert_eq!(common::running_intersection(&rerooted), Ok(()));
        prop_assert_eq!(count_join_rows(&rerooted), count_join_rows(&tree));
    }

    #[test]
    fn rescale_is_idempotent(seed in any::<u64>()) {
        let spec = random_acyclic(seed, &shape());
        let (once, f1) = rescale_features(&spec);
        let (twice, f2) = rescale_features(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert!(f2.iter().all(|&f| f == 1.0));
        prop_assert_eq!(f1.len(), spec.d());
        let li = |t: &Table| t.column_index(spec.label());
        let max = once
            .tables()
            .iter()
            .flat_map(|t| {
                let l = li(t);
                t.rows().iter().flat_map(move |r| {
                    r.iter().enumerate().filter(move |(c, _)| Some(*c) != l).map(|(_, v)| v.abs())
                })
            })
            .fold(0.0f64, f64::max);
        prop_assert!(max <= 1.0);
    }

    #[test]
    fn no_dangling_tuples(seed in any::<u64>()) {
        let spec = random_acyclic(seed, &shape());
        let tree = build_join_tree(&spec).unwrap();
        let x = materialize_join(&tree).unwrap();
        for t in spec.tables() {
            let cols: Vec<Option<usize>> = t
                .columns()
                .iter()
                .map(|c| x.features.iter().position(|f| f == c))
                .collect();
            for (p, y) in x.rows() {
                let proj: Vec<f64> = cols.iter().map(|c| c.map_or(y, |c| p[c])).collect();
                prop_assert!(t.rows().contains(&proj));
            }
        }
    }
}

#[test]
fn two_table_examples() {
    let r = Table::from_rows("R", &["A", "B", "y"], &[&[1.0, 2.0, 1.0]]).unwrap();
    let s = Table::from_rows("S", &["B", "C"], &[&[2.0, 3.0]]).unwrap();
    let spec = JoinSpec::new(vec![r.clone(), s], "y").unwrap();
    let tree = build_join_tree(&spec).unwrap();
    assert_eq!(tree.edges().len(), 1);
    let x = materialize_join(&tree).unwrap();
    assert_eq!(x.points, vec![vec![1.0, 2.0, 3.0]]);
    assert_eq!(count_join_rows(&tree), BigUint::from(1u32));

    let s = Table::from_rows("S", &["B", "C"], &[&[9.0, 3.0]]).unwrap();
    let tree = build_join_tree(&JoinSpec::new(vec![r, s], "y").unwrap()).unwrap();
    assert!(materialize_join(&tree).unwrap().is_empty());
    assert_eq!(count_join_rows(&tree), BigUint::from(0u32));
}

#[test]
fn triangle_is_cyclic() {
    assert!(matches!(build_join_tree(&triangle()), Err(Error::CyclicQuery)));
}

#[test]
fn star_join_counts_without_materializing() {
    let spec = star_join(6, 1000, 3);
    let tree = build_join_tree(&spec).unwrap();
    assert!(tree.edges().iter().all(|&(c, _)| tree.separator(c) == vec!["K"]));
    assert_eq!(count_join_rows(&tree), BigUint::from(1000u32).pow(6));
    match materialize_join_with_cap(&tree, 1_000_000) {
        Err(Error::OutputCapExceeded { estimated, cap }) => {
            assert_eq!(estimated, BigUint::from(1000u32).pow(6));
            assert_eq!(cap, 1_000_000);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn loaded_tables_join_like_nested_loops() {
    // three 30-row tables: orders(cust, item, y), customers(cust, region),
    // items(item, price)
    let orders = (0..30)
        .map(|i| vec![(i % 7) as f64, (i % 5) as f64, if i % 3 == 0 { -1.0 } else { 1.0 }])
        .collect();
    let customers = (0..30).map(|i| vec![(i % 10) as f64, (i % 4) as f64 * 0.5]).collect();
    let items = (0..30).map(|i| vec![(i % 6) as f64, i as f64 * 1.5]).collect();
    let spec = JoinSpec::new(
        vec![
            Table::new("orders", vec!["cust".into(), "item".into(), "y".into()], orders).unwrap(),
            Table::new("customers", vec!["cust".into(), "region".into()], customers).unwrap(),
            Table::new("items", vec!["item".into(), "price".into()], items).unwrap(),
        ],
        "y",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec_dir(dir.path(), &spec).unwrap();
    let loaded = load_spec(&path).unwrap().spec;
    assert_eq!(loaded, spec);
    let x = materialize_join(&build_join_tree(&loaded).unwrap()).unwrap();
    assert!(!x.is_empty());
    assert_eq!(
        common::multiset(&x),
        common::multiset(&common::nested_loop_matrix(&spec))
    );
}

#[test]
fn rescale_example() {
    let t = Table::from_rows("t", &["a", "y"], &[&[2.0, 1.0], &[-4.0, 1.0], &[1.0, -1.0]]).unwrap();
    let (s, f) = rescale_features(&JoinSpec::new(vec![t], "y").unwrap());
    assert_eq!(f, vec![4.0]);
    assert_eq!(
        s.tables()[0].rows(),
        &[vec![0.5, 1.0], vec![-1.0, 1.0], vec![0.25, -1.0]]
    );
}
