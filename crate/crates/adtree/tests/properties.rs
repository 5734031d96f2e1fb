//! Randomized invariant checks over generated datasets, trees, and queries.

use std::sync::Arc;

use proptest::prelude::*;

use adtree::bounds::{memory_bounds, BoundParams};
use adtree::contab::{self, make_contab, make_contab_conditional, make_contab_instrumented};
use adtree::oracle;
use adtree::testdata;
use adtree::{AdTree, CsvOptions, Dataset, Query};

/// A generated dataset: arities in 2..=4 over up to 5 attributes, up to 60
/// records with codes drawn within each attribute's range.
fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    prop::collection::vec(2u32..=4, 1..=5)
        .prop_flat_map(|arities| {
            let row = arities
                .iter()
                .map(|&a| (1u32..=a).boxed())
                .collect::<Vec<_>>();
            (Just(arities), prop::collection::vec(row, 0..=60))
        })
        .prop_map(|(arities, records)| {
            let names = (1..=arities.len()).map(|i| format!("a{i}")).collect();
            let maps = arities
                .iter()
                .map(|&a| (1..=a).map(|v| v.to_string()).collect())
                .collect();
            Dataset::from_encoded(names, arities, records, maps).unwrap()
        })
}

/// A query drawn over the dataset's schema: each attribute independently
/// absent or fixed to a valid value.
fn query_for(d: &Dataset) -> impl Strategy<Value = Query> {
    let per_attr: Vec<_> = d
        .arities()
        .iter()
        .map(|&a| prop::option::of(1u32..=a))
        .collect();
    per_attr.prop_map(|choices| {
        let terms = choices
            .into_iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|v| (i, v)))
            .collect();
        Query::new(terms).unwrap()
    })
}

fn arb_case() -> impl Strategy<Value = (Dataset, Query, u64)> {
    dataset_strategy().prop_flat_map(|d| {
        let q = query_for(&d);
        (Just(d), q, prop_oneof![Just(1u64), Just(2), Just(4), Just(8)])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// The central contract: every count answered through the tree equals a
    /// linear scan, for any leaf-list threshold.
    #[test]
    fn tree_counts_equal_linear_scans((d, q, r_min) in arb_case()) {
        let expected = oracle::linear_count(&d, &q).unwrap();
        let t = AdTree::build(d.into_arc(), r_min).unwrap();
        prop_assert_eq!(contab::count(&t, &q).unwrap(), expected);
    }

    /// Structural invariants hold on every built tree.
    #[test]
    fn built_trees_validate((d, _, r_min) in arb_case()) {
        let t = AdTree::build(d.into_arc(), r_min).unwrap();
        t.validate_structure().unwrap();
    }

    /// Tables match the linear oracle cell-for-cell, conditionally too: the
    /// query's attributes become the condition, the rest the table.
    #[test]
    fn tables_equal_linear_tables((d, q, r_min) in arb_case()) {
        let in_cond: Vec<usize> = q.attrs().collect();
        let attrs: Vec<usize> = (0..d.num_attrs())
            .filter(|a| !in_cond.contains(a))
            .collect();
        let d = d.into_arc();
        let t = AdTree::build(Arc::clone(&d), r_min).unwrap();
        let from_tree = make_contab_conditional(&t, &attrs, &q).unwrap();
        let from_scan = oracle::linear_contab(&d, &attrs, &q).unwrap();
        prop_assert_eq!(&from_tree, &from_scan);

        // a table's cells always sum to the count of its condition
        prop_assert_eq!(from_tree.total(), contab::count(&t, &q).unwrap());
    }

    /// Marginalizing a table over one attribute equals building the smaller
    /// table directly.
    #[test]
    fn marginalization_commutes_with_building((d, q, r_min) in arb_case()) {
        let attrs: Vec<usize> = q.attrs().collect();
        prop_assume!(!attrs.is_empty());
        let t = AdTree::build(d.into_arc(), r_min).unwrap();
        let full = make_contab(&t, &attrs).unwrap();
        for (i, &dropped) in attrs.iter().enumerate() {
            let mut rest = attrs.clone();
            rest.remove(i);
            prop_assert_eq!(
                full.marginalize(dropped).unwrap(),
                make_contab(&t, &rest).unwrap()
            );
        }
    }

    /// Instrumentation never changes the answer.
    #[test]
    fn instrumented_tables_match((d, q, r_min) in arb_case()) {
        let attrs: Vec<usize> = q.attrs().collect();
        let t = AdTree::build(d.into_arc(), r_min).unwrap();
        let (table, stats) = make_contab_instrumented(&t, &attrs, &Query::empty()).unwrap();
        prop_assert_eq!(table, make_contab(&t, &attrs).unwrap());
        prop_assert!(stats.calls >= 1);
    }

    /// CSV round trip: writing and re-loading with the declared value maps
    /// reproduces the dataset exactly.
    #[test]
    fn csv_round_trip(d in dataset_strategy()) {
        let mut bytes = Vec::new();
        d.write_csv(&mut bytes, b',').unwrap();
        let opts = CsvOptions {
            value_maps: Some(d.value_maps().to_vec()),
            ..CsvOptions::default()
        };
        let back = Dataset::from_csv_reader(bytes.as_slice(), &opts).unwrap();
        prop_assert_eq!(back.attr_names(), d.attr_names());
        prop_assert_eq!(back.arities(), d.arities());
        prop_assert_eq!(back.records(), d.records());
    }

    /// Tree serialization round trip preserves every count.
    #[test]
    fn save_load_preserves_counts((d, q, r_min) in arb_case()) {
        let d = d.into_arc();
        let t = AdTree::build(Arc::clone(&d), r_min).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.adt");
        t.save(&path).unwrap();
        let loaded = AdTree::load(&path, d).unwrap();
        loaded.validate_structure().unwrap();
        prop_assert_eq!(
            contab::count(&t, &q).unwrap(),
            contab::count(&loaded, &q).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// On binary schemas the measured node count respects the analytic
    /// row-limited worst case. The plain bound covers every threshold,
    /// because raising `r_min` only replaces subtrees with leaf lists.
    #[test]
    fn binary_trees_respect_the_analytic_bound(
        m in 1usize..=7,
        r in 1usize..=80,
        seed in 0u64..1000,
        r_min in prop_oneof![Just(1u64), Just(4), Just(16)],
    ) {
        let d = testdata::random_dataset(m, 2, r, seed);
        let t = AdTree::build(d.into_arc(), r_min).unwrap();
        let report = memory_bounds(&BoundParams {
            num_attrs: m as u64,
            num_records: r as u64,
            r_min,
            skew_p: None,
        })
        .unwrap();
        let measured = num_bigint::BigUint::from(t.stats().ad_nodes);
        prop_assert!(
            measured <= report.row_limited,
            "{} nodes vs bound {}",
            t.stats().ad_nodes,
            report.row_limited
        );
    }
}
