//! Benchmark harnesses comparing the tree against linear counting on
//! byte-identical workloads, plus size and r_min sweeps.
//!
//! Timings wrap the counting work only; tree build time is reported as its
//! own column so amortization arithmetic stays possible. Both backends run
//! the same recorded request sequence and their answers are compared before
//! any timing is reported; a disagreement aborts the suite.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contab::{self, ContingencyTable};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ml::{self, HillClimbConfig};
use crate::oracle;
use crate::query::Query;
use crate::synth::{synth_generate, SynthConfig};
use crate::tree::AdTree;

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub adtree_secs: f64,
    pub linear_secs: f64,
    pub speedup: f64,
    pub build_secs: f64,
    pub ad_nodes: u64,
    pub vary_nodes: u64,
    pub estimated_bytes: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Number of timing repetitions; the median is reported.
pub const DEFAULT_REPS: usize = 3;

fn median_secs(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

fn time_reps(reps: usize, mut work: impl FnMut()) -> f64 {
    let samples = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            work();
            start.elapsed().as_secs_f64()
        })
        .collect();
    median_secs(samples)
}

/// A recorded contingency-table workload: random attribute sets of bounded
/// size, replayed identically against both backends.
pub fn contab_suite(
    dataset: Arc<Dataset>,
    r_min: u64,
    n_requests: usize,
    max_attrs: usize,
    seed: u64,
    reps: usize,
) -> Result<BenchReport> {
    let m = dataset.num_attrs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requests: Vec<Vec<usize>> = (0..n_requests)
        .map(|_| {
            let size = rng.gen_range(1..=max_attrs.min(m));
            rand::seq::index::sample(&mut rng, m, size).into_vec()
        })
        .collect();

    let tree = AdTree::build(Arc::clone(&dataset), r_min)?;
    let stats = tree.stats();

    let tree_answers: Vec<ContingencyTable> = requests
        .iter()
        .map(|attrs| contab::make_contab(&tree, attrs))
        .collect::<Result<_>>()?;
    let linear_answers: Vec<ContingencyTable> = requests
        .iter()
        .map(|attrs| oracle::linear_contab(&dataset, attrs, &Query::empty()))
        .collect::<Result<_>>()?;
    if tree_answers != linear_answers {
        return Err(Error::Integrity(
            "benchmark backends disagree on contingency tables; aborting".into(),
        ));
    }

    let adtree_secs = time_reps(reps, || {
        for attrs in &requests {
            contab::make_contab(&tree, attrs).unwrap();
        }
    });
    let linear_secs = time_reps(reps, || {
        for attrs in &requests {
            oracle::linear_contab(&dataset, attrs, &Query::empty()).unwrap();
        }
    });

    Ok(BenchReport {
        rows: vec![BenchRow {
            label: format!(
                "contab x{n_requests} (<= {max_attrs} attrs, R = {})",
                dataset.num_records()
            ),
            adtree_secs,
            linear_secs,
            speedup: linear_secs / adtree_secs,
            build_secs: tree.build_time().as_secs_f64(),
            ad_nodes: stats.ad_nodes,
            vary_nodes: stats.vary_nodes,
            estimated_bytes: stats.estimated_bytes,
        }],
    })
}

/// Feature-selection workload at a fixed subset size, both backends.
pub fn features_suite(
    dataset: Arc<Dataset>,
    r_min: u64,
    target: usize,
    n: usize,
    reps: usize,
) -> Result<BenchReport> {
    let tree = AdTree::build(Arc::clone(&dataset), r_min)?;
    let stats = tree.stats();

    let from_tree = ml::feature_select(&tree, target, n)?;
    let from_scan = ml::feature_select(dataset.as_ref(), target, n)?;
    let same = from_tree.len() == from_scan.len()
        && from_tree
            .iter()
            .zip(&from_scan)
            .all(|(a, b)| a.attrs == b.attrs && (a.gain - b.gain).abs() < 1e-9);
    if !same {
        return Err(Error::Integrity(
            "benchmark backends disagree on feature rankings; aborting".into(),
        ));
    }

    let adtree_secs = time_reps(reps, || {
        ml::feature_select(&tree, target, n).unwrap();
    });
    let linear_secs = time_reps(reps, || {
        ml::feature_select(dataset.as_ref(), target, n).unwrap();
    });
    Ok(BenchReport {
        rows: vec![BenchRow {
            label: format!("features n={n} target=a{}", target + 1),
            adtree_secs,
            linear_secs,
            speedup: linear_secs / adtree_secs,
            build_secs: tree.build_time().as_secs_f64(),
            ad_nodes: stats.ad_nodes,
            vary_nodes: stats.vary_nodes,
            estimated_bytes: stats.estimated_bytes,
        }],
    })
}

/// Rule-search workload at a fixed antecedent size, both backends.
pub fn rules_suite(
    dataset: Arc<Dataset>,
    r_min: u64,
    target: usize,
    target_value: u32,
    n: usize,
    s_min: u64,
    reps: usize,
) -> Result<BenchReport> {
    let tree = AdTree::build(Arc::clone(&dataset), r_min)?;
    let stats = tree.stats();

    let from_tree = ml::rule_search(&tree, target, target_value, n, s_min, 20)?;
    let from_scan = ml::rule_search(dataset.as_ref(), target, target_value, n, s_min, 20)?;
    if from_tree != from_scan {
        return Err(Error::Integrity(
            "benchmark backends disagree on rules; aborting".into(),
        ));
    }

    let adtree_secs = time_reps(reps, || {
        ml::rule_search(&tree, target, target_value, n, s_min, 20).unwrap();
    });
    let linear_secs = time_reps(reps, || {
        ml::rule_search(dataset.as_ref(), target, target_value, n, s_min, 20).unwrap();
    });
    Ok(BenchReport {
        rows: vec![BenchRow {
            label: format!("rules n={n} target=a{}={target_value}", target + 1),
            adtree_secs,
            linear_secs,
            speedup: linear_secs / adtree_secs,
            build_secs: tree.build_time().as_secs_f64(),
            ad_nodes: stats.ad_nodes,
            vary_nodes: stats.vary_nodes,
            estimated_bytes: stats.estimated_bytes,
        }],
    })
}

/// Hill-climbing workload: one contingency-table rebuild per accepted-or-
/// rejected step, mirroring the structure-search usage pattern.
pub fn bayes_suite(
    dataset: Arc<Dataset>,
    r_min: u64,
    iterations: u64,
    seed: u64,
    reps: usize,
) -> Result<BenchReport> {
    let tree = AdTree::build(Arc::clone(&dataset), r_min)?;
    let stats = tree.stats();
    let cfg = HillClimbConfig {
        iterations,
        restarts: 1,
        seed,
        max_parents: 8,
    };

    let from_tree = ml::bn_hill_climb(&tree, &cfg)?;
    let from_scan = ml::bn_hill_climb(dataset.as_ref(), &cfg)?;
    if from_tree.best != from_scan.best || (from_tree.best_score - from_scan.best_score).abs() > 1e-6
    {
        return Err(Error::Integrity(
            "benchmark backends disagree on the best network; aborting".into(),
        ));
    }

    let adtree_secs = time_reps(reps, || {
        ml::bn_hill_climb(&tree, &cfg).unwrap();
    });
    let linear_secs = time_reps(reps, || {
        ml::bn_hill_climb(dataset.as_ref(), &cfg).unwrap();
    });
    Ok(BenchReport {
        rows: vec![BenchRow {
            label: format!("bayes {iterations} iterations"),
            adtree_secs,
            linear_secs,
            speedup: linear_secs / adtree_secs,
            build_secs: tree.build_time().as_secs_f64(),
            ad_nodes: stats.ad_nodes,
            vary_nodes: stats.vary_nodes,
            estimated_bytes: stats.estimated_bytes,
        }],
    })
}

/// Tree size and build time across a range of leaf-list thresholds.
pub fn rmin_sweep(dataset: Arc<Dataset>, r_mins: &[u64]) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(r_mins.len());
    for &r_min in r_mins {
        let tree = AdTree::build(Arc::clone(&dataset), r_min)?;
        let stats = tree.stats();
        rows.push(BenchRow {
            label: format!("r_min = {r_min}"),
            adtree_secs: 0.0,
            linear_secs: 0.0,
            speedup: 1.0,
            build_secs: tree.build_time().as_secs_f64(),
            ad_nodes: stats.ad_nodes,
            vary_nodes: stats.vary_nodes,
            estimated_bytes: stats.estimated_bytes,
        });
    }
    Ok(BenchReport { rows })
}

/// Tree size across synthetic datasets of increasing record counts.
pub fn size_sweep(sizes: &[usize], seed: u64, r_min: u64) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n_records in sizes {
        let dataset = synth_generate(&SynthConfig::with_defaults(n_records, seed))?.into_arc();
        let tree = AdTree::build(dataset, r_min)?;
        let stats = tree.stats();
        rows.push(BenchRow {
            label: format!("R = {n_records}"),
            adtree_secs: 0.0,
            linear_secs: 0.0,
            speedup: 1.0,
            build_secs: tree.build_time().as_secs_f64(),
            ad_nodes: stats.ad_nodes,
            vary_nodes: stats.vary_nodes,
            estimated_bytes: stats.estimated_bytes,
        });
    }
    Ok(BenchReport { rows })
}
