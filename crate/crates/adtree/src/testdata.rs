//! Small built-in datasets and helpers used throughout the test suites and
//! documentation examples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::query::Query;

/// The six-record, three-attribute worked example: arities (2, 4, 2), with
/// value 2 of the middle attribute never occurring.
pub fn worked_example() -> Dataset {
    let records = vec![
        vec![1, 1, 1],
        vec![2, 3, 1],
        vec![2, 4, 2],
        vec![1, 3, 1],
        vec![2, 3, 1],
        vec![1, 3, 1],
    ];
    let names = vec!["a1".into(), "a2".into(), "a3".into()];
    let maps = vec![
        vec!["1".into(), "2".into()],
        vec!["1".into(), "2".into(), "3".into(), "4".into()],
        vec!["1".into(), "2".into()],
    ];
    Dataset::from_encoded(names, vec![2, 4, 2], records, maps).unwrap()
}

/// All `2^m` distinct binary records, one each: the worst case for the
/// sparse tree and the dense tree alike.
pub fn all_binary_records(m: usize) -> Dataset {
    let records = (0..1u32 << m)
        .map(|bits| (0..m).map(|i| 1 + ((bits >> i) & 1)).collect())
        .collect();
    binary_from_records(m, records)
}

/// Wraps pre-encoded binary records (codes 1 and 2) in a dataset.
pub fn binary_from_records(m: usize, records: Vec<Vec<u32>>) -> Dataset {
    let names = (1..=m).map(|i| format!("a{i}")).collect();
    let maps = vec![vec!["1".into(), "2".into()]; m];
    Dataset::from_encoded(names, vec![2; m], records, maps).unwrap()
}

/// A random dataset with `m` attributes of arity 2..=`max_arity` and `r`
/// records, with a per-attribute skew so most-common values vary. Each
/// attribute's full code range is forced to appear when `r` permits, so the
/// declared arities stay honest.
pub fn random_dataset(m: usize, max_arity: u32, r: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arities: Vec<u32> = (0..m).map(|_| rng.gen_range(2..=max_arity)).collect();
    let skews: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..0.9)).collect();
    let mut records: Vec<Vec<u32>> = (0..r)
        .map(|_| {
            (0..m)
                .map(|i| {
                    if rng.gen_bool(skews[i]) {
                        1
                    } else {
                        rng.gen_range(1..=arities[i])
                    }
                })
                .collect()
        })
        .collect();
    // make sure every declared code occurs at least once
    if r >= max_arity as usize {
        for i in 0..m {
            for v in 1..=arities[i] {
                records[(v - 1) as usize][i] = v;
            }
        }
    }
    let names = (1..=m).map(|i| format!("a{i}")).collect();
    let maps = arities
        .iter()
        .map(|&a| (1..=a).map(|v| v.to_string()).collect())
        .collect();
    Dataset::from_encoded(names, arities, records, maps).unwrap()
}

/// Every possible query over the given arities (each attribute absent or
/// fixed to one of its values).
pub fn all_queries(arities: &[u32]) -> Vec<Query> {
    let mut out = vec![Query::empty()];
    for (attr, &arity) in arities.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (arity as usize + 1));
        for q in &out {
            next.push(q.clone());
            for v in 1..=arity {
                let mut terms = q.terms().to_vec();
                terms.push((attr, v));
                next.push(Query::new(terms).unwrap());
            }
        }
        out = next;
    }
    out
}
