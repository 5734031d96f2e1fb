//! Information-gain scoring of attribute sets for predicting a target.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ml::Counter;

/// A candidate input set and its information gain in bits.
#[derive(Clone, Debug, Serialize)]
pub struct FeatureScore {
    pub attrs: Vec<usize>,
    pub gain: f64,
}

fn f(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Information gain of `attrs` for predicting `target`, in bits: the entropy
/// of the target minus its expected entropy conditioned on the inputs, with
/// the `f(0) = 0` convention. Assignments matching zero records contribute
/// nothing.
pub fn info_gain(counter: &dyn Counter, target: usize, attrs: &[usize]) -> Result<FeatureScore> {
    if attrs.contains(&target) {
        return Err(Error::Argument(format!(
            "target attribute a{} cannot also be an input",
            target + 1
        )));
    }
    let mut sorted = attrs.to_vec();
    sorted.sort_unstable();
    let mut all = sorted.clone();
    all.push(target);
    all.sort_unstable();
    let table = counter.contab(&all)?;
    let r = counter.num_records() as f64;
    if r == 0.0 {
        return Ok(FeatureScore {
            attrs: sorted,
            gain: 0.0,
        });
    }

    let groups = table.group_by(target)?;
    let mut out_counts: Vec<u64> = vec![0; counter.arities()[target] as usize];
    for values in groups.values() {
        for &(v, c) in values {
            out_counts[v as usize - 1] += c;
        }
    }
    let out_entropy: f64 = out_counts.iter().map(|&c| f(c as f64 / r)).sum();

    let mut cond_entropy = 0.0;
    for values in groups.values() {
        let support: u64 = values.iter().map(|&(_, c)| c).sum();
        let h: f64 = values
            .iter()
            .map(|&(_, c)| f(c as f64 / support as f64))
            .sum();
        cond_entropy += (support as f64 / r) * h;
    }
    Ok(FeatureScore {
        attrs: sorted,
        gain: out_entropy - cond_entropy,
    })
}

/// Scores every attribute set of size `n` that excludes the target, ranked
/// by descending gain with ties broken lexicographically.
pub fn feature_select(
    counter: &dyn Counter,
    target: usize,
    n: usize,
) -> Result<Vec<FeatureScore>> {
    let m = counter.num_attrs();
    if target >= m {
        return Err(Error::Argument(format!(
            "target index {} out of range (M = {m})",
            target + 1
        )));
    }
    if n < 1 || n > m - 1 {
        return Err(Error::Argument(format!(
            "subset size must lie in 1..={}, got {n}",
            m - 1
        )));
    }
    let candidates: Vec<usize> = (0..m).filter(|&a| a != target).collect();
    let mut scores = Vec::new();
    for combo in candidates.into_iter().combinations(n) {
        scores.push(info_gain(counter, target, &combo)?);
    }
    scores.sort_by(|a, b| {
        b.gain
            .partial_cmp(&a.gain)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.attrs.cmp(&b.attrs))
    });
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata;
    use crate::tree::AdTree;

    fn example_tree() -> AdTree {
        AdTree::build(testdata::worked_example().into_arc(), 1).unwrap()
    }

    #[test]
    fn worked_example_a2_determines_a3() {
        let t = example_tree();
        let s = info_gain(&t, 2, &[1]).unwrap();
        // a2 fixes a3 in this data, so the gain is the full entropy of a3
        assert!((s.gain - 0.650022).abs() < 1e-4, "gain = {}", s.gain);
    }

    #[test]
    fn worked_example_a1_partial_gain() {
        let t = example_tree();
        let s = info_gain(&t, 2, &[0]).unwrap();
        assert!((s.gain - 0.190875).abs() < 1e-4, "gain = {}", s.gain);
    }

    #[test]
    fn constant_input_has_zero_gain() {
        let d = crate::dataset::Dataset::from_encoded(
            vec!["x".into(), "y".into()],
            vec![1, 2],
            vec![vec![1, 1], vec![1, 2], vec![1, 1]],
            vec![vec!["a".into()], vec!["a".into(), "b".into()]],
        )
        .unwrap();
        let s = info_gain(&d, 1, &[0]).unwrap();
        assert!(s.gain.abs() < 1e-12);
    }

    #[test]
    fn target_in_inputs_rejected() {
        let t = example_tree();
        assert!(matches!(
            info_gain(&t, 2, &[1, 2]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn worked_example_feature_select_picks_a2() {
        let t = example_tree();
        let ranking = feature_select(&t, 2, 1).unwrap();
        assert_eq!(ranking.len(), 2);
        assert_eq!(ranking[0].attrs, vec![1]);
        assert!((ranking[0].gain - 0.650022).abs() < 1e-4);
        assert_eq!(ranking[1].attrs, vec![0]);
    }

    #[test]
    fn full_subset_is_single_candidate() {
        let t = example_tree();
        let ranking = feature_select(&t, 0, 2).unwrap();
        assert_eq!(ranking.len(), 1);
        assert_eq!(ranking[0].attrs, vec![1, 2]);
    }

    #[test]
    fn gain_is_bounded() {
        let d = testdata::random_dataset(5, 4, 150, 0x9a1e);
        let t = AdTree::build(d.clone().into_arc(), 4).unwrap();
        for target in 0..5 {
            for n in 1..=2 {
                for s in feature_select(&t, target, n).unwrap() {
                    assert!(s.gain >= -1e-12);
                    assert!(s.gain <= (d.arity(target) as f64).log2() + 1e-12);
                }
            }
        }
    }
}
