//! Worst-case size and build-cost bounds for trees over binary attributes.
//!
//! All bounds assume binary attributes; for other schemas they are reported
//! as binary-model figures. Sums are evaluated in exact integer arithmetic.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters for the analytic bounds.
#[derive(Clone, Debug)]
pub struct BoundParams {
    pub num_attrs: u64,
    pub num_records: u64,
    pub r_min: u64,
    /// Per-attribute probability of value 2 in the skewed/correlated models.
    pub skew_p: Option<f64>,
}

/// The bound report. Node-count bounds are also evaluated with `R` replaced
/// by `R / r_min`, the leaf-list substitution.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub num_attrs: u64,
    pub num_records: u64,
    pub r_min: u64,
    pub skew_p: Option<f64>,
    /// 2^M, the all-records-present worst case.
    pub full_worst_case: BigUint,
    /// Node bound for R records: sum of C(M, k) for k up to floor(log2 R).
    pub row_limited: BigUint,
    pub row_limited_leaf_lists: BigUint,
    /// Same sum with the level cutoff floor(log2 R / -log2 q), q = min(p, 1-p).
    pub skewed: Option<BigUint>,
    pub skewed_leaf_lists: Option<BigUint>,
    /// Same form with q = sqrt(2 p (1 - p)) for the hidden-cause model.
    pub correlated: Option<BigUint>,
    pub correlated_leaf_lists: Option<BigUint>,
    /// Build-cost bound: sum over k of (R / 2^k) * C(M, k), k up to ceil(log2 R).
    pub build_cost: BigUint,
}

fn binomial(m: u64, k: u64) -> BigUint {
    if k > m {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    acc
}

/// Sum of C(M, k) for k in 0..=max_level, clamping max_level at M.
fn level_sum(m: u64, max_level: u64) -> BigUint {
    (0..=max_level.min(m)).map(|k| binomial(m, k)).sum()
}

fn floor_log2(x: u64) -> u64 {
    debug_assert!(x >= 1);
    63 - x.leading_zeros() as u64
}

fn ceil_log2(x: u64) -> u64 {
    let f = floor_log2(x);
    if x.is_power_of_two() {
        f
    } else {
        f + 1
    }
}

/// Level cutoff floor(log2 R / -log2 q). Returns 0 for R <= 1.
fn skew_cutoff(r: u64, q: f64) -> u64 {
    if r <= 1 {
        return 0;
    }
    ((r as f64).log2() / -q.log2()).floor() as u64
}

pub fn memory_bounds(bp: &BoundParams) -> Result<BoundReport> {
    if bp.num_attrs < 1 || bp.num_records < 1 {
        return Err(Error::Argument("bounds require M >= 1 and R >= 1".into()));
    }
    if bp.r_min < 1 {
        return Err(Error::Argument("r_min must be at least 1".into()));
    }
    if let Some(p) = bp.skew_p {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Argument(format!(
                "skew probability must lie strictly between 0 and 1, got {p}"
            )));
        }
    }
    let m = bp.num_attrs;
    let r = bp.num_records;
    // R / r_min rounded down; a result of 0 clamps the level range to k = 0.
    let r_ll = (r / bp.r_min).max(1);

    let row_limited = level_sum(m, floor_log2(r));
    let row_limited_leaf_lists = level_sum(m, floor_log2(r_ll));

    let (skewed, skewed_ll, correlated, correlated_ll) = match bp.skew_p {
        None => (None, None, None, None),
        Some(p) => {
            let q_skew = p.min(1.0 - p);
            let q_corr = (2.0 * p * (1.0 - p)).sqrt();
            (
                Some(level_sum(m, skew_cutoff(r, q_skew))),
                Some(level_sum(m, skew_cutoff(r_ll, q_skew))),
                Some(level_sum(m, skew_cutoff(r, q_corr))),
                Some(level_sum(m, skew_cutoff(r_ll, q_corr))),
            )
        }
    };

    let build_cost = (0..=ceil_log2(r).min(m))
        .map(|k| BigUint::from(r >> k.min(63)) * binomial(m, k))
        .sum();

    Ok(BoundReport {
        num_attrs: m,
        num_records: r,
        r_min: bp.r_min,
        skew_p: bp.skew_p,
        full_worst_case: BigUint::from(2u32).pow(m.try_into().map_err(|_| {
            Error::Argument("attribute count too large for the 2^M bound".into())
        })?),
        row_limited,
        row_limited_leaf_lists,
        skewed,
        skewed_leaf_lists: skewed_ll,
        correlated,
        correlated_leaf_lists: correlated_ll,
        build_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn row_limited_bound_for_forty_attrs_fifteen_records() {
        let r = memory_bounds(&BoundParams {
            num_attrs: 40,
            num_records: 15,
            r_min: 1,
            skew_p: None,
        })
        .unwrap();
        assert_eq!(r.row_limited, big(10701));
    }

    #[test]
    fn build_cost_small_case() {
        // M=3, R=8: 8*1 + 4*3 + 2*3 + 1*1 = 27
        let r = memory_bounds(&BoundParams {
            num_attrs: 3,
            num_records: 8,
            r_min: 1,
            skew_p: None,
        })
        .unwrap();
        assert_eq!(r.build_cost, big(27));
    }

    #[test]
    fn skewed_bound_small_case() {
        // M=10, R=256, p=0.25: q=0.25, cutoff 8/2 = 4, sum C(10,k) = 386
        let r = memory_bounds(&BoundParams {
            num_attrs: 10,
            num_records: 256,
            r_min: 1,
            skew_p: Some(0.25),
        })
        .unwrap();
        assert_eq!(r.skewed.unwrap(), big(386));
    }

    #[test]
    fn single_record_sum_is_one() {
        for m in [1u64, 5, 40] {
            let r = memory_bounds(&BoundParams {
                num_attrs: m,
                num_records: 1,
                r_min: 1,
                skew_p: None,
            })
            .unwrap();
            assert_eq!(r.row_limited, big(1), "M = {m}");
        }
    }

    #[test]
    fn leaf_list_substitution_divides_r() {
        let base = BoundParams {
            num_attrs: 20,
            num_records: 1024,
            r_min: 16,
            skew_p: None,
        };
        let r = memory_bounds(&base).unwrap();
        assert_eq!(r.row_limited, level_sum(20, 10));
        assert_eq!(r.row_limited_leaf_lists, level_sum(20, 6));
        // r_min larger than R clamps the range at k = 0
        let r = memory_bounds(&BoundParams {
            r_min: 4096,
            ..base
        })
        .unwrap();
        assert_eq!(r.row_limited_leaf_lists, big(1));
    }

    #[test]
    fn bad_p_is_rejected() {
        for p in [0.0, 1.0, -0.1, 1.5] {
            assert!(memory_bounds(&BoundParams {
                num_attrs: 4,
                num_records: 8,
                r_min: 1,
                skew_p: Some(p),
            })
            .is_err());
        }
    }
}
