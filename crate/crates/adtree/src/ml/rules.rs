//! Exhaustive conjunctive rule search for a distinguished target value.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ml::Counter;
use crate::query::Query;

/// A conjunctive rule `antecedent => target = value` with its support and
/// hit counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rule {
    pub antecedent: Query,
    pub target_attr: usize,
    pub target_value: u32,
    /// Records matching the antecedent.
    pub support: u64,
    /// Records matching the antecedent and the target value.
    pub hits: u64,
}

impl Rule {
    pub fn score(&self) -> f64 {
        self.hits as f64 / self.support as f64
    }
}

/// Searches every attribute set of size `n` (target excluded), building one
/// contingency table per set and scanning its rows. Emits each assignment
/// with support at least `s_min` as a rule and returns the `top_k` by score,
/// with ties broken by larger support, then lexicographically smaller
/// antecedent.
pub fn rule_search(
    counter: &dyn Counter,
    target: usize,
    target_value: u32,
    n: usize,
    s_min: u64,
    top_k: usize,
) -> Result<Vec<Rule>> {
    let m = counter.num_attrs();
    if target >= m {
        return Err(Error::Argument(format!(
            "target index {} out of range (M = {m})",
            target + 1
        )));
    }
    if target_value < 1 || target_value > counter.arities()[target] {
        return Err(Error::Argument(format!(
            "target value {target_value} out of range for a{} (arity {})",
            target + 1,
            counter.arities()[target]
        )));
    }
    if n < 1 || n > m - 1 {
        return Err(Error::Argument(format!(
            "antecedent size must lie in 1..={}, got {n}",
            m - 1
        )));
    }
    if s_min < 1 {
        return Err(Error::Argument("support threshold must be at least 1".into()));
    }

    let candidates: Vec<usize> = (0..m).filter(|&a| a != target).collect();
    let mut rules = Vec::new();
    for combo in candidates.into_iter().combinations(n) {
        let mut attrs = combo.clone();
        attrs.push(target);
        attrs.sort_unstable();
        let table = counter.contab(&attrs)?;
        for (asgn, values) in table.group_by(target)? {
            let support: u64 = values.iter().map(|&(_, c)| c).sum();
            if support < s_min {
                continue;
            }
            let hits = values
                .iter()
                .find(|&&(v, _)| v == target_value)
                .map_or(0, |&(_, c)| c);
            let terms: Vec<(usize, u32)> = combo
                .iter()
                .copied()
                .sorted_unstable()
                .zip(asgn.iter().copied())
                .collect();
            rules.push(Rule {
                antecedent: Query::new(terms)?,
                target_attr: target,
                target_value,
                support,
                hits,
            });
        }
    }
    rules.sort_by(|a, b| {
        b.score()
            .partial_cmp(&a.score())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| b.support.cmp(&a.support))
            .then_with(|| a.antecedent.terms().cmp(b.antecedent.terms()))
    });
    rules.truncate(top_k);
    Ok(rules)
}
