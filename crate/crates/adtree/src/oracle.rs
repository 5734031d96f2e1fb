//! Ground-truth counting: linear scans and the fully materialized dense
//! tree, kept deliberately simple so the sparse implementation has an
//! independent reference. Not built for speed.

use crate::contab::ContingencyTable;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::query::Query;

/// Counts matching records by scanning the whole dataset.
pub fn linear_count(d: &Dataset, q: &Query) -> Result<u64> {
    q.validate(d.arities())?;
    Ok(d.records().iter().filter(|r| q.matches(r)).count() as u64)
}

/// Builds a (conditional) contingency table in one pass over the records.
/// Output is in the same sparse canonical form as the tree-backed builder.
pub fn linear_contab(d: &Dataset, attrs: &[usize], cond: &Query) -> Result<ContingencyTable> {
    cond.validate(d.arities())?;
    let mut sorted: Vec<usize> = attrs.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::Argument(format!(
                "duplicate attribute a{} in table request",
                w[0] + 1
            )));
        }
    }
    for &a in &sorted {
        if a >= d.num_attrs() {
            return Err(Error::Argument(format!(
                "attribute index {} out of range (M = {})",
                a + 1,
                d.num_attrs()
            )));
        }
        if cond.attrs().any(|c| c == a) {
            return Err(Error::Argument(format!(
                "attribute a{} appears in both the table and the condition",
                a + 1
            )));
        }
    }
    let arities: Vec<u32> = sorted.iter().map(|&a| d.arity(a)).collect();
    let mut ct = ContingencyTable::new(sorted.clone(), arities, cond.clone());
    for rec in d.records() {
        if cond.matches(rec) {
            ct.insert_add(sorted.iter().map(|&a| rec[a]).collect(), 1);
        }
    }
    Ok(ct)
}

/// The fully materialized tree: one node (one stored count) for every
/// possible query. With zero pruning, zero-count queries store nothing.
pub struct DenseTree {
    root: DenseNode,
    arities: Vec<u32>,
    zero_pruned: bool,
    stored_counts: u64,
}

struct DenseNode {
    count: u64,
    /// Vary structures for consecutive attributes past this node's own; each
    /// inner vector has one slot per value.
    varys: Vec<Vec<Option<Box<DenseNode>>>>,
}

/// Default cap on the unpruned node count.
pub const DENSE_TREE_CAP: u64 = 10_000_000;

pub fn build_dense(d: &Dataset, zero_pruned: bool, cap: u64) -> Result<DenseTree> {
    let mut total: u64 = 1;
    for &a in d.arities() {
        total = total
            .checked_mul(a as u64 + 1)
            .filter(|&t| t <= cap)
            .ok_or_else(|| {
                Error::Size(format!(
                    "dense tree would exceed the {cap}-node cap"
                ))
            })?;
    }
    let rows: Vec<u32> = (0..d.num_records() as u32).collect();
    let mut stored = 0;
    let root = build_dense_node(d, &rows, 0, zero_pruned, &mut stored);
    Ok(DenseTree {
        root,
        arities: d.arities().to_vec(),
        zero_pruned,
        stored_counts: stored,
    })
}

fn build_dense_node(
    d: &Dataset,
    rows: &[u32],
    first_attr: usize,
    zero_pruned: bool,
    stored: &mut u64,
) -> DenseNode {
    *stored += 1;
    let mut varys = Vec::with_capacity(d.num_attrs() - first_attr);
    for attr in first_attr..d.num_attrs() {
        let arity = d.arity(attr) as usize;
        let mut child_rows: Vec<Vec<u32>> = vec![Vec::new(); arity];
        for &r in rows {
            child_rows[d.record(r as usize)[attr] as usize - 1].push(r);
        }
        let children = child_rows
            .into_iter()
            .map(|rs| {
                if zero_pruned && rs.is_empty() {
                    None
                } else {
                    Some(Box::new(build_dense_node(
                        d,
                        &rs,
                        attr + 1,
                        zero_pruned,
                        stored,
                    )))
                }
            })
            .collect();
        varys.push(children);
    }
    DenseNode {
        count: rows.len() as u64,
        varys,
    }
}

impl DenseTree {
    /// Number of counts held in memory. Unpruned this is the product of
    /// `(n_i + 1)`; zero-pruned it is the number of nonzero-count queries.
    pub fn stored_counts(&self) -> u64 {
        self.stored_counts
    }

    pub fn zero_pruned(&self) -> bool {
        self.zero_pruned
    }

    pub fn lookup(&self, q: &Query) -> Result<u64> {
        q.validate(&self.arities)?;
        let mut node = &self.root;
        let mut first_attr = 0;
        for &(attr, value) in q.terms() {
            match &node.varys[attr - first_attr][value as usize - 1] {
                Some(child) => node = child,
                None => return Ok(0),
            }
            first_attr = attr + 1;
        }
        Ok(node.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata;

    fn q(terms: &[(usize, u32)]) -> Query {
        Query::new(terms.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_linear_counts() {
        let d = testdata::worked_example();
        assert_eq!(linear_count(&d, &q(&[(1, 3), (2, 1)])).unwrap(), 4);
        assert_eq!(linear_count(&d, &Query::empty()).unwrap(), 6);
    }

    #[test]
    fn worked_example_linear_table_a2_a3() {
        let d = testdata::worked_example();
        let ct = linear_contab(&d, &[1, 2], &Query::empty()).unwrap();
        assert_eq!(
            ct.to_dense(crate::contab::DENSE_ROW_CAP).unwrap(),
            vec![1, 0, 0, 0, 4, 0, 0, 1]
        );
    }

    #[test]
    fn empty_attr_set_is_single_cell() {
        let d = testdata::worked_example();
        let ct = linear_contab(&d, &[], &Query::empty()).unwrap();
        assert_eq!(ct.get(&[]), 6);
    }

    #[test]
    fn dense_tree_stored_counts_on_worked_example() {
        let d = testdata::worked_example();
        assert_eq!(build_dense(&d, false, DENSE_TREE_CAP).unwrap().stored_counts(), 45);
        assert_eq!(build_dense(&d, true, DENSE_TREE_CAP).unwrap().stored_counts(), 22);
    }

    #[test]
    fn dense_tree_all_records_binary_is_three_to_the_m() {
        for m in 1..=7usize {
            let d = testdata::all_binary_records(m);
            let t = build_dense(&d, false, DENSE_TREE_CAP).unwrap();
            assert_eq!(t.stored_counts(), 3u64.pow(m as u32), "M = {m}");
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let d = testdata::random_dataset(24, 4, 10, 1);
        assert!(matches!(
            build_dense(&d, false, 1000),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn dense_lookup_agrees_with_linear_scan() {
        let d = testdata::random_dataset(5, 3, 80, 0xd1ce);
        for pruned in [false, true] {
            let t = build_dense(&d, pruned, DENSE_TREE_CAP).unwrap();
            for query in testdata::all_queries(d.arities()) {
                assert_eq!(
                    t.lookup(&query).unwrap(),
                    linear_count(&d, &query).unwrap()
                );
            }
        }
    }
}
