//! Counts and contingency tables computed from the sparse tree.
//!
//! Both the single-query count and the table builder walk the tree in
//! ascending attribute order. At a vary node whose requested value is the
//! pruned most-common value, the answer is recovered by subtraction: the
//! same quantity computed at the current node minus the contributions of all
//! stored siblings. Leaf-list nodes are resolved by scanning their listed
//! records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::Query;
use crate::tree::{AdNode, AdTree};

/// A sparse contingency table over an ascending attribute set. Cells with a
/// count of zero are never stored; dense rendering reconstructs them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    attrs: Vec<usize>,
    arities: Vec<u32>,
    cells: BTreeMap<Vec<u32>, u64>,
    condition: Query,
}

/// Default cap on the dense-render row count.
pub const DENSE_ROW_CAP: u64 = 1_000_000;

impl ContingencyTable {
    pub(crate) fn new(attrs: Vec<usize>, arities: Vec<u32>, condition: Query) -> Self {
        ContingencyTable {
            attrs,
            arities,
            cells: BTreeMap::new(),
            condition,
        }
    }

    pub fn attrs(&self) -> &[usize] {
        &self.attrs
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    pub fn condition(&self) -> &Query {
        &self.condition
    }

    /// Count for a full value tuple; zero if the cell is not stored.
    pub fn get(&self, tuple: &[u32]) -> u64 {
        self.cells.get(tuple).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.cells.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> u64 {
        self.cells.values().sum()
    }

    pub(crate) fn insert_add(&mut self, tuple: Vec<u32>, count: u64) {
        if count > 0 {
            *self.cells.entry(tuple).or_insert(0) += count;
        }
    }

    pub(crate) fn from_cells(
        attrs: Vec<usize>,
        arities: Vec<u32>,
        condition: Query,
        cells: BTreeMap<Vec<u32>, u64>,
    ) -> Self {
        debug_assert!(cells.values().all(|&c| c > 0));
        ContingencyTable {
            attrs,
            arities,
            cells,
            condition,
        }
    }

    /// Sums out one attribute, yielding the table over the remaining set.
    pub fn marginalize(&self, attr: usize) -> Result<ContingencyTable> {
        let pos = self
            .attrs
            .iter()
            .position(|&a| a == attr)
            .ok_or_else(|| Error::Argument(format!("attribute {attr} not in table")))?;
        let attrs: Vec<usize> = self
            .attrs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &a)| a)
            .collect();
        let arities: Vec<u32> = self
            .arities
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &a)| a)
            .collect();
        let mut out = ContingencyTable::new(attrs, arities, self.condition.clone());
        for (tuple, count) in self.cells() {
            let mut t = tuple.to_vec();
            t.remove(pos);
            out.insert_add(t, count);
        }
        Ok(out)
    }

    /// Groups cells by the tuple with `attr`'s position removed; each group
    /// maps an assignment of the other attributes to its `(value, count)`
    /// pairs over `attr`.
    pub fn group_by(&self, attr: usize) -> Result<BTreeMap<Vec<u32>, Vec<(u32, u64)>>> {
        let pos = self
            .attrs
            .iter()
            .position(|&a| a == attr)
            .ok_or_else(|| Error::Argument(format!("attribute {attr} not in table")))?;
        let mut groups: BTreeMap<Vec<u32>, Vec<(u32, u64)>> = BTreeMap::new();
        for (tuple, count) in self.cells() {
            let v = tuple[pos];
            let mut key = tuple.to_vec();
            key.remove(pos);
            groups.entry(key).or_default().push((v, count));
        }
        Ok(groups)
    }

    /// Dense enumeration of all value tuples in odometer order (last
    /// attribute fastest), zeros included.
    pub fn to_dense(&self, cap: u64) -> Result<Vec<u64>> {
        let mut rows: u64 = 1;
        for &a in &self.arities {
            rows = rows
                .checked_mul(a as u64)
                .filter(|&r| r <= cap)
                .ok_or_else(|| {
                    Error::Size(format!("dense table exceeds the {cap}-row cap"))
                })?;
        }
        let mut out = Vec::with_capacity(rows as usize);
        for tuple in DenseRows::new(&self.arities) {
            out.push(self.get(&tuple));
        }
        Ok(out)
    }

    /// Dense rows paired with their value tuples, same order as `to_dense`.
    pub fn dense_rows(&self, cap: u64) -> Result<Vec<(Vec<u32>, u64)>> {
        let counts = self.to_dense(cap)?;
        Ok(DenseRows::new(&self.arities).zip(counts).collect())
    }
}

/// Odometer iterator over all value tuples for the given arities.
struct DenseRows {
    arities: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl DenseRows {
    fn new(arities: &[u32]) -> Self {
        let next = if arities.iter().any(|&a| a == 0) {
            None
        } else {
            Some(vec![1; arities.len()])
        };
        DenseRows {
            arities: arities.to_vec(),
            next,
        }
    }
}

impl Iterator for DenseRows {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            if succ[i] < self.arities[i] {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = 1;
        }
        if current.is_empty() {
            self.next = None;
        }
        Some(current)
    }
}

/// Counts the records matching a conjunctive query.
pub fn count(tree: &AdTree, q: &Query) -> Result<u64> {
    q.validate(tree.arities())?;
    Ok(count_rec(tree, tree.root(), q.terms()))
}

fn count_rec(tree: &AdTree, node: &AdNode, terms: &[(usize, u32)]) -> u64 {
    if terms.is_empty() {
        return node.count();
    }
    if let Some(rows) = node.leaf_list() {
        return rows
            .iter()
            .filter(|&&r| {
                let rec = tree.dataset().record(r as usize);
                terms.iter().all(|&(a, v)| rec[a] == v)
            })
            .count() as u64;
    }
    let (attr, value) = terms[0];
    let vn = node.vary(attr).expect("query attr below node context");
    if value == vn.mcv() {
        let total = count_rec(tree, node, &terms[1..]);
        let others: u64 = vn
            .children()
            .map(|(_, child)| count_rec(tree, child, &terms[1..]))
            .sum();
        total - others
    } else {
        match vn.child(value) {
            None => 0,
            Some(child) => count_rec(tree, child, &terms[1..]),
        }
    }
}

/// Recursion instrumentation: table-builder invocations and the number of
/// cell subtractions performed while recovering pruned subtables.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ContabStats {
    pub calls: u64,
    pub cell_subtractions: u64,
}

/// Builds the contingency table over `attrs` (any order; duplicates are an
/// error).
pub fn make_contab(tree: &AdTree, attrs: &[usize]) -> Result<ContingencyTable> {
    make_contab_conditional(tree, attrs, &Query::empty())
}

/// Conditional variant: the table over `attrs` restricted to records
/// matching `cond`. The condition's attributes must be disjoint from
/// `attrs`.
pub fn make_contab_conditional(
    tree: &AdTree,
    attrs: &[usize],
    cond: &Query,
) -> Result<ContingencyTable> {
    let (ct, _) = make_contab_instrumented(tree, attrs, cond)?;
    Ok(ct)
}

pub fn make_contab_instrumented(
    tree: &AdTree,
    attrs: &[usize],
    cond: &Query,
) -> Result<(ContingencyTable, ContabStats)> {
    cond.validate(tree.arities())?;
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
        if a >= tree.num_attrs() {
            return Err(Error::Argument(format!(
                "attribute index {} out of range (M = {})",
                a + 1,
                tree.num_attrs()
            )));
        }
        if cond.attrs().any(|c| c == a) {
            return Err(Error::Argument(format!(
                "attribute a{} appears in both the table and the condition",
                a + 1
            )));
        }
    }

    // Merge branch and restrict steps into one ascending pass so every vary
    // lookup stays within the node's child range.
    let mut steps: Vec<Step> = sorted
        .iter()
        .map(|&a| Step::Branch(a))
        .chain(cond.terms().iter().map(|&(a, v)| Step::Restrict(a, v)))
        .collect();
    steps.sort_unstable_by_key(|s| s.attr());

    let mut stats = ContabStats::default();
    let cells = build_rec(tree, tree.root(), &steps, &mut stats);
    let arities = sorted.iter().map(|&a| tree.arities()[a]).collect();
    Ok((
        ContingencyTable::from_cells(sorted, arities, cond.clone(), cells),
        stats,
    ))
}

#[derive(Clone, Copy, Debug)]
enum Step {
    /// Enumerate every value of the attribute (a table dimension).
    Branch(usize),
    /// Fix the attribute to one value (a condition term).
    Restrict(usize, u32),
}

impl Step {
    fn attr(&self) -> usize {
        match *self {
            Step::Branch(a) | Step::Restrict(a, _) => a,
        }
    }
}

type Cells = BTreeMap<Vec<u32>, u64>;

fn build_rec(tree: &AdTree, node: &AdNode, steps: &[Step], stats: &mut ContabStats) -> Cells {
    stats.calls += 1;
    if steps.is_empty() {
        let mut cells = Cells::new();
        if node.count() > 0 {
            cells.insert(Vec::new(), node.count());
        }
        return cells;
    }
    if let Some(rows) = node.leaf_list() {
        return scan_rows(tree, rows, steps);
    }
    match steps[0] {
        Step::Branch(attr) => {
            let vn = node.vary(attr).expect("table attr below node context");
            let rest = &steps[1..];
            let mut sub_tables: Vec<(u32, Cells)> = vn
                .children()
                .map(|(v, child)| (v, build_rec(tree, child, rest, stats)))
                .collect();
            // Eq-style recovery of the pruned subtable: the one-shorter table
            // at this node minus every stored sibling.
            let mut mcv_cells = build_rec(tree, node, rest, stats);
            for (_, sub) in &sub_tables {
                subtract_in_place(&mut mcv_cells, sub, stats);
            }
            sub_tables.push((vn.mcv(), mcv_cells));
            let mut out = Cells::new();
            for (v, sub) in sub_tables {
                for (tuple, c) in sub {
                    let mut t = Vec::with_capacity(tuple.len() + 1);
                    t.push(v);
                    t.extend(tuple);
                    out.insert(t, c);
                }
            }
            out
        }
        Step::Restrict(attr, value) => {
            let vn = node.vary(attr).expect("condition attr below node context");
            let rest = &steps[1..];
            if value == vn.mcv() {
                let mut total = build_rec(tree, node, rest, stats);
                for (_, child) in vn.children() {
                    let sub = build_rec(tree, child, rest, stats);
                    subtract_in_place(&mut total, &sub, stats);
                }
                total
            } else {
                match vn.child(value) {
                    None => Cells::new(),
                    Some(child) => build_rec(tree, child, rest, stats),
                }
            }
        }
    }
}

fn scan_rows(tree: &AdTree, rows: &[u32], steps: &[Step]) -> Cells {
    let ds = tree.dataset();
    let mut cells = Cells::new();
    'rows: for &r in rows {
        let rec = ds.record(r as usize);
        let mut tuple = Vec::new();
        for step in steps {
            match *step {
                Step::Restrict(a, v) => {
                    if rec[a] != v {
                        continue 'rows;
                    }
                }
                Step::Branch(a) => tuple.push(rec[a]),
            }
        }
        *cells.entry(tuple).or_insert(0) += 1;
    }
    cells
}

fn subtract_in_place(a: &mut Cells, b: &Cells, stats: &mut ContabStats) {
    for (tuple, &c) in b {
        stats.cell_subtractions += 1;
        match a.get_mut(tuple) {
            Some(x) if *x > c => *x -= c,
            Some(x) if *x == c => {
                a.remove(tuple);
            }
            _ => panic!(
                "contingency-table subtraction underwent a negative cell; \
                 the count tree is inconsistent"
            ),
        }
    }
}

/// Row-wise subtraction of two tables over the same attribute set. `b`'s
/// support must be contained in `a`'s with cell-wise smaller-or-equal
/// counts; an underflow indicates a corrupted tree and panics.
pub fn ct_subtract(a: &ContingencyTable, b: &ContingencyTable) -> Result<ContingencyTable> {
    if a.attrs != b.attrs {
        return Err(Error::Argument(format!(
            "attribute sets differ: {:?} vs {:?}",
            a.attrs, b.attrs
        )));
    }
    let mut cells = a.cells.clone();
    let mut stats = ContabStats::default();
    subtract_in_place(&mut cells, &b.cells, &mut stats);
    Ok(ContingencyTable::from_cells(
        a.attrs.clone(),
        a.arities.clone(),
        a.condition.clone(),
        cells,
    ))
}

/// Worst-case table-build cost `(1 + n(k-1)) k^(n-1)` for `n` attributes of
/// uniform arity `k`.
pub fn contab_cost(n: u32, k: u64) -> Result<u128> {
    if n > 0 && k < 2 {
        return Err(Error::Argument("uniform arity must be at least 2".into()));
    }
    if n == 0 {
        return Ok(1);
    }
    let pow = (k as u128).pow(n - 1);
    Ok((1 + n as u128 * (k as u128 - 1)) * pow)
}

/// One step of the cost recurrence, `C(n) = k C(n-1) + (k-1) k^(n-1)`,
/// exposed for cross-checking the closed form (which satisfies the step for
/// n >= 2; the recurrence's own base does not chain to it at n = 1).
pub fn contab_cost_step(prev: u128, n: u32, k: u64) -> Result<u128> {
    if n < 1 || k < 2 {
        return Err(Error::Argument(
            "the recurrence step needs n >= 1 and arity >= 2".into(),
        ));
    }
    Ok(k as u128 * prev + (k as u128 - 1) * (k as u128).pow(n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata;
    use crate::tree::AdTree;
    use std::sync::Arc;

    fn example_tree(r_min: u64) -> AdTree {
        AdTree::build(testdata::worked_example().into_arc(), r_min).unwrap()
    }

    fn q(terms: &[(usize, u32)]) -> Query {
        Query::new(terms.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_golden_counts() {
        for r_min in [1, 4, 7] {
            let t = example_tree(r_min);
            assert_eq!(count(&t, &q(&[(0, 1)])).unwrap(), 3);
            assert_eq!(count(&t, &q(&[(1, 3), (2, 1)])).unwrap(), 4);
            assert_eq!(count(&t, &Query::empty()).unwrap(), 6);
            assert_eq!(count(&t, &q(&[(0, 2), (1, 4), (2, 2)])).unwrap(), 1);
        }
    }

    #[test]
    fn empty_query_returns_record_count() {
        let t = example_tree(1);
        assert_eq!(count(&t, &Query::empty()).unwrap(), t.num_records());
    }

    #[test]
    fn schema_violations_are_errors_not_zero() {
        let t = example_tree(1);
        assert!(matches!(
            count(&t, &q(&[(1, 5)])),
            Err(Error::Query(_))
        ));
        assert!(matches!(
            count(&t, &q(&[(3, 1)])),
            Err(Error::Query(_))
        ));
    }

    #[test]
    fn exhaustive_sweep_matches_linear_oracle() {
        let t = example_tree(1);
        let d = t.dataset();
        // all 45 queries over arities (2, 4, 2)
        let mut checked = 0;
        for v1 in 0..=2u32 {
            for v2 in 0..=4u32 {
                for v3 in 0..=2u32 {
                    let mut terms = Vec::new();
                    if v1 > 0 {
                        terms.push((0, v1));
                    }
                    if v2 > 0 {
                        terms.push((1, v2));
                    }
                    if v3 > 0 {
                        terms.push((2, v3));
                    }
                    let query = q(&terms);
                    let expect = d
                        .records()
                        .iter()
                        .filter(|r| query.matches(r))
                        .count() as u64;
                    assert_eq!(count(&t, &query).unwrap(), expect, "{terms:?}");
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 45);
    }

    #[test]
    fn pairwise_table_matches_hand_counts() {
        let t = example_tree(1);
        let ct = make_contab(&t, &[0, 2]).unwrap();
        let cells: Vec<(Vec<u32>, u64)> =
            ct.cells().map(|(t, c)| (t.to_vec(), c)).collect();
        assert_eq!(
            cells,
            vec![
                (vec![1, 1], 3),
                (vec![2, 1], 2),
                (vec![2, 2], 1),
            ]
        );
        assert_eq!(ct.to_dense(DENSE_ROW_CAP).unwrap(), vec![3, 0, 2, 1]);
    }

    #[test]
    fn full_table_matches_hand_counts() {
        let t = example_tree(1);
        let ct = make_contab(&t, &[2, 0, 1]).unwrap(); // unsorted on purpose
        assert_eq!(ct.attrs(), &[0, 1, 2]);
        assert_eq!(ct.num_cells(), 4);
        assert_eq!(ct.get(&[2, 4, 2]), 1);
        assert_eq!(ct.total(), 6);
    }

    #[test]
    fn empty_attr_set_gives_single_cell() {
        let t = example_tree(1);
        let ct = make_contab(&t, &[]).unwrap();
        assert_eq!(ct.num_cells(), 1);
        assert_eq!(ct.get(&[]), 6);
    }

    #[test]
    fn duplicate_attrs_rejected() {
        let t = example_tree(1);
        assert!(matches!(
            make_contab(&t, &[1, 1]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn conditional_table_matches_hand_counts() {
        let t = example_tree(1);
        let ct = make_contab_conditional(&t, &[0, 2], &q(&[(1, 3)])).unwrap();
        assert_eq!(ct.to_dense(DENSE_ROW_CAP).unwrap(), vec![2, 0, 2, 0]);

        let ct = make_contab_conditional(&t, &[2], &q(&[(0, 2)])).unwrap();
        assert_eq!(ct.get(&[1]), 2);
        assert_eq!(ct.get(&[2]), 1);
    }

    #[test]
    fn condition_matching_nothing_gives_empty_table() {
        let t = example_tree(1);
        let ct = make_contab_conditional(&t, &[0], &q(&[(1, 2)])).unwrap();
        assert_eq!(ct.num_cells(), 0);
        assert_eq!(ct.to_dense(DENSE_ROW_CAP).unwrap(), vec![0, 0]);
    }

    #[test]
    fn overlapping_condition_rejected() {
        let t = example_tree(1);
        assert!(matches!(
            make_contab_conditional(&t, &[1], &q(&[(1, 3)])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn subtraction_recovers_pruned_table() {
        let t = example_tree(1);
        let full = make_contab(&t, &[2]).unwrap();
        let given_a1_2 = make_contab_conditional(&t, &[2], &q(&[(0, 2)])).unwrap();
        let diff = ct_subtract(&full, &given_a1_2).unwrap();
        assert_eq!(diff.get(&[1]), 3);
        assert_eq!(diff.num_cells(), 1); // the zero cell for a3=2 is dropped
    }

    #[test]
    fn subtract_self_is_empty() {
        let t = example_tree(1);
        let ct = make_contab(&t, &[0, 1]).unwrap();
        assert_eq!(ct_subtract(&ct, &ct).unwrap().num_cells(), 0);
    }

    #[test]
    fn subtract_mismatched_attrs_rejected() {
        let t = example_tree(1);
        let a = make_contab(&t, &[0]).unwrap();
        let b = make_contab(&t, &[1]).unwrap();
        assert!(matches!(ct_subtract(&a, &b), Err(Error::Argument(_))));
    }

    #[test]
    #[should_panic(expected = "negative cell")]
    fn subtract_underflow_panics() {
        let t = example_tree(1);
        let small = make_contab_conditional(&t, &[2], &q(&[(0, 2)])).unwrap();
        let full = make_contab(&t, &[2]).unwrap();
        let _ = ct_subtract(&small, &full);
    }

    #[test]
    fn dense_render_ct_a2() {
        let t = example_tree(1);
        let ct = make_contab(&t, &[1]).unwrap();
        assert_eq!(ct.to_dense(DENSE_ROW_CAP).unwrap(), vec![1, 0, 4, 1]);
    }

    #[test]
    fn dense_render_empty_table() {
        let t = example_tree(1);
        let ct = make_contab_conditional(&t, &[0], &q(&[(1, 2)])).unwrap();
        assert_eq!(ct.to_dense(DENSE_ROW_CAP).unwrap(), vec![0, 0]);
    }

    #[test]
    fn dense_cap_enforced() {
        let t = example_tree(1);
        let ct = make_contab(&t, &[0, 1, 2]).unwrap();
        assert!(matches!(ct.to_dense(8), Err(Error::Size(_))));
    }

    #[test]
    fn marginalization_matches_smaller_table() {
        let t = example_tree(1);
        let big = make_contab(&t, &[0, 1, 2]).unwrap();
        for &drop in &[0usize, 1, 2] {
            let small = make_contab(
                &t,
                &(0..3).filter(|&a| a != drop).collect::<Vec<_>>(),
            )
            .unwrap();
            assert_eq!(big.marginalize(drop).unwrap(), small);
        }
    }

    #[test]
    fn leaf_list_trees_agree_with_full_expansion() {
        let d = testdata::random_dataset(6, 3, 120, 0x51ee).into_arc();
        let full = AdTree::build(Arc::clone(&d), 1).unwrap();
        for r_min in [4u64, 16, 64] {
            let t = AdTree::build(Arc::clone(&d), r_min).unwrap();
            for attrs in [vec![0], vec![1, 3], vec![0, 2, 4], vec![2, 3, 5]] {
                assert_eq!(
                    make_contab(&t, &attrs).unwrap(),
                    make_contab(&full, &attrs).unwrap(),
                    "r_min {r_min}, attrs {attrs:?}"
                );
            }
        }
    }

    #[test]
    fn cost_formula_golden_values() {
        assert_eq!(contab_cost(0, 7).unwrap(), 1);
        assert_eq!(contab_cost(3, 2).unwrap(), 16);
        assert_eq!(contab_cost(2, 3).unwrap(), 15);
    }

    #[test]
    fn cost_closed_form_satisfies_recurrence_step() {
        for n in 2..=10u32 {
            for k in 2..=5 {
                assert_eq!(
                    contab_cost(n, k).unwrap(),
                    contab_cost_step(contab_cost(n - 1, k).unwrap(), n, k).unwrap(),
                    "n={n} k={k}"
                );
            }
        }
    }
}
