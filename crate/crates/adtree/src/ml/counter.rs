use crate::contab::{self, ContingencyTable};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::oracle;
use crate::query::Query;
use crate::tree::AdTree;

/// A counting backend: either the sparse tree or a plain linear scan.
pub trait Counter {
    fn num_attrs(&self) -> usize;
    fn arities(&self) -> &[u32];
    fn num_records(&self) -> u64;
    fn count(&self, q: &Query) -> Result<u64>;
    fn contab(&self, attrs: &[usize]) -> Result<ContingencyTable>;
}

impl Counter for AdTree {
    fn num_attrs(&self) -> usize {
        AdTree::num_attrs(self)
    }

    fn arities(&self) -> &[u32] {
        AdTree::arities(self)
    }

    fn num_records(&self) -> u64 {
        AdTree::num_records(self)
    }

    fn count(&self, q: &Query) -> Result<u64> {
        contab::count(self, q)
    }

    fn contab(&self, attrs: &[usize]) -> Result<ContingencyTable> {
        contab::make_contab(self, attrs)
    }
}

impl Counter for Dataset {
    fn num_attrs(&self) -> usize {
        Dataset::num_attrs(self)
    }

    fn arities(&self) -> &[u32] {
        Dataset::arities(self)
    }

    fn num_records(&self) -> u64 {
        Dataset::num_records(self) as u64
    }

    fn count(&self, q: &Query) -> Result<u64> {
        oracle::linear_count(self, q)
    }

    fn contab(&self, attrs: &[usize]) -> Result<ContingencyTable> {
        oracle::linear_contab(self, attrs, &Query::empty())
    }
}
