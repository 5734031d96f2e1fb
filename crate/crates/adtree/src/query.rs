//! Conjunctive equality queries over categorical attributes.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// An ordered conjunction of `(attribute = value)` terms.
///
/// Attribute indices are 0-based and strictly increasing; value codes are
/// 1-based. The empty query matches every record.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    terms: Vec<(usize, u32)>,
}

impl Query {
    pub fn empty() -> Self {
        Query { terms: Vec::new() }
    }

    /// Builds a query from terms, requiring strictly increasing attribute
    /// indices.
    pub fn new(terms: Vec<(usize, u32)>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::Query(format!(
                    "attribute indices must be strictly increasing, got a{} before a{}",
                    w[0].0 + 1,
                    w[1].0 + 1
                )));
            }
        }
        Ok(Query { terms })
    }

    /// Builds a query from terms in any order, sorting by attribute index.
    /// Duplicate attributes are rejected.
    pub fn from_unsorted(mut terms: Vec<(usize, u32)>) -> Result<Self> {
        terms.sort_by_key(|&(a, _)| a);
        Query::new(terms)
    }

    pub fn terms(&self) -> &[(usize, u32)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn attrs(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|&(a, _)| a)
    }

    /// Checks each term against a schema's arities.
    pub fn validate(&self, arities: &[u32]) -> Result<()> {
        for &(attr, value) in &self.terms {
            if attr >= arities.len() {
                return Err(Error::Query(format!(
                    "attribute index {} out of range (M = {})",
                    attr + 1,
                    arities.len()
                )));
            }
            if value < 1 || value > arities[attr] {
                return Err(Error::Query(format!(
                    "value {} out of range for a{} (arity {})",
                    value,
                    attr + 1,
                    arities[attr]
                )));
            }
        }
        Ok(())
    }

    pub fn matches(&self, record: &[u32]) -> bool {
        self.terms.iter().all(|&(a, v)| record[a] == v)
    }

    /// Parses the CLI query grammar `name=value(,name=value)*`.
    ///
    /// Names are resolved through the dataset header and values through its
    /// value maps. The positional form `@i=c` takes a 1-based attribute index
    /// and a raw value code.
    pub fn parse(text: &str, dataset: &Dataset) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Query::empty());
        }
        let mut terms = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            let (lhs, rhs) = part
                .split_once('=')
                .ok_or_else(|| Error::Query(format!("expected name=value, got `{part}`")))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            let (attr, value) = if let Some(idx) = lhs.strip_prefix('@') {
                let i: usize = idx
                    .parse()
                    .map_err(|_| Error::Query(format!("bad attribute index `{lhs}`")))?;
                if i < 1 || i > dataset.num_attrs() {
                    return Err(Error::Query(format!(
                        "attribute index {i} out of range (M = {})",
                        dataset.num_attrs()
                    )));
                }
                let code: u32 = rhs
                    .parse()
                    .map_err(|_| Error::Query(format!("bad value code `{rhs}`")))?;
                (i - 1, code)
            } else {
                let attr = dataset
                    .attr_index(lhs)
                    .ok_or_else(|| Error::Query(format!("unknown attribute `{lhs}`")))?;
                let code = dataset
                    .code_for(attr, rhs)
                    .ok_or_else(|| Error::Query(format!("unknown value `{rhs}` for `{lhs}`")))?;
                (attr, code)
            };
            terms.push((attr, value));
        }
        let q = Query::from_unsorted(terms)?;
        q.validate(dataset.arities())?;
        Ok(q)
    }
}
