//! Cached counts for categorical datasets.
//!
//! This crate precomputes the counts needed to answer arbitrary conjunctive
//! `(attribute = value)` queries and to build contingency tables over any
//! attribute subset, in time independent of the number of records. The
//! cache is a sparse all-dimensions tree: zero counts are never stored, the
//! subtree for each attribute's most common value is omitted and recovered
//! by subtraction, and nodes matching fewer than `r_min` records keep a
//! record-index list instead of expanding.
//!
//! On top of the tree sit three reference consumers (information-gain
//! feature selection, Bayes-net structure search, conjunctive rule search),
//! a linear-scan oracle used for verification and benchmark baselines, and
//! analytic size bounds for the binary-attribute case.
//!
//! ```
//! use adtree::{contab, AdTree, Query};
//!
//! let dataset = adtree::testdata::worked_example().into_arc();
//! let tree = AdTree::build(dataset, 1).unwrap();
//! let q = Query::new(vec![(1, 3), (2, 1)]).unwrap();
//! assert_eq!(contab::count(&tree, &q).unwrap(), 4);
//! ```

pub mod bench;
pub mod bounds;
pub mod contab;
pub mod dataset;
pub mod error;
pub mod ml;
pub mod oracle;
pub mod query;
pub mod synth;
pub mod testdata;
pub mod tree;

pub use contab::ContingencyTable;
pub use dataset::{CsvOptions, Dataset};
pub use error::{Error, Result};
pub use query::Query;
pub use synth::{synth_generate, SynthConfig};
pub use tree::{AdTree, TreeStats};
