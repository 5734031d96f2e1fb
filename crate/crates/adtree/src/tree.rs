//! The sparse count tree with most-common-value pruning and leaf-lists.
//!
//! The tree alternates count nodes ([`AdNode`]) and per-attribute child
//! structures ([`VaryNode`]). A count node for a query over attributes up to
//! `a_j` carries one vary node for each of `a_{j+1}..a_M`; a vary node for
//! `a_j` keeps one child per value of `a_j` except its most common value
//! (MCV), whose subtree is omitted and recovered by subtraction at query
//! time. Zero-count children are never stored. Nodes matching fewer than
//! `r_min` records keep a list of record indices instead of expanding.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdNode {
    pub(crate) count: u64,
    pub(crate) body: NodeBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum NodeBody {
    /// Vary nodes for consecutive attributes starting one past the attribute
    /// this node's parent varied (all of `a_1..a_M` at the root).
    Expanded(Vec<VaryNode>),
    /// Indices of the matching records; used when `0 < count < r_min`, and
    /// for the count-0 root of an empty dataset.
    LeafList(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VaryNode {
    pub(crate) attr: usize,
    pub(crate) mcv: u32,
    /// One slot per value code; `children[mcv-1]` is always `None`, as is any
    /// value matching zero records.
    pub(crate) children: Vec<Option<AdNode>>,
}

impl AdNode {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_leaf_list(&self) -> bool {
        matches!(self.body, NodeBody::LeafList(_))
    }

    pub fn leaf_list(&self) -> Option<&[u32]> {
        match &self.body {
            NodeBody::LeafList(rows) => Some(rows),
            NodeBody::Expanded(_) => None,
        }
    }

    pub fn vary_nodes(&self) -> &[VaryNode] {
        match &self.body {
            NodeBody::Expanded(varys) => varys,
            NodeBody::LeafList(_) => &[],
        }
    }

    /// The vary node for attribute `attr`, if this node is expanded and
    /// covers it.
    pub fn vary(&self, attr: usize) -> Option<&VaryNode> {
        let varys = self.vary_nodes();
        let first = varys.first()?.attr;
        varys.get(attr.checked_sub(first)?)
    }
}

impl VaryNode {
    pub fn attr(&self) -> usize {
        self.attr
    }

    pub fn mcv(&self) -> u32 {
        self.mcv
    }

    /// Child for value code `v` (1-based); `None` for the MCV and for values
    /// matching zero records.
    pub fn child(&self, v: u32) -> Option<&AdNode> {
        self.children[v as usize - 1].as_ref()
    }

    pub fn children(&self) -> impl Iterator<Item = (u32, &AdNode)> {
        self.children
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|n| (i as u32 + 1, n)))
    }
}

pub struct AdTree {
    pub(crate) root: AdNode,
    pub(crate) r_min: u64,
    pub(crate) dataset: Arc<Dataset>,
    build_time: Duration,
}

impl AdTree {
    /// Builds the tree eagerly over the whole dataset.
    ///
    /// Most-common-value ties break toward the smallest value code, so two
    /// builds of the same dataset are structurally identical. `r_min = 1`
    /// disables leaf-lists.
    pub fn build(dataset: Arc<Dataset>, r_min: u64) -> Result<AdTree> {
        if r_min < 1 {
            return Err(Error::Argument("r_min must be at least 1".into()));
        }
        let start = Instant::now();
        let rows: Vec<u32> = (0..dataset.num_records() as u32).collect();
        let root = make_adnode(&dataset, rows, 0, r_min);
        Ok(AdTree {
            root,
            r_min,
            dataset,
            build_time: start.elapsed(),
        })
    }

    pub fn root(&self) -> &AdNode {
        &self.root
    }

    pub fn r_min(&self) -> u64 {
        self.r_min
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn num_attrs(&self) -> usize {
        self.dataset.num_attrs()
    }

    pub fn arities(&self) -> &[u32] {
        self.dataset.arities()
    }

    pub fn num_records(&self) -> u64 {
        self.dataset.num_records() as u64
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    pub fn stats(&self) -> TreeStats {
        let mut s = TreeStats {
            ad_nodes: 0,
            vary_nodes: 0,
            leaf_lists: 0,
            leaf_list_entries: 0,
            estimated_bytes: 0,
            r_min: self.r_min,
            build_time_secs: self.build_time.as_secs_f64(),
            child_slots: 0,
        };
        walk_stats(&self.root, &mut s);
        s.estimated_bytes = s.ad_nodes * TreeStats::AD_NODE_BYTES
            + s.vary_nodes * TreeStats::VARY_NODE_BYTES
            + s.child_slots_estimate()
            + s.leaf_list_entries * TreeStats::LEAF_ENTRY_BYTES;
        s
    }

    /// Depth-first check of every structural invariant: counts match the
    /// implicit query, the MCV slot is empty, no zero-count node exists (save
    /// the count-0 root of an empty dataset), leaf-lists appear exactly when
    /// `0 < count < r_min`, and each listed record matches its node's query.
    pub fn validate_structure(&self) -> Result<()> {
        let mut query: Vec<(usize, u32)> = Vec::new();
        validate_node(self, &self.root, &mut query, true)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let container = self.to_container();
        serde_json::to_writer(std::io::BufWriter::new(file), &container)
            .map_err(|e| Error::Io(e.into()))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, dataset: Arc<Dataset>) -> Result<AdTree> {
        let file = std::fs::File::open(path)?;
        let container: TreeContainer = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::Format {
                row: 0,
                msg: format!("tree file: {e}"),
            })?;
        AdTree::from_container(container, dataset)
    }

    fn to_container(&self) -> TreeContainer {
        let mut nodes = Vec::new();
        flatten(&self.root, &mut nodes);
        TreeContainer {
            version: FORMAT_VERSION,
            num_attrs: self.num_attrs(),
            arities: self.arities().to_vec(),
            num_records: self.num_records(),
            r_min: self.r_min,
            dataset_checksum: self.dataset.checksum(),
            nodes,
        }
    }

    fn from_container(c: TreeContainer, dataset: Arc<Dataset>) -> Result<AdTree> {
        if c.version != FORMAT_VERSION {
            return Err(Error::Integrity(format!(
                "unsupported tree format version {}",
                c.version
            )));
        }
        if c.num_attrs != dataset.num_attrs()
            || c.arities != dataset.arities()
            || c.num_records != dataset.num_records() as u64
            || c.dataset_checksum != dataset.checksum()
        {
            return Err(Error::Integrity(
                "tree was built from a different dataset (schema or checksum mismatch)".into(),
            ));
        }
        let mut cursor = 0usize;
        let root = unflatten(&c.nodes, &mut cursor, &c.arities)?;
        if cursor != c.nodes.len() {
            return Err(Error::Integrity(format!(
                "tree file has {} trailing node records",
                c.nodes.len() - cursor
            )));
        }
        Ok(AdTree {
            root,
            r_min: c.r_min,
            dataset,
            build_time: Duration::ZERO,
        })
    }
}

fn make_adnode(ds: &Dataset, rows: Vec<u32>, first_attr: usize, r_min: u64) -> AdNode {
    let count = rows.len() as u64;
    if count < r_min {
        return AdNode {
            count,
            body: NodeBody::LeafList(rows),
        };
    }
    let varys = (first_attr..ds.num_attrs())
        .map(|j| make_varynode(ds, &rows, j, r_min))
        .collect();
    AdNode {
        count,
        body: NodeBody::Expanded(varys),
    }
}

fn make_varynode(ds: &Dataset, rows: &[u32], attr: usize, r_min: u64) -> VaryNode {
    let arity = ds.arity(attr) as usize;
    let mut child_rows: Vec<Vec<u32>> = vec![Vec::new(); arity];
    for &r in rows {
        let v = ds.record(r as usize)[attr] as usize;
        child_rows[v - 1].push(r);
    }
    // argmax over child sizes; ties toward the smallest value code
    let mcv = child_rows
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i as u32 + 1)
        .unwrap_or(1);
    let children = child_rows
        .into_iter()
        .enumerate()
        .map(|(i, rs)| {
            if i as u32 + 1 == mcv || rs.is_empty() {
                None
            } else {
                Some(make_adnode(ds, rs, attr + 1, r_min))
            }
        })
        .collect();
    VaryNode {
        attr,
        mcv,
        children,
    }
}

fn walk_stats(node: &AdNode, s: &mut TreeStats) {
    s.ad_nodes += 1;
    match &node.body {
        NodeBody::LeafList(rows) => {
            s.leaf_lists += 1;
            s.leaf_list_entries += rows.len() as u64;
        }
        NodeBody::Expanded(varys) => {
            for vn in varys {
                s.vary_nodes += 1;
                s.child_slots += vn.children.len() as u64;
                for (_, child) in vn.children() {
                    walk_stats(child, s);
                }
            }
        }
    }
}

fn validate_node(
    tree: &AdTree,
    node: &AdNode,
    query: &mut Vec<(usize, u32)>,
    is_root: bool,
) -> Result<()> {
    let ds = &tree.dataset;
    let matching = ds
        .records()
        .iter()
        .filter(|r| query.iter().all(|&(a, v)| r[a] == v))
        .count() as u64;
    if node.count != matching {
        return Err(Error::Integrity(format!(
            "node {query:?} stores count {}, dataset has {matching}",
        node.count
        )));
    }
    if node.count == 0 && !is_root {
        return Err(Error::Integrity(format!("zero-count node at {query:?}")));
    }
    match &node.body {
        NodeBody::LeafList(rows) => {
            let legal = node.count < tree.r_min || (is_root && node.count == 0);
            if !legal {
                return Err(Error::Integrity(format!(
                    "leaf-list at {query:?} with count {} >= r_min {}",
                    node.count, tree.r_min
                )));
            }
            if rows.len() as u64 != node.count {
                return Err(Error::Integrity(format!(
                    "leaf-list length {} != count {} at {query:?}",
                    rows.len(),
                    node.count
                )));
            }
            for &r in rows {
                let rec = ds.record(r as usize);
                if !query.iter().all(|&(a, v)| rec[a] == v) {
                    return Err(Error::Integrity(format!(
                        "leaf-list row {r} does not match {query:?}"
                    )));
                }
            }
        }
        NodeBody::Expanded(varys) => {
            let first = query.last().map_or(0, |&(a, _)| a + 1);
            if varys.len() != ds.num_attrs() - first {
                return Err(Error::Integrity(format!(
                    "node {query:?} has {} vary nodes, expected {}",
                    varys.len(),
                    ds.num_attrs() - first
                )));
            }
            for (offset, vn) in varys.iter().enumerate() {
                let attr = first + offset;
                if vn.attr != attr {
                    return Err(Error::Integrity(format!(
                        "vary node at {query:?} varies a{}, expected a{}",
                        vn.attr + 1,
                        attr + 1
                    )));
                }
                if vn.children.len() != ds.arity(attr) as usize {
                    return Err(Error::Integrity(format!(
                        "vary a{} at {query:?} has {} slots, arity is {}",
                        attr + 1,
                        vn.children.len(),
                        ds.arity(attr)
                    )));
                }
                if vn
                    .children
                    .get(vn.mcv as usize - 1)
                    .map_or(true, |c| c.is_some())
                {
                    return Err(Error::Integrity(format!(
                        "MCV child present for vary a{} at {query:?}",
                        attr + 1
                    )));
                }
                let present: u64 = vn.children().map(|(_, c)| c.count).sum();
                let mcv_count = node.count - present;
                for (v, child) in vn.children() {
                    if child.count > mcv_count {
                        return Err(Error::Integrity(format!(
                            "child a{}={v} count {} exceeds recovered MCV count {mcv_count} at {query:?}",
                            attr + 1,
                            child.count
                        )));
                    }
                    query.push((attr, v));
                    validate_node(tree, child, query, false)?;
                    query.pop();
                }
            }
        }
    }
    Ok(())
}

/// Node and size report. The byte estimate uses a fixed accounting model
/// rather than allocator measurements: 16 bytes per count node, 16 per vary
/// node, 8 per vary child slot, and 4 per leaf-list entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeStats {
    pub ad_nodes: u64,
    pub vary_nodes: u64,
    pub leaf_lists: u64,
    pub leaf_list_entries: u64,
    pub estimated_bytes: u64,
    pub r_min: u64,
    pub build_time_secs: f64,
    #[serde(skip)]
    child_slots: u64,
}

impl TreeStats {
    pub const AD_NODE_BYTES: u64 = 16;
    pub const VARY_NODE_BYTES: u64 = 16;
    pub const CHILD_SLOT_BYTES: u64 = 8;
    pub const LEAF_ENTRY_BYTES: u64 = 4;

    fn child_slots_estimate(&self) -> u64 {
        self.child_slots * Self::CHILD_SLOT_BYTES
    }
}

const FORMAT_VERSION: u32 = 1;

/// On-disk container: header plus the nodes in preorder. Children follow
/// their parent ordered by vary attribute, then ascending value code.
#[derive(Serialize, Deserialize)]
struct TreeContainer {
    version: u32,
    num_attrs: usize,
    arities: Vec<u32>,
    num_records: u64,
    r_min: u64,
    dataset_checksum: u64,
    nodes: Vec<NodeRec>,
}

#[derive(Serialize, Deserialize)]
struct NodeRec {
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    leaf: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    varys: Vec<VaryRec>,
}

#[derive(Serialize, Deserialize)]
struct VaryRec {
    attr: usize,
    mcv: u32,
    /// Value codes with a present child, ascending.
    values: Vec<u32>,
}

fn flatten(node: &AdNode, out: &mut Vec<NodeRec>) {
    match &node.body {
        NodeBody::LeafList(rows) => out.push(NodeRec {
            count: node.count,
            leaf: Some(rows.clone()),
            varys: Vec::new(),
        }),
        NodeBody::Expanded(varys) => {
            out.push(NodeRec {
                count: node.count,
                leaf: None,
                varys: varys
                    .iter()
                    .map(|vn| VaryRec {
                        attr: vn.attr,
                        mcv: vn.mcv,
                        values: vn.children().map(|(v, _)| v).collect(),
                    })
                    .collect(),
            });
            for vn in varys {
                for (_, child) in vn.children() {
                    flatten(child, out);
                }
            }
        }
    }
}

fn unflatten(nodes: &[NodeRec], cursor: &mut usize, arities: &[u32]) -> Result<AdNode> {
    let rec = nodes
        .get(*cursor)
        .ok_or_else(|| Error::Integrity("tree file truncated".into()))?;
    *cursor += 1;
    if let Some(rows) = &rec.leaf {
        return Ok(AdNode {
            count: rec.count,
            body: NodeBody::LeafList(rows.clone()),
        });
    }
    let mut varys = Vec::with_capacity(rec.varys.len());
    for vr in &rec.varys {
        let arity = *arities
            .get(vr.attr)
            .ok_or_else(|| Error::Integrity(format!("vary attribute {} out of range", vr.attr)))?
            as usize;
        let mut children: Vec<Option<AdNode>> = (0..arity).map(|_| None).collect();
        for &v in &vr.values {
            if v < 1 || v as usize > arity || v == vr.mcv {
                return Err(Error::Integrity(format!(
                    "illegal child value {v} for vary a{}",
                    vr.attr + 1
                )));
            }
            children[v as usize - 1] = Some(unflatten(nodes, cursor, arities)?);
        }
        varys.push(VaryNode {
            attr: vr.attr,
            mcv: vr.mcv,
            children,
        });
    }
    Ok(AdNode {
        count: rec.count,
        body: NodeBody::Expanded(varys),
    })
}
