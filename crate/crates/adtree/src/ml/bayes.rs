//! Bayes-net structure scoring and random-restart stochastic hill climbing.
//!
//! Structures are kept acyclic by construction: every network carries a
//! total order over the attributes and edges only run from earlier to later
//! positions. The swap move exchanges two positions and reverses any edge
//! the new order invalidates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ml::Counter;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BayesNet {
    /// A permutation of the attribute indices.
    order: Vec<usize>,
    /// `parents[j]` lists node j's parents, sorted ascending; all must sit
    /// earlier in `order`.
    parents: Vec<Vec<usize>>,
}

impl BayesNet {
    /// The edgeless network over `m` attributes in index order.
    pub fn empty(m: usize) -> Self {
        BayesNet {
            order: (0..m).collect(),
            parents: vec![Vec::new(); m],
        }
    }

    pub fn with_order(order: Vec<usize>) -> Self {
        let m = order.len();
        BayesNet {
            order,
            parents: vec![Vec::new(); m],
        }
    }

    pub fn num_attrs(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        let pos = self.positions();
        if pos[parent] >= pos[child] {
            return Err(Error::Argument(format!(
                "edge a{} -> a{} violates the node order",
                parent + 1,
                child + 1
            )));
        }
        match self.parents[child].binary_search(&parent) {
            Ok(_) => Err(Error::Argument("edge already present".into())),
            Err(i) => {
                self.parents[child].insert(i, parent);
                Ok(())
            }
        }
    }

    fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &node) in self.order.iter().enumerate() {
            pos[node] = p;
        }
        pos
    }

    /// Total probability-table entries: per node, its arity times the
    /// product of its parents' arities.
    pub fn n_params(&self, arities: &[u32]) -> u64 {
        (0..self.order.len())
            .map(|j| node_params(j, &self.parents[j], arities))
            .sum()
    }

    /// Checks that every edge runs from earlier to later in the order.
    pub fn is_order_consistent(&self) -> bool {
        let pos = self.positions();
        self.parents
            .iter()
            .enumerate()
            .all(|(child, ps)| ps.iter().all(|&p| pos[p] < pos[child]))
    }
}

fn node_params(node: usize, parents: &[usize], arities: &[u32]) -> u64 {
    let mut n = arities[node] as u64;
    for &p in parents {
        n *= arities[p] as u64;
    }
    n
}

/// One node's maximum-likelihood conditional probability table. Parent
/// assignments matching zero records have no row.
#[derive(Clone, Debug, Serialize)]
pub struct ProbTable {
    pub attr: usize,
    pub parents: Vec<usize>,
    /// Parent assignment tuple (over `parents`, ascending) to the
    /// distribution over the node's values.
    pub rows: BTreeMap<Vec<u32>, Vec<f64>>,
}

pub fn bn_prob_tables(counter: &dyn Counter, net: &BayesNet) -> Result<Vec<ProbTable>> {
    (0..net.num_attrs())
        .map(|j| node_prob_table(counter, j, net.parents(j)))
        .collect()
}

fn node_prob_table(counter: &dyn Counter, node: usize, parents: &[usize]) -> Result<ProbTable> {
    let mut attrs = parents.to_vec();
    attrs.push(node);
    attrs.sort_unstable();
    let table = counter.contab(&attrs)?;
    let arity = counter.arities()[node] as usize;
    let mut rows = BTreeMap::new();
    for (asgn, values) in table.group_by(node)? {
        let support: u64 = values.iter().map(|&(_, c)| c).sum();
        let mut dist = vec![0.0; arity];
        for (v, c) in values {
            dist[v as usize - 1] = c as f64 / support as f64;
        }
        rows.insert(asgn, dist);
    }
    Ok(ProbTable {
        attr: node,
        parents: parents.to_vec(),
        rows,
    })
}

/// One node's contribution to the log-likelihood term, in nats:
/// `sum over cells of C(node = v, asgn) * ln(C(node = v, asgn) / C(asgn))`.
fn node_loglik(counter: &dyn Counter, node: usize, parents: &[usize]) -> Result<f64> {
    let mut attrs = parents.to_vec();
    attrs.push(node);
    attrs.sort_unstable();
    let table = counter.contab(&attrs)?;
    let mut ll = 0.0;
    for (_, values) in table.group_by(node)? {
        let support: u64 = values.iter().map(|&(_, c)| c).sum();
        for (_, c) in values {
            // stored cells are never zero, so 0 ln 0 never arises here
            ll += c as f64 * (c as f64 / support as f64).ln();
        }
    }
    Ok(ll)
}

/// Penalized log-likelihood of the structure under maximum-likelihood
/// tables, natural logarithm: the data log-likelihood minus
/// `N_params ln(R) / 2`.
pub fn bn_score(counter: &dyn Counter, net: &BayesNet) -> Result<f64> {
    let r = counter.num_records();
    if r == 0 {
        return Err(Error::Argument(
            "structure scoring requires at least one record".into(),
        ));
    }
    let mut ll = 0.0;
    for j in 0..net.num_attrs() {
        ll += node_loglik(counter, j, net.parents(j))?;
    }
    Ok(score_from_parts(ll, net.n_params(counter.arities()), r))
}

fn score_from_parts(loglik: f64, n_params: u64, r: u64) -> f64 {
    -(n_params as f64) * (r as f64).ln() / 2.0 + loglik
}

#[derive(Clone, Debug)]
pub struct HillClimbConfig {
    pub iterations: u64,
    pub restarts: u32,
    pub seed: u64,
    /// Per-node parent-count cap; moves that would exceed it are rejected.
    pub max_parents: usize,
}

impl Default for HillClimbConfig {
    fn default() -> Self {
        HillClimbConfig {
            iterations: 1000,
            restarts: 1,
            seed: 0,
            max_parents: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HillClimbResult {
    pub best: BayesNet,
    pub best_score: f64,
    /// Per restart: the initial score followed by the score after each
    /// accepted move.
    pub traces: Vec<Vec<f64>>,
}

/// Random-restart stochastic hill climbing over structures. Each step draws
/// one move uniformly from {add edge, remove edge, swap order positions} and
/// keeps it only on strict score improvement. Per-node likelihood terms are
/// cached, so a step recomputes tables only for nodes whose parent sets
/// changed. Deterministic for a fixed seed.
pub fn bn_hill_climb(counter: &dyn Counter, cfg: &HillClimbConfig) -> Result<HillClimbResult> {
    let m = counter.num_attrs();
    if m < 2 {
        return Err(Error::Argument(
            "hill climbing needs at least two attributes".into(),
        ));
    }
    let mut best: Option<(BayesNet, f64)> = None;
    let mut traces = Vec::with_capacity(cfg.restarts.max(1) as usize);
    for restart in 0..cfg.restarts.max(1) {
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed ^ (restart as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let mut state = ClimbState::new(counter, restart, &mut rng)?;
        let mut trace = vec![state.score];
        for _ in 0..cfg.iterations {
            if state.try_move(counter, cfg.max_parents, &mut rng)? {
                trace.push(state.score);
            }
        }
        match &best {
            Some((_, s)) if *s >= state.score => {}
            _ => best = Some((state.net, state.score)),
        }
        traces.push(trace);
    }
    let (net, score) = best.expect("at least one restart runs");
    Ok(HillClimbResult {
        best: net,
        best_score: score,
        traces,
    })
}

struct ClimbState {
    net: BayesNet,
    /// Per-node log-likelihood contributions and parameter counts.
    logliks: Vec<f64>,
    params: Vec<u64>,
    score: f64,
    r: u64,
}

impl ClimbState {
    fn new(counter: &dyn Counter, restart: u32, rng: &mut ChaCha8Rng) -> Result<ClimbState> {
        let m = counter.num_attrs();
        let r = counter.num_records();
        if r == 0 {
            return Err(Error::Argument(
                "structure scoring requires at least one record".into(),
            ));
        }
        // the first restart starts from index order, later ones from fresh
        // random permutations
        let mut order: Vec<usize> = (0..m).collect();
        if restart > 0 {
            order.shuffle(rng);
        }
        let net = BayesNet::with_order(order);
        let logliks: Vec<f64> = (0..m)
            .map(|j| node_loglik(counter, j, &[]))
            .collect::<Result<_>>()?;
        let params: Vec<u64> = (0..m)
            .map(|j| node_params(j, &[], counter.arities()))
            .collect();
        let score = score_from_parts(logliks.iter().sum(), params.iter().sum(), r);
        Ok(ClimbState {
            net,
            logliks,
            params,
            score,
            r,
        })
    }

    /// Draws one move; returns whether it was accepted.
    fn try_move(
        &mut self,
        counter: &dyn Counter,
        max_parents: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<bool> {
        let m = self.net.num_attrs();
        let mut candidate = self.net.clone();
        let mut touched: Vec<usize> = Vec::new();
        match rng.gen_range(0..3u32) {
            // add a random order-respecting edge
            0 => {
                let i = rng.gen_range(0..m);
                let j = rng.gen_range(0..m - 1);
                let j = if j >= i { j + 1 } else { j };
                let (pi, pj) = (i.min(j), i.max(j));
                let parent = candidate.order[pi];
                let child = candidate.order[pj];
                if candidate.parents[child].contains(&parent)
                    || candidate.parents[child].len() >= max_parents
                {
                    return Ok(false);
                }
                candidate.add_edge(parent, child)?;
                touched.push(child);
            }
            // remove a random existing edge
            1 => {
                let edges: Vec<(usize, usize)> = (0..m)
                    .flat_map(|child| {
                        candidate.parents[child]
                            .iter()
                            .map(move |&p| (p, child))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                if edges.is_empty() {
                    return Ok(false);
                }
                let (parent, child) = edges[rng.gen_range(0..edges.len())];
                candidate.parents[child].retain(|&p| p != parent);
                touched.push(child);
            }
            // swap two order positions, reversing edges the new order breaks
            _ => {
                let i = rng.gen_range(0..m);
                let j = rng.gen_range(0..m - 1);
                let j = if j >= i { j + 1 } else { j };
                candidate.order.swap(i, j);
                let pos = candidate.positions();
                let mut reversals = Vec::new();
                for child in 0..m {
                    for &parent in &candidate.parents[child] {
                        if pos[parent] > pos[child] {
                            reversals.push((parent, child));
                        }
                    }
                }
                for &(parent, child) in &reversals {
                    // reverse: child becomes the parent
                    if candidate.parents[parent].len() >= max_parents {
                        return Ok(false);
                    }
                    candidate.parents[child].retain(|&p| p != parent);
                    if let Err(i) = candidate.parents[parent].binary_search(&child) {
                        candidate.parents[parent].insert(i, child);
                    }
                    touched.push(parent);
                    touched.push(child);
                }
            }
        }
        debug_assert!(candidate.is_order_consistent());

        touched.sort_unstable();
        touched.dedup();
        let mut logliks = self.logliks.clone();
        let mut params = self.params.clone();
        for &j in &touched {
            logliks[j] = node_loglik(counter, j, candidate.parents(j))?;
            params[j] = node_params(j, candidate.parents(j), counter.arities());
        }
        let new_score = score_from_parts(logliks.iter().sum(), params.iter().sum(), self.r);
        if new_score > self.score {
            self.net = candidate;
            self.logliks = logliks;
            self.params = params;
            self.score = new_score;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}
