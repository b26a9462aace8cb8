//! Exact LSP re-creation: choose a path for every requested LSP so that the
//! reservations crossing each link fit within `mu` times its bandwidth,
//! every path meets its delay budget, and the link-to-LSP incidence changes
//! as little as possible (element-wise `|LR - LR_old|`).
//!
//! Candidate paths come from [`enumerate_simple_paths`], so the source,
//! sink, conservation and loop-freedom conditions hold by construction.
//! A branch-and-bound then searches the cross product of candidates.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::flow_rerouting::EPS;
use crate::lsp::LspRouting;
use crate::topology::{LinkIdx, NetworkTopology, NodeId, OrdF64};

pub const DEFAULT_PATH_LIMIT: usize = 200;
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

/// Simple paths in `(delay, hops, node sequence)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnumeration {
    pub paths: Vec<Vec<NodeId>>,
    /// More delay-feasible paths may exist beyond `limit`.
    pub truncated: bool,
}

/// Best-first enumeration of simple `src -> dst` paths with total delay at
/// most `delay_budget`, stopping after `limit` paths.
///
/// Extending a partial path never decreases its `(delay, hops, sequence)`
/// key, so paths leave the queue already in output order.
pub fn enumerate_paths(
    topo: &NetworkTopology,
    src: NodeId,
    dst: NodeId,
    delay_budget: f64,
    limit: usize,
) -> PathEnumeration {
    let mut paths = Vec::new();
    if src == dst || limit == 0 {
        return PathEnumeration {
            paths,
            truncated: false,
        };
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), 0usize, vec![src.0])));
    while let Some(Reverse((OrdF64(delay), hops, path))) = heap.pop() {
        let tail = NodeId(*path.last().unwrap());
        if tail == dst {
            paths.push(path.into_iter().map(NodeId).collect());
            if paths.len() == limit {
                return PathEnumeration {
                    paths,
                    truncated: !heap.is_empty(),
                };
            }
            continue;
        }
        for l in topo.out_links(tail) {
            let d = delay + l.prop_delay;
            if d > delay_budget + EPS || path.contains(&l.dst.0) {
                continue;
            }
            let mut next = path.clone();
            next.push(l.dst.0);
            heap.push(Reverse((OrdF64(d), hops + 1, next)));
        }
    }
    PathEnumeration {
        paths,
        truncated: false,
    }
}

pub fn enumerate_simple_paths(
    topo: &NetworkTopology,
    src: NodeId,
    dst: NodeId,
    delay_budget: f64,
    limit: usize,
) -> Vec<Vec<NodeId>> {
    enumerate_paths(topo, src, dst, delay_budget, limit).paths
}

/// One LSP to be (re-)routed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LspRequest {
    pub src: NodeId,
    pub dst: NodeId,
    pub capacity: f64,
    /// Tolerable end-to-end propagation delay of the LSP.
    pub max_delay: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecreationProblem<'a> {
    #[serde(skip)]
    pub topology: &'a NetworkTopology,
    pub requests: Vec<LspRequest>,
    /// Current paths; an empty path marks a brand-new LSP.
    pub lr_old: LspRouting,
    pub mu: f64,
    pub path_limit: usize,
    pub node_budget: u64,
}

impl<'a> RecreationProblem<'a> {
    pub fn new(
        topology: &'a NetworkTopology,
        requests: Vec<LspRequest>,
        lr_old: LspRouting,
        mu: f64,
    ) -> Self {
        Self {
            topology,
            requests,
            lr_old,
            mu,
            path_limit: DEFAULT_PATH_LIMIT,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecreationSolution {
    pub lr_new: LspRouting,
    pub changed_entries: usize,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecreationError {
    #[error("LSP re-creation is infeasible: {0}")]
    Infeasible(String),
    #[error("node budget of {0} exhausted before any feasible routing was found")]
    BudgetExhausted(u64),
    #[error("malformed re-creation problem: {0}")]
    Malformed(String),
}

struct Candidate {
    path: Vec<NodeId>,
    links: Vec<LinkIdx>,
    cost: usize,
}

struct Search {
    caps: Vec<f64>,
    cands: Vec<Vec<Candidate>>,
    order: Vec<usize>,
    link_caps: Vec<f64>,
    budget: u64,

    link_load: Vec<f64>,
    choice: Vec<usize>,
    best: Option<(usize, Vec<usize>)>,
    nodes: u64,
    aborted: bool,
}

impl Search {
    fn fits(&self, links: &[LinkIdx], cap: f64) -> bool {
        links.iter().all(|&l| {
            self.link_load[l] + cap <= self.link_caps[l] + EPS * self.link_caps[l].max(1.0)
        })
    }

    /// Cheapest still-fitting candidate of every remaining LSP, or `None`
    /// when some LSP has no fitting candidate left.
    fn lower_bound(&self, depth: usize) -> Option<usize> {
        let mut lb = 0;
        for &i in &self.order[depth..] {
            // candidates are sorted by cost
            let c = self.cands[i].iter().find(|c| self.fits(&c.links, self.caps[i]))?;
            lb += c.cost;
        }
        Some(lb)
    }

    fn dfs(&mut self, depth: usize, cost: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let Some(lb) = self.lower_bound(depth) else {
            return;
        };
        if let Some((best, _)) = &self.best {
            if cost + lb >= *best {
                return;
            }
        }
        if depth == self.order.len() {
            self.best = Some((cost, self.choice.clone()));
            return;
        }
        let i = self.order[depth];
        for k in 0..self.cands[i].len() {
            if !self.fits(&self.cands[i][k].links, self.caps[i]) {
                continue;
            }
            let cap = self.caps[i];
            for &l in &self.cands[i][k].links {
                self.link_load[l] += cap;
            }
            self.choice[i] = k;
            let c = self.cands[i][k].cost;
            self.dfs(depth + 1, cost + c);
            for &l in &self.cands[i][k].links {
                self.link_load[l] -= cap;
            }
            if self.aborted {
                return;
            }
        }
    }
}

pub fn solve_lsp_recreation(
    p: &RecreationProblem<'_>,
) -> Result<RecreationSolution, RecreationError> {
    let topo = p.topology;
    let n = p.requests.len();
    if p.lr_old.lsp_count() != n {
        return Err(RecreationError::Malformed(format!(
            "lr_old has {} LSPs for {n} requests",
            p.lr_old.lsp_count()
        )));
    }
    if !(p.mu > 0.0 && p.mu <= 1.0) {
        return Err(RecreationError::Malformed(format!("mu = {} is outside (0, 1]", p.mu)));
    }
    let link_caps: Vec<f64> = topo.links().iter().map(|l| p.mu * l.bandwidth).collect();

    let mut truncated = false;
    let mut cands = Vec::with_capacity(n);
    for (i, r) in p.requests.iter().enumerate() {
        if r.capacity.is_nan() || r.capacity <= 0.0 || r.src == r.dst {
            return Err(RecreationError::Malformed(format!(
                "request {i} ({} -> {}, capacity {}) is not a valid LSP",
                r.src, r.dst, r.capacity
            )));
        }
        let old = p.lr_old.link_set(i);
        let found = enumerate_paths(topo, r.src, r.dst, r.max_delay, p.path_limit);
        truncated |= found.truncated;
        let mut list: Vec<Candidate> = found
            .paths
            .into_iter()
            .map(|path| {
                let pairs: HashSet<(NodeId, NodeId)> =
                    path.windows(2).map(|w| (w[0], w[1])).collect();
                let links = path
                    .windows(2)
                    .map(|w| topo.link_index(w[0], w[1]).expect("enumerated link exists"))
                    .collect();
                Candidate {
                    cost: pairs.symmetric_difference(&old).count(),
                    path,
                    links,
                }
            })
            .filter(|c| c.links.iter().all(|&l| r.capacity <= link_caps[l] + EPS))
            .collect();
        if list.is_empty() {
            return Err(RecreationError::Infeasible(format!(
                "LSP {i} ({} -> {}) has no path within delay {} that can hold capacity {}",
                r.src, r.dst, r.max_delay, r.capacity
            )));
        }
        // stable: ties keep enumeration order
        list.sort_by_key(|c| c.cost);
        cands.push(list);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        p.requests[b]
            .capacity
            .total_cmp(&p.requests[a].capacity)
            .then(a.cmp(&b))
    });

    let mut s = Search {
        caps: p.requests.iter().map(|r| r.capacity).collect(),
        cands,
        order,
        link_load: vec![0.0; link_caps.len()],
        link_caps,
        budget: p.node_budget,
        choice: vec![0; n],
        best: None,
        nodes: 0,
        aborted: false,
    };
    s.dfs(0, 0);

    match s.best {
        Some((cost, choice)) => {
            let paths = choice
                .iter()
                .enumerate()
                .map(|(i, &k)| s.cands[i][k].path.clone())
                .collect();
            Ok(RecreationSolution {
                lr_new: LspRouting {
                    node_count: topo.node_count(),
                    paths,
                },
                changed_entries: cost,
                optimal: !s.aborted && (!truncated || cost == 0),
                nodes: s.nodes,
            })
        }
        None if s.aborted => Err(RecreationError::BudgetExhausted(p.node_budget)),
        None => Err(RecreationError::Infeasible(
            "no combination of candidate paths fits the link capacities".into(),
        )),
    }
}
