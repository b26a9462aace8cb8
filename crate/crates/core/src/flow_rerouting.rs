//! Exact flow-to-LSP re-assignment with minimum reconfiguration.
//!
//! The program chooses one LSP per flow so that
//!
//! - the rates on every LSP stay within its reserved capacity,
//! - the LSP's propagation delay is within the flow's tolerable delay,
//! - the LSP starts and ends where the flow does,
//! - and, when LSPs do not reserve their resources
//!   ([`ReservationMode::Unreserved`]), the total rate on every link stays
//!   within `mu` times its bandwidth,
//!
//! while minimising the number of flows whose LSP changes.
//!
//! The solver is a depth-first branch-and-bound over flows in descending
//! rate order. Each flow tries its current LSP first, so the first leaf is
//! usually a good incumbent. Among equal-cost optima the lexicographically
//! smallest assignment vector (by flow id) is returned.

use serde::{Deserialize, Serialize};

use crate::lsp::{FlowAssignment, Lsp, LspId};
use crate::topology::{LinkIdx, NetworkTopology};
use crate::traffic::Flow;

pub(crate) const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReservationMode {
    /// Every LSP holds a reservation; only LSP capacities bind.
    #[default]
    Reserved,
    /// LSP capacities and per-link `mu * bandwidth` bounds both bind.
    Unreserved,
}

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct ReroutingProblem<'a> {
    #[serde(skip)]
    pub topology: &'a NetworkTopology,
    pub flows: &'a [Flow],
    pub lsps: &'a [Lsp],
    pub fr_old: &'a FlowAssignment,
    pub mode: ReservationMode,
    pub mu: f64,
    /// Search nodes explored before giving up on proving optimality.
    pub node_budget: u64,
}

impl<'a> ReroutingProblem<'a> {
    pub fn new(
        topology: &'a NetworkTopology,
        flows: &'a [Flow],
        lsps: &'a [Lsp],
        fr_old: &'a FlowAssignment,
    ) -> Self {
        Self {
            topology,
            flows,
            lsps,
            fr_old,
            mode: ReservationMode::Reserved,
            mu: 1.0,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_mode(mut self, mode: ReservationMode, mu: f64) -> Self {
        self.mode = mode;
        self.mu = mu;
        self
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReroutingSolution {
    pub fr_new: FlowAssignment,
    pub changes: usize,
    /// `true` when the search closed without hitting the node budget.
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReroutingError {
    #[error("flow re-routing is infeasible: {0}")]
    Infeasible(String),
    #[error("node budget of {0} exhausted before any feasible assignment was found")]
    BudgetExhausted(u64),
    #[error("malformed re-routing problem: {0}")]
    Malformed(String),
}

/// LSPs that may carry `flow`: matching endpoints and delay within budget.
pub(crate) fn endpoint_candidates(flow: &Flow, lsps: &[Lsp]) -> Vec<usize> {
    lsps.iter()
        .enumerate()
        .filter(|(_, l)| {
            l.src == flow.src && l.dst == flow.dst && l.prop_delay <= flow.max_delay + EPS
        })
        .map(|(i, _)| i)
        .collect()
}

struct Search {
    rates: Vec<f64>,
    old: Vec<usize>,
    // candidate LSPs per flow, current LSP first
    cands: Vec<Vec<usize>>,
    // flow indices in branching order
    order: Vec<usize>,
    // per LSP: branching positions of flows that may stay put
    stayers: Vec<Vec<usize>>,
    // flows forced to move (current LSP is not a candidate), suffix counts by position
    forced_suffix: Vec<usize>,
    caps: Vec<f64>,
    lsp_links: Vec<Vec<LinkIdx>>,
    link_caps: Vec<f64>,
    unreserved: bool,
    budget: u64,

    lsp_load: Vec<f64>,
    link_load: Vec<f64>,
    assign: Vec<Option<usize>>,
    best: Option<(usize, Vec<usize>)>,
    nodes: u64,
    aborted: bool,
}

impl Search {
    fn lower_bound(&self, depth: usize) -> usize {
        let mut lb = self.forced_suffix[depth];
        for (i, list) in self.stayers.iter().enumerate() {
            let start = list.partition_point(|&pos| pos < depth);
            let rest = &list[start..];
            if rest.is_empty() {
                continue;
            }
            let residual = self.caps[i] - self.lsp_load[i];
            let mut total: f64 = rest.iter().map(|&pos| self.rates[self.order[pos]]).sum();
            // positions are in descending-rate order: drop the largest first
            for &pos in rest {
                if total <= residual + EPS {
                    break;
                }
                total -= self.rates[self.order[pos]];
                lb += 1;
            }
        }
        lb
    }

    /// True when every completion of the partial assignment is
    /// lexicographically larger than the incumbent.
    fn lex_dominated(&self, incumbent: &[usize]) -> bool {
        for (f, a) in self.assign.iter().enumerate() {
            match a {
                None => return false,
                Some(l) if *l == incumbent[f] => continue,
                Some(l) => return *l > incumbent[f],
            }
        }
        true
    }

    fn fits(&self, lsp: usize, rate: f64) -> bool {
        if self.lsp_load[lsp] + rate > self.caps[lsp] + EPS * self.caps[lsp].max(1.0) {
            return false;
        }
        if self.unreserved {
            for &l in &self.lsp_links[lsp] {
                if self.link_load[l] + rate > self.link_caps[l] + EPS * self.link_caps[l].max(1.0)
                {
                    return false;
                }
            }
        }
        true
    }

    fn place(&mut self, f: usize, lsp: usize, sign: f64) {
        let r = sign * self.rates[f];
        self.lsp_load[lsp] += r;
        if self.unreserved {
            for &l in &self.lsp_links[lsp] {
                self.link_load[l] += r;
            }
        }
        self.assign[f] = if sign > 0.0 { Some(lsp) } else { None };
    }

    fn dfs(&mut self, depth: usize, changes: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if let Some((best, inc)) = &self.best {
            let bound = changes + self.lower_bound(depth);
            if bound > *best || (bound == *best && self.lex_dominated(inc)) {
                return;
            }
        }
        if depth == self.order.len() {
            let vec: Vec<usize> = self.assign.iter().map(|a| a.unwrap()).collect();
            let better = match &self.best {
                None => true,
                Some((b, inc)) => changes < *b || (changes == *b && vec < *inc),
            };
            if better {
                self.best = Some((changes, vec));
            }
            return;
        }
        let f = self.order[depth];
        for k in 0..self.cands[f].len() {
            let lsp = self.cands[f][k];
            if !self.fits(lsp, self.rates[f]) {
                continue;
            }
            let cost = usize::from(lsp != self.old[f]);
            self.place(f, lsp, 1.0);
            self.dfs(depth + 1, changes + cost);
            self.place(f, lsp, -1.0);
            if self.aborted {
                return;
            }
        }
    }
}

/// Solves the minimum-change re-assignment exactly (within the node budget).
pub fn solve_flow_rerouting(
    p: &ReroutingProblem<'_>,
) -> Result<ReroutingSolution, ReroutingError> {
    let n = p.flows.len();
    if p.fr_old.len() != n {
        return Err(ReroutingError::Malformed(format!(
            "fr_old has {} rows for {n} flows",
            p.fr_old.len()
        )));
    }
    if !(p.mu > 0.0 && p.mu <= 1.0) {
        return Err(ReroutingError::Malformed(format!("mu = {} is outside (0, 1]", p.mu)));
    }
    for (i, l) in p.lsps.iter().enumerate() {
        if l.id != LspId(i) {
            return Err(ReroutingError::Malformed(format!("LSP at index {i} has id {}", l.id)));
        }
    }
    let old: Vec<usize> = p.fr_old.0.iter().map(|l| l.0).collect();
    if let Some(bad) = old.iter().find(|&&l| l >= p.lsps.len()) {
        return Err(ReroutingError::Malformed(format!("fr_old references unknown LSP {bad}")));
    }

    let mut cands = Vec::with_capacity(n);
    for (f, flow) in p.flows.iter().enumerate() {
        let mut c = endpoint_candidates(flow, p.lsps);
        if c.is_empty() {
            return Err(ReroutingError::Infeasible(format!(
                "flow {} ({} -> {}) has no endpoint- and delay-compatible LSP",
                flow.id, flow.src, flow.dst
            )));
        }
        if let Some(pos) = c.iter().position(|&l| l == old[f]) {
            c.remove(pos);
            c.insert(0, old[f]);
        }
        cands.push(c);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p.flows[b].rate.total_cmp(&p.flows[a].rate).then(a.cmp(&b)));

    let mut stayers = vec![Vec::new(); p.lsps.len()];
    let mut forced_suffix = vec![0; n + 1];
    for pos in (0..n).rev() {
        let f = order[pos];
        let forced = cands[f][0] != old[f];
        forced_suffix[pos] = forced_suffix[pos + 1] + usize::from(forced);
    }
    for (pos, &f) in order.iter().enumerate() {
        if cands[f][0] == old[f] {
            stayers[old[f]].push(pos);
        }
    }

    let unreserved = p.mode == ReservationMode::Unreserved;
    let lsp_links = if unreserved {
        p.lsps.iter().map(|l| l.link_indices(p.topology)).collect()
    } else {
        vec![Vec::new(); p.lsps.len()]
    };
    let link_caps: Vec<f64> = p.topology.links().iter().map(|l| p.mu * l.bandwidth).collect();

    let mut s = Search {
        rates: p.flows.iter().map(|f| f.rate).collect(),
        old,
        cands,
        order,
        stayers,
        forced_suffix,
        caps: p.lsps.iter().map(|l| l.capacity).collect(),
        lsp_links,
        link_load: vec![0.0; link_caps.len()],
        link_caps,
        unreserved,
        budget: p.node_budget,
        lsp_load: vec![0.0; p.lsps.len()],
        assign: vec![None; n],
        best: None,
        nodes: 0,
        aborted: false,
    };
    s.dfs(0, 0);

    match s.best {
        Some((changes, vec)) => Ok(ReroutingSolution {
            fr_new: FlowAssignment(vec.into_iter().map(LspId).collect()),
            changes,
            optimal: !s.aborted,
            nodes: s.nodes,
        }),
        None if s.aborted => Err(ReroutingError::BudgetExhausted(p.node_budget)),
        None => Err(ReroutingError::Infeasible(
            "no assignment satisfies the LSP capacity constraints".into(),
        )),
    }
}
