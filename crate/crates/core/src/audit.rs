//! Independent constraint checker for solver and heuristic output.
//!
//! Everything here works on dense 0/1 matrices rebuilt from the raw inputs
//! and shares no code with the solvers, so a bug in a solver's bookkeeping
//! shows up as a violation instead of being mirrored.

use std::fmt;

use crate::ffr::FfrOutcome;
use crate::lsp::{FlowAssignment, Lsp, LspRouting};
use crate::lsp_recreation::LspRequest;
use crate::topology::NetworkTopology;
use crate::traffic::Flow;

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    LspCapacity,
    FlowDelay,
    OneLspPerFlow,
    SourceMatch,
    SinkMatch,
    LinkBound,
    Augmentation,
    UnplacedFlowMoved,
    LinkCapacity,
    LspDelay,
    NoEntryIntoSource,
    NoExitFromSink,
    LeaveSourceOnce,
    EnterSinkOnce,
    Conservation,
    OutDegree,
    SimplePath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.constraint, self.detail)
    }
}

fn v(constraint: Constraint, detail: String) -> Violation {
    Violation { constraint, detail }
}

fn fr_matrix(assignment: &FlowAssignment, n_lsps: usize) -> Vec<Vec<u8>> {
    assignment
        .0
        .iter()
        .map(|l| (0..n_lsps).map(|i| u8::from(l.0 == i)).collect())
        .collect()
}

/// `lr[i][j][v]` is 1 when LSP `i` uses directed link `j -> v`.
fn lr_tensor(paths: &[Vec<usize>], n: usize) -> Vec<Vec<Vec<u8>>> {
    paths
        .iter()
        .map(|p| {
            let mut m = vec![vec![0u8; n]; n];
            for w in p.windows(2) {
                m[w[0]][w[1]] = 1;
            }
            m
        })
        .collect()
}

fn bandwidth_matrix(topo: &NetworkTopology) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = topo.node_count();
    let mut bw = vec![vec![0.0; n]; n];
    let mut delay = vec![vec![f64::INFINITY; n]; n];
    for l in topo.links() {
        bw[l.src.0][l.dst.0] = l.bandwidth;
        delay[l.src.0][l.dst.0] = l.prop_delay;
    }
    (bw, delay)
}

/// Checks a flow-to-LSP assignment against the LSP capacities `caps`.
/// With `link_mu` set, the per-link load bound is checked as well.
pub fn audit_assignment_with(
    topo: &NetworkTopology,
    flows: &[Flow],
    lsps: &[Lsp],
    caps: &[f64],
    assignment: &FlowAssignment,
    link_mu: Option<f64>,
    skip: &[bool],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let nl = lsps.len();
    if assignment.0.len() != flows.len() {
        out.push(v(
            Constraint::OneLspPerFlow,
            format!("{} rows for {} flows", assignment.0.len(), flows.len()),
        ));
        return out;
    }
    if let Some(bad) = assignment.0.iter().find(|l| l.0 >= nl) {
        out.push(v(Constraint::OneLspPerFlow, format!("unknown LSP {bad}")));
        return out;
    }
    let fr = fr_matrix(assignment, nl);

    for i in 0..nl {
        let load: f64 = (0..flows.len())
            .filter(|&f| !skip[f])
            .map(|f| flows[f].rate * f64::from(fr[f][i]))
            .sum();
        if load > caps[i] + TOL {
            out.push(v(
                Constraint::LspCapacity,
                format!("lsp {i}: load {load} > capacity {}", caps[i]),
            ));
        }
    }
    for (f, flow) in flows.iter().enumerate() {
        if skip[f] {
            continue;
        }
        let row = &fr[f];
        let count: u32 = row.iter().map(|&x| u32::from(x)).sum();
        if count != 1 {
            out.push(v(Constraint::OneLspPerFlow, format!("flow {f} on {count} LSPs")));
        }
        let pd: f64 = (0..nl).map(|i| f64::from(row[i]) * lsps[i].prop_delay).sum();
        if pd > flow.max_delay + TOL {
            out.push(v(
                Constraint::FlowDelay,
                format!("flow {f}: delay {pd} > tolerable {}", flow.max_delay),
            ));
        }
        for i in 0..nl {
            if row[i] == 1 && flow.src != lsps[i].src {
                out.push(v(Constraint::SourceMatch, format!("flow {f} on lsp {i}")));
            }
            if row[i] == 1 && flow.dst != lsps[i].dst {
                out.push(v(Constraint::SinkMatch, format!("flow {f} on lsp {i}")));
            }
        }
    }

    if let Some(mu) = link_mu {
        let n = topo.node_count();
        let paths: Vec<Vec<usize>> = lsps.iter().map(|l| l.path.iter().map(|x| x.0).collect()).collect();
        let lr = lr_tensor(&paths, n);
        let (bw, _) = bandwidth_matrix(topo);
        for j in 0..n {
            for w in 0..n {
                let mut load = 0.0;
                for (f, flow) in flows.iter().enumerate() {
                    for i in 0..nl {
                        load += flow.rate * f64::from(fr[f][i]) * f64::from(lr[i][j][w]);
                    }
                }
                if load > mu * bw[j][w] + TOL {
                    out.push(v(
                        Constraint::LinkBound,
                        format!("link {j}->{w}: load {load} > {}", mu * bw[j][w]),
                    ));
                }
            }
        }
    }
    out
}

pub fn audit_assignment(
    topo: &NetworkTopology,
    flows: &[Flow],
    lsps: &[Lsp],
    assignment: &FlowAssignment,
    link_mu: Option<f64>,
) -> Vec<Violation> {
    let caps: Vec<f64> = lsps.iter().map(|l| l.capacity).collect();
    audit_assignment_with(topo, flows, lsps, &caps, assignment, link_mu, &vec![false; flows.len()])
}

/// Checks one heuristic pass: placed flows respect the stretched
/// capacities, unplaced flows stay where they were, and stretching never
/// pushes a link past `mu` of its bandwidth.
pub fn audit_ffr(
    topo: &NetworkTopology,
    flows: &[Flow],
    lsps: &[Lsp],
    fr_old: &FlowAssignment,
    outcome: &FfrOutcome,
    mu: f64,
) -> Vec<Violation> {
    let mut skip = vec![false; flows.len()];
    for r in &outcome.requests {
        match flows.iter().position(|f| f.id == r.flow) {
            Some(f) => skip[f] = true,
            None => {
                return vec![v(Constraint::UnplacedFlowMoved, format!("request for unknown {}", r.flow))]
            }
        }
    }
    let mut out = audit_assignment_with(
        topo,
        flows,
        lsps,
        &outcome.working_capacity,
        &outcome.assignment,
        None,
        &skip,
    );
    for (f, &s) in skip.iter().enumerate() {
        if s && outcome.assignment.0[f] != fr_old.0[f] {
            out.push(v(Constraint::UnplacedFlowMoved, format!("flow {f}")));
        }
    }

    let n = topo.node_count();
    let paths: Vec<Vec<usize>> = lsps.iter().map(|l| l.path.iter().map(|x| x.0).collect()).collect();
    let lr = lr_tensor(&paths, n);
    let (bw, _) = bandwidth_matrix(topo);
    for (i, l) in lsps.iter().enumerate() {
        if outcome.working_capacity[i] < l.capacity - TOL {
            out.push(v(Constraint::Augmentation, format!("lsp {i} shrank")));
        }
    }
    for j in 0..n {
        for w in 0..n {
            let on_link: Vec<usize> = (0..lsps.len()).filter(|&i| lr[i][j][w] == 1).collect();
            let stretched = on_link
                .iter()
                .any(|&i| outcome.working_capacity[i] > lsps[i].capacity + TOL);
            if !stretched {
                continue;
            }
            let total: f64 = on_link.iter().map(|&i| outcome.working_capacity[i]).sum();
            if total > mu * bw[j][w] + TOL {
                out.push(v(
                    Constraint::Augmentation,
                    format!("link {j}->{w}: reserved {total} > {}", mu * bw[j][w]),
                ));
            }
        }
    }
    out
}

/// Checks a recreated routing: per-link reservations, delay budgets, path
/// structure and that each LSP is a single simple path.
pub fn audit_routing(
    topo: &NetworkTopology,
    requests: &[LspRequest],
    routing: &LspRouting,
    mu: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = topo.node_count();
    if routing.paths.len() != requests.len() {
        out.push(v(
            Constraint::SimplePath,
            format!("{} paths for {} requests", routing.paths.len(), requests.len()),
        ));
        return out;
    }
    let paths: Vec<Vec<usize>> = routing.paths.iter().map(|p| p.iter().map(|x| x.0).collect()).collect();
    if paths.iter().flatten().any(|&x| x >= n) {
        out.push(v(Constraint::SimplePath, "node out of range".into()));
        return out;
    }
    let lr = lr_tensor(&paths, n);
    let (bw, delay) = bandwidth_matrix(topo);

    for j in 0..n {
        for w in 0..n {
            let reserved: f64 = (0..requests.len())
                .map(|i| f64::from(lr[i][j][w]) * requests[i].capacity)
                .sum();
            if reserved > mu * bw[j][w] + TOL {
                out.push(v(
                    Constraint::LinkCapacity,
                    format!("link {j}->{w}: reserved {reserved} > {}", mu * bw[j][w]),
                ));
            }
        }
    }

    for (i, r) in requests.iter().enumerate() {
        let m = &lr[i];
        let (s, e) = (r.src.0, r.dst.0);
        let mut pd = 0.0;
        for j in 0..n {
            for w in 0..n {
                if m[j][w] == 1 {
                    pd += delay[j][w];
                }
            }
        }
        if pd > r.max_delay + TOL {
            out.push(v(Constraint::LspDelay, format!("lsp {i}: delay {pd} > {}", r.max_delay)));
        }
        let col = |x: usize| (0..n).map(|j| u32::from(m[j][x])).sum::<u32>();
        let row = |x: usize| (0..n).map(|w| u32::from(m[x][w])).sum::<u32>();
        if col(s) != 0 {
            out.push(v(Constraint::NoEntryIntoSource, format!("lsp {i}")));
        }
        if row(e) != 0 {
            out.push(v(Constraint::NoExitFromSink, format!("lsp {i}")));
        }
        if row(s) != 1 {
            out.push(v(Constraint::LeaveSourceOnce, format!("lsp {i}: {}", row(s))));
        }
        if col(e) != 1 {
            out.push(v(Constraint::EnterSinkOnce, format!("lsp {i}: {}", col(e))));
        }
        for x in (0..n).filter(|&x| x != s && x != e) {
            if row(x) != col(x) {
                out.push(v(Constraint::Conservation, format!("lsp {i} at node {x}")));
            }
        }
        for x in 0..n {
            if row(x) > 1 {
                out.push(v(Constraint::OutDegree, format!("lsp {i} at node {x}")));
            }
        }
        for j in 0..n {
            for w in 0..n {
                if m[j][w] == 1 && bw[j][w] == 0.0 {
                    out.push(v(Constraint::SimplePath, format!("lsp {i} uses missing link {j}->{w}")));
                }
            }
        }

        // follow successors from the source; a simple path visits every
        // marked link exactly once
        let total: u32 = (0..n).map(row).sum();
        let mut seen = vec![false; n];
        let mut cur = s;
        let mut steps = 0;
        seen[cur] = true;
        while cur != e {
            match (0..n).find(|&w| m[cur][w] == 1) {
                Some(next) if !seen[next] => {
                    seen[next] = true;
                    cur = next;
                    steps += 1;
                }
                _ => break,
            }
        }
        if cur != e || steps != total {
            out.push(v(
                Constraint::SimplePath,
                format!("lsp {i}: walk of {steps} links does not cover {total} or reach the sink"),
            ));
        }
    }
    out
}
