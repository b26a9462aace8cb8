//! Brute-force oracles and random instance generators shared by the
//! integration tests. Nothing here calls into the solvers.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use hybrid_te::lsp::{build_lsp, FlowAssignment, Lsp, LspId, LspRouting};
use hybrid_te::lsp_recreation::LspRequest;
use hybrid_te::topology::{Link, NetworkTopology, NodeId};
use hybrid_te::traffic::{Flow, FlowId};
use hybrid_te::ReservationMode;
use rand::Rng;

pub const TOL: f64 = 1e-9;

pub fn ids(p: &[usize]) -> Vec<NodeId> {
    p.iter().copied().map(NodeId).collect()
}

/// Random graph on `n` nodes; every unordered pair is linked in both
/// directions with probability `density`. Bandwidth and delay are
/// integers so sums stay exact.
pub fn random_topology<R: Rng>(rng: &mut R, n: usize, density: f64) -> NetworkTopology {
    let mut links = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                let bandwidth = f64::from(rng.random_range(5u32..=20));
                let prop_delay = f64::from(rng.random_range(1u32..=3));
                for (s, d) in [(a, b), (b, a)] {
                    links.push(Link {
                        src: NodeId(s),
                        dst: NodeId(d),
                        bandwidth,
                        prop_delay,
                    });
                }
            }
        }
    }
    NetworkTopology::new(n, &[], links).expect("generated topology is valid")
}

/// Every simple path from `s` to `d` with delay at most `budget`, by plain
/// recursive search.
pub fn naive_paths(topo: &NetworkTopology, s: usize, d: usize, budget: f64) -> Vec<Vec<usize>> {
    let mut adj: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for l in topo.links() {
        adj.entry(l.src.0).or_default().push((l.dst.0, l.prop_delay));
    }
    let mut out = Vec::new();
    let mut path = vec![s];
    fn go(
        adj: &HashMap<usize, Vec<(usize, f64)>>,
        d: usize,
        budget: f64,
        delay: f64,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *path.last().unwrap();
        if cur == d {
            out.push(path.clone());
            return;
        }
        for &(next, w) in adj.get(&cur).map(Vec::as_slice).unwrap_or(&[]) {
            if path.contains(&next) || delay + w > budget + TOL {
                continue;
            }
            path.push(next);
            go(adj, d, budget, delay + w, path, out);
            path.pop();
        }
    }
    if s != d {
        go(&adj, d, budget, 0.0, &mut path, &mut out);
    }
    out
}

pub fn path_delay(topo: &NetworkTopology, p: &[usize]) -> f64 {
    p.windows(2)
        .map(|w| {
            topo.links()
                .iter()
                .find(|l| l.src.0 == w[0] && l.dst.0 == w[1])
                .expect("link exists")
                .prop_delay
        })
        .sum()
}

/// Hop distance by breadth-first search.
pub fn bfs_hops(topo: &NetworkTopology, s: usize, d: usize) -> Option<usize> {
    let n = topo.node_count();
    let mut dist = vec![usize::MAX; n];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for l in topo.links().iter().filter(|l| l.src.0 == u) {
            if dist[l.dst.0] == usize::MAX {
                dist[l.dst.0] = dist[u] + 1;
                q.push_back(l.dst.0);
            }
        }
    }
    (dist[d] != usize::MAX).then_some(dist[d])
}

fn link_map(topo: &NetworkTopology) -> HashMap<(usize, usize), f64> {
    topo.links()
        .iter()
        .map(|l| ((l.src.0, l.dst.0), l.bandwidth))
        .collect()
}

pub struct FlowInstance {
    pub topo: NetworkTopology,
    pub flows: Vec<Flow>,
    pub lsps: Vec<Lsp>,
    pub fr_old: FlowAssignment,
    pub mode: ReservationMode,
    pub mu: f64,
}

/// A small flow re-routing instance: up to `max_flows` flows over up to
/// `max_lsps` LSPs between a couple of node pairs.
pub fn flow_instance<R: Rng>(rng: &mut R, max_flows: usize, max_lsps: usize) -> FlowInstance {
    loop {
        let n = rng.random_range(4..=5);
        let topo = random_topology(rng, n, 0.7);
        let pairs: Vec<(usize, usize)> = (0..2)
            .map(|_| {
                let s = rng.random_range(0..n);
                let d = (s + rng.random_range(1..n)) % n;
                (s, d)
            })
            .collect();
        let n_lsps = rng.random_range(1..=max_lsps);
        let mut lsps = Vec::new();
        for _ in 0..n_lsps {
            let (s, d) = pairs[rng.random_range(0..pairs.len())];
            let paths = naive_paths(&topo, s, d, f64::INFINITY);
            if paths.is_empty() {
                continue;
            }
            let p = &paths[rng.random_range(0..paths.len())];
            let cap = f64::from(rng.random_range(2u32..=12));
            lsps.push(build_lsp(&topo, LspId(lsps.len()), &ids(p), cap).unwrap());
        }
        if lsps.is_empty() {
            continue;
        }
        let n_flows = rng.random_range(1..=max_flows);
        let mut flows = Vec::new();
        let mut old = Vec::new();
        for f in 0..n_flows {
            let home = rng.random_range(0..lsps.len());
            let l = &lsps[home];
            let max_delay = if rng.random_bool(0.8) {
                l.prop_delay + f64::from(rng.random_range(0u32..=4))
            } else {
                f64::from(rng.random_range(1u32..=6))
            };
            flows.push(Flow {
                id: FlowId(f),
                src: l.src,
                dst: l.dst,
                rate: f64::from(rng.random_range(1u32..=16)) * 0.5,
                max_delay,
            });
            old.push(LspId(home));
        }
        let (mode, mu) = if rng.random_bool(0.5) {
            (ReservationMode::Reserved, 1.0)
        } else {
            (
                ReservationMode::Unreserved,
                f64::from(rng.random_range(5u32..=10)) / 10.0,
            )
        };
        return FlowInstance {
            topo,
            flows,
            lsps,
            fr_old: FlowAssignment(old),
            mode,
            mu,
        };
    }
}

fn assignment_feasible(inst: &FlowInstance, a: &[usize]) -> bool {
    let mut lsp_load = vec![0.0; inst.lsps.len()];
    let mut link_load: HashMap<(usize, usize), f64> = HashMap::new();
    for (f, &i) in a.iter().enumerate() {
        let flow = &inst.flows[f];
        let l = &inst.lsps[i];
        if l.src != flow.src || l.dst != flow.dst || l.prop_delay > flow.max_delay + TOL {
            return false;
        }
        lsp_load[i] += flow.rate;
        for w in l.path.windows(2) {
            *link_load.entry((w[0].0, w[1].0)).or_default() += flow.rate;
        }
    }
    if lsp_load
        .iter()
        .zip(&inst.lsps)
        .any(|(x, l)| *x > l.capacity + TOL)
    {
        return false;
    }
    if inst.mode == ReservationMode::Unreserved {
        let bw = link_map(&inst.topo);
        if link_load.iter().any(|(k, x)| *x > inst.mu * bw[k] + TOL) {
            return false;
        }
    }
    true
}

/// Minimum number of changed flows and the lexicographically smallest
/// assignment achieving it, by enumerating every assignment.
pub fn brute_force_rerouting(inst: &FlowInstance) -> Option<(usize, Vec<usize>)> {
    let nf = inst.flows.len();
    let nl = inst.lsps.len();
    let mut a = vec![0usize; nf];
    let mut best: Option<(usize, Vec<usize>)> = None;
    loop {
        if assignment_feasible(inst, &a) {
            let changes = a
                .iter()
                .zip(&inst.fr_old.0)
                .filter(|(x, o)| **x != o.0)
                .count();
            if best.as_ref().is_none_or(|(c, _)| changes < *c) {
                best = Some((changes, a.clone()));
            }
        }
        // odometer with the last flow varying fastest: lexicographic order
        let mut k = nf;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            a[k] += 1;
            if a[k] < nl {
                break;
            }
            a[k] = 0;
        }
    }
}

pub struct RoutingInstance {
    pub topo: NetworkTopology,
    pub requests: Vec<LspRequest>,
    pub lr_old: LspRouting,
    pub mu: f64,
}

/// Up to `max_lsps` LSP requests over a random graph of at most `max_nodes`
/// nodes, each with an old path (possibly empty).
pub fn routing_instance<R: Rng>(rng: &mut R, max_lsps: usize, max_nodes: usize) -> RoutingInstance {
    loop {
        let n = rng.random_range(4..=max_nodes);
        let topo = random_topology(rng, n, 0.55);
        let n_lsps = rng.random_range(1..=max_lsps);
        let mut requests = Vec::new();
        let mut old = Vec::new();
        for _ in 0..n_lsps {
            let s = rng.random_range(0..n);
            let d = (s + rng.random_range(1..n)) % n;
            let all = naive_paths(&topo, s, d, f64::INFINITY);
            if all.is_empty() {
                continue;
            }
            let shortest = all
                .iter()
                .map(|p| path_delay(&topo, p))
                .fold(f64::INFINITY, f64::min);
            let max_delay = if rng.random_bool(0.9) {
                shortest * f64::from(rng.random_range(10u32..=25)) / 10.0
            } else {
                shortest - 0.5
            };
            requests.push(LspRequest {
                src: NodeId(s),
                dst: NodeId(d),
                capacity: f64::from(rng.random_range(2u32..=12)),
                max_delay,
            });
            old.push(if rng.random_bool(0.2) {
                Vec::new()
            } else {
                ids(&all[rng.random_range(0..all.len())])
            });
        }
        if requests.is_empty() {
            continue;
        }
        return RoutingInstance {
            lr_old: LspRouting {
                node_count: n,
                paths: old,
            },
            topo,
            requests,
            mu: f64::from(rng.random_range(5u32..=10)) / 10.0,
        };
    }
}

fn link_set(p: &[NodeId]) -> BTreeSet<(usize, usize)> {
    p.windows(2).map(|w| (w[0].0, w[1].0)).collect()
}

/// Minimum total symmetric difference over every combination of
/// delay-feasible simple paths that fits the per-link bound.
pub fn brute_force_recreation(inst: &RoutingInstance) -> Option<usize> {
    let cands: Vec<Vec<Vec<usize>>> = inst
        .requests
        .iter()
        .map(|r| naive_paths(&inst.topo, r.src.0, r.dst.0, r.max_delay))
        .collect();
    if cands.iter().any(Vec::is_empty) {
        return None;
    }
    let bw = link_map(&inst.topo);
    let old: Vec<BTreeSet<(usize, usize)>> = inst.lr_old.paths.iter().map(|p| link_set(p)).collect();
    let mut pick = vec![0usize; cands.len()];
    let mut best: Option<usize> = None;
    loop {
        let mut load: HashMap<(usize, usize), f64> = HashMap::new();
        let mut cost = 0;
        for (i, &c) in pick.iter().enumerate() {
            let set = link_set(&ids(&cands[i][c]));
            for e in &set {
                *load.entry(*e).or_default() += inst.requests[i].capacity;
            }
            cost += set.symmetric_difference(&old[i]).count();
        }
        if load.iter().all(|(k, x)| *x <= inst.mu * bw[k] + TOL) {
            best = Some(best.map_or(cost, |b: usize| b.min(cost)));
        }
        let mut k = pick.len();
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < cands[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
}
