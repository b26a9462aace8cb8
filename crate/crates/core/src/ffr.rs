//! Fast flow re-routing: a greedy, single-pass substitute for the exact
//! re-assignment.
//!
//! Flows are placed one at a time into initially empty LSPs. A flow keeps
//! its current LSP when that LSP still has room, otherwise it takes the
//! proper LSP with the most free capacity. If no LSP has room, an LSP may be
//! stretched beyond its reservation by the residual headroom of its
//! bottleneck link; the stretch raises the LSP's working capacity for the
//! rest of the pass and is charged to every link on its path. Flows that
//! still do not fit stay on their current LSP and produce a re-creation
//! request.

use serde::{Deserialize, Serialize};

use crate::flow_rerouting::EPS;
use crate::lsp::{FlowAssignment, Lsp, LspId};
use crate::topology::{LinkIdx, NetworkTopology, NodeId};
use crate::traffic::{Flow, FlowId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowOrder {
    /// Largest rate first, ties by flow id.
    #[default]
    DescendingRate,
    /// The order of the input slice.
    Input,
}

/// A flow that could not be placed, handed to LSP re-creation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecreationRequest {
    pub flow: FlowId,
    pub src: NodeId,
    pub dst: NodeId,
    pub rate: f64,
    /// Rate missing on the best candidate, after augmentation.
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfrOutcome {
    pub assignment: FlowAssignment,
    pub requests: Vec<RecreationRequest>,
    /// LSP capacities including augmentation granted during the pass.
    pub working_capacity: Vec<f64>,
    /// Candidate examinations: LSP scans, capacity comparisons and links
    /// inspected by congestion checks.
    pub examinations: u64,
}

impl FfrOutcome {
    pub fn augmentation(&self, lsps: &[Lsp]) -> Vec<f64> {
        self.working_capacity
            .iter()
            .zip(lsps)
            .map(|(w, l)| w - l.capacity)
            .collect()
    }
}

/// LSPs sharing the flow's endpoints whose delay the flow tolerates,
/// by descending free capacity (ties by id).
pub fn find_proper_lsps(flow: &Flow, lsps: &[Lsp], free: &[f64]) -> Vec<LspId> {
    let mut out: Vec<LspId> = lsps
        .iter()
        .filter(|l| l.src == flow.src && l.dst == flow.dst && l.prop_delay <= flow.max_delay + EPS)
        .map(|l| l.id)
        .collect();
    out.sort_by(|a, b| free[b.0].total_cmp(&free[a.0]).then(a.cmp(b)));
    out
}

/// Residual headroom of the bottleneck link on `lsp`, never negative.
pub fn bottleneck_headroom(lsp: &Lsp, topo: &NetworkTopology, load: &[f64], mu: f64) -> f64 {
    lsp.links()
        .map(|(j, v)| {
            let i = topo.link_index(j, v).expect("LSP link exists in topology");
            mu * topo.link(i).bandwidth - load[i]
        })
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Whether `flow` fits `lsp` once the LSP is stretched by its bottleneck
/// link's headroom. `load` is indexed by link.
pub fn check_congestion(
    lsp: &Lsp,
    free_capacity: f64,
    flow: &Flow,
    topo: &NetworkTopology,
    load: &[f64],
    mu: f64,
) -> bool {
    if flow.rate <= free_capacity + EPS {
        return true;
    }
    free_capacity.max(0.0) + bottleneck_headroom(lsp, topo, load, mu) + EPS >= flow.rate
}

struct Pass<'a> {
    lsps: &'a [Lsp],
    links: Vec<Vec<LinkIdx>>,
    working: Vec<f64>,
    load: Vec<f64>,
    // per link: sum over LSPs of max(working, load)
    committed: Vec<f64>,
}

impl Pass<'_> {
    fn free(&self, i: usize) -> f64 {
        self.working[i] - self.load[i]
    }

    fn set(&mut self, i: usize, working: f64, load: f64) {
        let before = self.working[i].max(self.load[i]);
        self.working[i] = working;
        self.load[i] = load;
        let delta = working.max(load) - before;
        if delta != 0.0 {
            for &l in &self.links[i] {
                self.committed[l] += delta;
            }
        }
    }

    fn headroom(&self, i: usize, topo: &NetworkTopology, mu: f64) -> f64 {
        bottleneck_headroom(&self.lsps[i], topo, &self.committed, mu)
    }
}

/// One greedy re-routing pass over all flows.
pub fn ffr(
    flows: &[Flow],
    lsps: &[Lsp],
    fr_old: &FlowAssignment,
    topo: &NetworkTopology,
    mu: f64,
    order: FlowOrder,
) -> FfrOutcome {
    let n_lsps = lsps.len();
    let mut pass = Pass {
        lsps,
        links: lsps.iter().map(|l| l.link_indices(topo)).collect(),
        working: lsps.iter().map(|l| l.capacity).collect(),
        load: vec![0.0; n_lsps],
        committed: vec![0.0; topo.links().len()],
    };
    for i in 0..n_lsps {
        for k in 0..pass.links[i].len() {
            let l = pass.links[i][k];
            pass.committed[l] += pass.working[i];
        }
    }

    let mut seq: Vec<usize> = (0..flows.len()).collect();
    if order == FlowOrder::DescendingRate {
        seq.sort_by(|&a, &b| flows[b].rate.total_cmp(&flows[a].rate).then(a.cmp(&b)));
    }

    let mut assignment = fr_old.clone();
    let mut requests = Vec::new();
    let mut examinations = 0u64;

    for f in seq {
        let flow = &flows[f];
        let old = fr_old.lsp_of(f);
        examinations += n_lsps as u64;
        let free: Vec<f64> = (0..n_lsps).map(|i| pass.free(i)).collect();
        let mut cands = find_proper_lsps(flow, lsps, &free);
        if let Some(pos) = cands.iter().position(|&l| l == old) {
            cands.remove(pos);
            cands.insert(0, old);
        }

        let mut chosen = None;
        for &l in &cands {
            examinations += 1;
            if pass.free(l.0) + EPS >= flow.rate {
                chosen = Some((l.0, 0.0));
                break;
            }
        }
        if chosen.is_none() {
            for &l in &cands {
                let i = l.0;
                examinations += lsps[i].hops() as u64;
                if check_congestion(&lsps[i], pass.free(i), flow, topo, &pass.committed, mu) {
                    chosen = Some((i, (flow.rate - pass.free(i).max(0.0)).max(0.0)));
                    break;
                }
            }
        }

        match chosen {
            Some((i, augment)) => {
                let (w, ld) = (pass.working[i] + augment, pass.load[i] + flow.rate);
                pass.set(i, w, ld);
                assignment.0[f] = LspId(i);
            }
            None => {
                let best = cands
                    .iter()
                    .map(|l| pass.free(l.0).max(0.0) + pass.headroom(l.0, topo, mu))
                    .fold(0.0, f64::max);
                requests.push(RecreationRequest {
                    flow: flow.id,
                    src: flow.src,
                    dst: flow.dst,
                    rate: flow.rate,
                    deficit: (flow.rate - best).max(0.0),
                });
                let (w, ld) = (pass.working[old.0], pass.load[old.0] + flow.rate);
                pass.set(old.0, w, ld);
            }
        }
    }

    FfrOutcome {
        assignment,
        requests,
        working_capacity: pass.working,
        examinations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsp::build_lsp;
    use crate::topology::Link;

    fn square(bw: f64) -> NetworkTopology {
        let l = |s, d| Link {
            src: NodeId(s),
            dst: NodeId(d),
            bandwidth: bw,
            prop_delay: 1.0,
        };
        NetworkTopology::new(
            4,
            &[NodeId(0), NodeId(3)],
            vec![l(0, 1), l(1, 3), l(0, 2), l(2, 3)],
        )
        .unwrap()
    }

    fn two_lsps(t: &NetworkTopology, caps: [f64; 2]) -> Vec<Lsp> {
        vec![
            build_lsp(t, LspId(0), &[NodeId(0), NodeId(1), NodeId(3)], caps[0]).unwrap(),
            build_lsp(t, LspId(1), &[NodeId(0), NodeId(2), NodeId(3)], caps[1]).unwrap(),
        ]
    }

    fn flow(id: usize, rate: f64) -> Flow {
        Flow {
            id: FlowId(id),
            src: NodeId(0),
            dst: NodeId(3),
            rate,
            max_delay: 2.0,
        }
    }

    #[test]
    fn proper_lsps_filter_and_sort() {
        let t = square(100.0);
        let mut lsps = two_lsps(&t, [10.0, 10.0]);
        let f = flow(0, 1.0);
        assert_eq!(find_proper_lsps(&f, &lsps, &[3.0, 7.0]), vec![LspId(1), LspId(0)]);
        assert_eq!(find_proper_lsps(&f, &lsps, &[5.0, 5.0]), vec![LspId(0), LspId(1)]);
        lsps[1].prop_delay = 5.0;
        assert_eq!(find_proper_lsps(&f, &lsps, &[3.0, 7.0]), vec![LspId(0)]);
        let other = Flow {
            dst: NodeId(2),
            ..f
        };
        assert!(find_proper_lsps(&other, &lsps, &[3.0, 7.0]).is_empty());
    }

    #[test]
    fn congestion_check_uses_bottleneck_headroom() {
        let t = square(10.0);
        let lsps = two_lsps(&t, [5.0, 5.0]);
        // links 0->1 and 1->3 are indices 0 and 1
        let mut load = vec![10.0, 10.0, 0.0, 0.0];
        assert!(!check_congestion(&lsps[0], 5.0, &flow(0, 6.0), &t, &load, 1.0));
        load[0] = 7.0;
        load[1] = 5.0;
        assert!(check_congestion(&lsps[0], 5.0, &flow(0, 7.0), &t, &load, 1.0));
        assert!(!check_congestion(&lsps[0], 5.0, &flow(0, 8.5), &t, &load, 1.0));
        // fits without augmentation even when links are overloaded
        let overloaded = vec![50.0; 4];
        assert!(check_congestion(&lsps[0], 5.0, &flow(0, 4.0), &t, &overloaded, 1.0));
    }

    #[test]
    fn fitting_flows_stay_put() {
        let t = square(100.0);
        let lsps = two_lsps(&t, [10.0, 10.0]);
        let flows = vec![flow(0, 3.0), flow(1, 4.0), flow(2, 9.0)];
        let old = FlowAssignment(vec![LspId(0), LspId(0), LspId(1)]);
        let out = ffr(&flows, &lsps, &old, &t, 0.9, FlowOrder::DescendingRate);
        assert_eq!(out.assignment, old);
        assert!(out.requests.is_empty());
        assert_eq!(out.working_capacity, vec![10.0, 10.0]);
    }

    #[test]
    fn first_keeps_second_moves() {
        let t = square(100.0);
        let lsps = two_lsps(&t, [10.0, 10.0]);
        let flows = vec![flow(0, 6.0), flow(1, 6.0)];
        let old = FlowAssignment(vec![LspId(0), LspId(0)]);
        let out = ffr(&flows, &lsps, &old, &t, 1.0, FlowOrder::DescendingRate);
        assert_eq!(out.assignment, FlowAssignment(vec![LspId(0), LspId(1)]));
        assert!(out.requests.is_empty());
    }

    #[test]
    fn augmentation_stretches_an_lsp() {
        // each path has one LSP reserving 5 of 10, so headroom is 5
        let t = square(10.0);
        let lsps = two_lsps(&t, [5.0, 5.0]);
        let flows = vec![flow(0, 7.0)];
        let old = FlowAssignment(vec![LspId(0)]);
        let out = ffr(&flows, &lsps, &old, &t, 1.0, FlowOrder::DescendingRate);
        assert_eq!(out.assignment, old);
        assert!(out.requests.is_empty());
        assert!((out.working_capacity[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_flow_requests_recreation() {
        let t = square(10.0);
        let lsps = two_lsps(&t, [5.0, 5.0]);
        let flows = vec![flow(0, 20.0)];
        let old = FlowAssignment(vec![LspId(1)]);
        let out = ffr(&flows, &lsps, &old, &t, 1.0, FlowOrder::DescendingRate);
        assert_eq!(out.assignment, old);
        assert_eq!(out.requests.len(), 1);
        assert_eq!(out.requests[0].flow, FlowId(0));
        assert!((out.requests[0].deficit - 10.0).abs() < 1e-12);
    }

    #[test]
    fn input_order_is_respected() {
        let t = square(100.0);
        let lsps = two_lsps(&t, [10.0, 10.0]);
        let flows = vec![flow(0, 4.0), flow(1, 7.0)];
        let old = FlowAssignment(vec![LspId(0), LspId(0)]);
        let by_rate = ffr(&flows, &lsps, &old, &t, 1.0, FlowOrder::DescendingRate);
        assert_eq!(by_rate.assignment, FlowAssignment(vec![LspId(1), LspId(0)]));
        let by_input = ffr(&flows, &lsps, &old, &t, 1.0, FlowOrder::Input);
        assert_eq!(by_input.assignment, FlowAssignment(vec![LspId(0), LspId(1)]));
    }
}
