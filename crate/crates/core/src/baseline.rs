//! Shortest-path comparison scheme: every flow follows a minimum-hop path,
//! oblivious to load.

use std::collections::VecDeque;

use thiserror::Error;

use crate::topology::{NetworkTopology, NodeId};
use crate::traffic::Flow;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("no path from {src} to {dst}")]
    Unreachable { src: NodeId, dst: NodeId },
}

/// Minimum-hop path from `src` to `dst`, ties broken by the smallest node
/// sequence.
pub fn shortest_path(
    topo: &NetworkTopology,
    src: NodeId,
    dst: NodeId,
) -> Result<Vec<NodeId>, BaselineError> {
    let n = topo.node_count();
    if src.0 >= n || dst.0 >= n {
        return Err(BaselineError::Unreachable { src, dst });
    }
    // hop distance to dst, so the forward walk can pick the smallest next hop
    let mut dist = vec![usize::MAX; n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in topo.links() {
        rev[l.dst.0].push(l.src.0);
    }
    dist[dst.0] = 0;
    let mut queue = VecDeque::from([dst.0]);
    while let Some(v) = queue.pop_front() {
        for &u in &rev[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if dist[src.0] == usize::MAX {
        return Err(BaselineError::Unreachable { src, dst });
    }

    let mut path = vec![src];
    let mut cur = src.0;
    while cur != dst.0 {
        // out_links is sorted by destination
        let next = topo
            .out_links(NodeId(cur))
            .map(|l| l.dst.0)
            .find(|&v| dist[v] != usize::MAX && dist[v] + 1 == dist[cur])
            .expect("hop distances are consistent");
        path.push(NodeId(next));
        cur = next;
    }
    Ok(path)
}

pub fn shortest_path_route(flow: &Flow, topo: &NetworkTopology) -> Result<Vec<NodeId>, BaselineError> {
    shortest_path(topo, flow.src, flow.dst)
}

/// Routes every flow independently.
pub fn route_all(flows: &[Flow], topo: &NetworkTopology) -> Result<Vec<Vec<NodeId>>, BaselineError> {
    flows.iter().map(|f| shortest_path_route(f, topo)).collect()
}
