//! Label-switched paths, the link-to-LSP incidence structure, and the
//! flow-to-LSP assignment.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::topology::{LinkIdx, NetworkTopology, NodeId};
use crate::traffic::Flow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LspId(pub usize);

impl fmt::Display for LspId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lsp{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LspError {
    #[error("invalid LSP path {path:?}: {reason}")]
    InvalidPath { path: Vec<usize>, reason: String },
    #[error("LSP capacity must be positive, got {0}")]
    InvalidCapacity(f64),
}

/// A simple path through the network carrying a bandwidth reservation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lsp {
    pub id: LspId,
    pub src: NodeId,
    pub dst: NodeId,
    /// Node sequence from `src` to `dst`.
    pub path: Vec<NodeId>,
    pub capacity: f64,
    pub prop_delay: f64,
}

impl Lsp {
    /// Directed links `(j, v)` along the path.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.path.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    /// Link indices of the path; panics if the path is not in `topo`.
    pub fn link_indices(&self, topo: &NetworkTopology) -> Vec<LinkIdx> {
        self.links()
            .map(|(j, v)| topo.link_index(j, v).expect("LSP link exists in topology"))
            .collect()
    }

    /// Re-checks path simplicity and delay consistency against `topo`.
    pub fn validate(&self, topo: &NetworkTopology) -> Result<(), LspError> {
        let rebuilt = build_lsp(topo, self.id, &self.path, self.capacity)?;
        if (rebuilt.prop_delay - self.prop_delay).abs() > 1e-9 {
            return Err(LspError::InvalidPath {
                path: self.path.iter().map(|n| n.0).collect(),
                reason: format!(
                    "declared delay {} differs from link delay sum {}",
                    self.prop_delay, rebuilt.prop_delay
                ),
            });
        }
        Ok(())
    }
}

/// Builds an LSP along `path`, summing link delays.
pub fn build_lsp(
    topo: &NetworkTopology,
    id: LspId,
    path: &[NodeId],
    capacity: f64,
) -> Result<Lsp, LspError> {
    let fail = |reason: String| LspError::InvalidPath {
        path: path.iter().map(|n| n.0).collect(),
        reason,
    };
    if path.len() < 2 {
        return Err(fail("a path needs at least two nodes".into()));
    }
    let mut seen = HashSet::new();
    for n in path {
        if !seen.insert(*n) {
            return Err(fail(format!("node {n} is repeated")));
        }
    }
    let mut delay = 0.0;
    for w in path.windows(2) {
        match topo.link_lookup(w[0], w[1]) {
            Some((_, d)) => delay += d,
            None => return Err(fail(format!("no link {} -> {}", w[0], w[1]))),
        }
    }
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(LspError::InvalidCapacity(capacity));
    }
    Ok(Lsp {
        id,
        src: path[0],
        dst: *path.last().unwrap(),
        path: path.to_vec(),
        capacity,
        prop_delay: delay,
    })
}

/// The flow-to-LSP assignment: entry `f` is the LSP carrying flow `f`.
///
/// Storing one LSP per flow makes the "exactly one LSP per flow" row
/// constraint hold by construction; [`FlowAssignment::to_matrix`] expands it
/// to the binary form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowAssignment(pub Vec<LspId>);

impl FlowAssignment {
    pub fn lsp_of(&self, flow: usize) -> LspId {
        self.0[flow]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of flows whose LSP differs between the two assignments.
    pub fn changes_from(&self, old: &FlowAssignment) -> usize {
        self.0.iter().zip(&old.0).filter(|(a, b)| a != b).count()
    }

    /// Binary `N_F x N_L` matrix, row-major.
    pub fn to_matrix(&self, lsp_count: usize) -> Vec<Vec<u8>> {
        self.0
            .iter()
            .map(|l| {
                let mut row = vec![0u8; lsp_count];
                row[l.0] = 1;
                row
            })
            .collect()
    }
}

/// Per-LSP node paths; equivalently the binary `N_S x N_S x N_L` tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LspRouting {
    pub node_count: usize,
    pub paths: Vec<Vec<NodeId>>,
}

impl LspRouting {
    pub fn from_lsps(node_count: usize, lsps: &[Lsp]) -> Self {
        Self {
            node_count,
            paths: lsps.iter().map(|l| l.path.clone()).collect(),
        }
    }

    pub fn lsp_count(&self) -> usize {
        self.paths.len()
    }

    pub fn link_set(&self, lsp: usize) -> HashSet<(NodeId, NodeId)> {
        self.paths[lsp].windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// `LR[j, v, i]`.
    pub fn contains(&self, j: NodeId, v: NodeId, lsp: usize) -> bool {
        self.paths[lsp].windows(2).any(|w| w[0] == j && w[1] == v)
    }

    /// Dense tensor indexed `[j][v][i]`.
    pub fn to_tensor(&self) -> Vec<Vec<Vec<u8>>> {
        let n = self.node_count;
        let mut t = vec![vec![vec![0u8; self.paths.len()]; n]; n];
        for (i, p) in self.paths.iter().enumerate() {
            for w in p.windows(2) {
                t[w[0].0][w[1].0][i] = 1;
            }
        }
        t
    }

    /// Element-wise L1 distance `|LR - other|`.
    pub fn changed_entries(&self, other: &LspRouting) -> usize {
        let n = self.paths.len().max(other.paths.len());
        (0..n)
            .map(|i| {
                let a = self.paths.get(i).map(|_| self.link_set(i)).unwrap_or_default();
                let b = other.paths.get(i).map(|_| other.link_set(i)).unwrap_or_default();
                a.symmetric_difference(&b).count()
            })
            .sum()
    }
}

/// Capacity of `lsp` minus the rates of the flows assigned to it.
///
/// Negative when the LSP is oversubscribed.
pub fn free_capacity(lsp: &Lsp, flows: &[Flow], assignment: &FlowAssignment) -> f64 {
    let used: f64 = flows
        .iter()
        .zip(&assignment.0)
        .filter(|(_, l)| **l == lsp.id)
        .map(|(f, _)| f.rate)
        .sum();
    lsp.capacity - used
}

/// Sum of assigned flow rates per LSP.
pub fn lsp_loads(lsp_count: usize, flows: &[Flow], assignment: &FlowAssignment) -> Vec<f64> {
    let mut loads = vec![0.0; lsp_count];
    for (f, l) in flows.iter().zip(&assignment.0) {
        loads[l.0] += f.rate;
    }
    loads
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Link;
    use crate::traffic::FlowId;

    fn line3() -> NetworkTopology {
        let l = |s, d| Link {
            src: NodeId(s),
            dst: NodeId(d),
            bandwidth: 10.0,
            prop_delay: 1.0,
        };
        NetworkTopology::new(3, &[NodeId(0), NodeId(2)], vec![l(0, 1), l(1, 0), l(1, 2), l(2, 1)])
            .unwrap()
    }

    fn nodes(p: &[usize]) -> Vec<NodeId> {
        p.iter().map(|&n| NodeId(n)).collect()
    }

    #[test]
    fn delay_is_additive() {
        let t = line3();
        assert_eq!(build_lsp(&t, LspId(0), &nodes(&[0, 1]), 5.0).unwrap().prop_delay, 1.0);
        let lsp = build_lsp(&t, LspId(0), &nodes(&[0, 1, 2]), 5.0).unwrap();
        assert_eq!(lsp.prop_delay, 2.0);
        assert_eq!(lsp.src, NodeId(0));
        assert_eq!(lsp.dst, NodeId(2));
        assert!(lsp.validate(&t).is_ok());
    }

    #[test]
    fn loops_and_gaps_are_invalid() {
        let t = line3();
        assert!(matches!(
            build_lsp(&t, LspId(0), &nodes(&[0, 1, 0]), 5.0),
            Err(LspError::InvalidPath { .. })
        ));
        assert!(matches!(
            build_lsp(&t, LspId(0), &nodes(&[0, 2]), 5.0),
            Err(LspError::InvalidPath { .. })
        ));
        assert!(matches!(
            build_lsp(&t, LspId(0), &nodes(&[0]), 5.0),
            Err(LspError::InvalidPath { .. })
        ));
        assert!(matches!(
            build_lsp(&t, LspId(0), &nodes(&[0, 1]), 0.0),
            Err(LspError::InvalidCapacity(_))
        ));
    }

    #[test]
    fn inconsistent_delay_fails_validation() {
        let t = line3();
        let mut lsp = build_lsp(&t, LspId(0), &nodes(&[0, 1, 2]), 5.0).unwrap();
        lsp.prop_delay = 1.0;
        assert!(lsp.validate(&t).is_err());
    }

    fn flow(id: usize, rate: f64) -> Flow {
        Flow {
            id: FlowId(id),
            src: NodeId(0),
            dst: NodeId(2),
            rate,
            max_delay: 10.0,
        }
    }

    #[test]
    fn free_capacity_arithmetic() {
        let t = line3();
        let lsp0 = build_lsp(&t, LspId(0), &nodes(&[0, 1, 2]), 10.0).unwrap();
        assert_eq!(free_capacity(&lsp0, &[], &FlowAssignment(vec![])), 10.0);
        let flows = vec![flow(0, 3.0), flow(1, 4.0), flow(2, 8.0)];
        let a = FlowAssignment(vec![LspId(0), LspId(0), LspId(1)]);
        assert_eq!(free_capacity(&lsp0, &flows, &a), 3.0);
        let over = FlowAssignment(vec![LspId(0), LspId(0), LspId(0)]);
        assert_eq!(free_capacity(&lsp0, &flows, &over), -5.0);
    }

    #[test]
    fn routing_tensor_and_distance() {
        let a = LspRouting {
            node_count: 3,
            paths: vec![nodes(&[0, 1, 2]), nodes(&[2, 1])],
        };
        let b = LspRouting {
            node_count: 3,
            paths: vec![nodes(&[0, 1]), nodes(&[2, 1])],
        };
        let t = a.to_tensor();
        assert_eq!(t[0][1][0], 1);
        assert_eq!(t[1][2][0], 1);
        assert_eq!(t[2][1][1], 1);
        assert_eq!(t[1][0][0], 0);
        assert!(a.contains(NodeId(1), NodeId(2), 0));
        assert_eq!(a.changed_entries(&b), 1);
        assert_eq!(a.changed_entries(&a), 0);
    }

    #[test]
    fn assignment_matrix() {
        let a = FlowAssignment(vec![LspId(1), LspId(0)]);
        assert_eq!(a.to_matrix(2), vec![vec![0, 1], vec![1, 0]]);
        let b = FlowAssignment(vec![LspId(1), LspId(1)]);
        assert_eq!(a.changes_from(&b), 1);
    }
}
