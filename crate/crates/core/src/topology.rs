//! Physical network graph: switches and directed, capacitated links.
//!
//! Topology files are TOML documents with three keys:
//!
//! ```toml
//! nodes = 3
//! edge_nodes = [0, 2]
//!
//! [[links]]
//! src = 0
//! dst = 1
//! bandwidth = 100.0
//! delay = 1.0
//! ```
//!
//! Links are directed. A bidirectional physical link is written as two
//! entries. Nodes not listed in `edge_nodes` are core (MPLS) routers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Identifier of a switch, `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a directed link inside [`NetworkTopology::links`].
pub type LinkIdx = usize;

/// A directed link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub bandwidth: f64,
    #[serde(rename = "delay")]
    pub prop_delay: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum TopologyError {
    #[error("cannot read topology file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed topology document: {0}")]
    Parse(String),
    #[error("invalid topology: {0}")]
    Validation(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct TopologyDoc {
    nodes: usize,
    edge_nodes: Vec<NodeId>,
    links: Vec<Link>,
}

/// Immutable, validated network graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    node_count: usize,
    links: Vec<Link>,
    edge: Vec<bool>,
    // dense (src, dst) -> link index
    index: Vec<Option<LinkIdx>>,
    // outgoing link indices per node, sorted by destination
    out: Vec<Vec<LinkIdx>>,
}

const REFERENCE_TOPOLOGY: &str = include_str!("../data/reference_topology.toml");

impl NetworkTopology {
    /// Builds a topology, checking every structural invariant.
    pub fn new(
        node_count: usize,
        edge_nodes: &[NodeId],
        links: Vec<Link>,
    ) -> Result<Self, TopologyError> {
        let invalid = |msg: String| Err(TopologyError::Validation(msg));
        if node_count == 0 {
            return invalid("node count must be positive".into());
        }
        let mut edge = vec![false; node_count];
        for &n in edge_nodes {
            if n.0 >= node_count {
                return invalid(format!("edge node {n} is out of range (nodes = {node_count})"));
            }
            edge[n.0] = true;
        }
        let mut index = vec![None; node_count * node_count];
        let mut out = vec![Vec::new(); node_count];
        for (i, l) in links.iter().enumerate() {
            if l.src.0 >= node_count || l.dst.0 >= node_count {
                return invalid(format!(
                    "link #{i} ({} -> {}) references a node >= {node_count}",
                    l.src, l.dst
                ));
            }
            if l.src == l.dst {
                return invalid(format!("link #{i} is a self-loop on node {}", l.src));
            }
            if !(l.bandwidth.is_finite() && l.bandwidth > 0.0) {
                return invalid(format!(
                    "link #{i} ({} -> {}) has non-positive bandwidth {}",
                    l.src, l.dst, l.bandwidth
                ));
            }
            if !(l.prop_delay.is_finite() && l.prop_delay >= 0.0) {
                return invalid(format!(
                    "link #{i} ({} -> {}) has negative delay {}",
                    l.src, l.dst, l.prop_delay
                ));
            }
            let slot = &mut index[l.src.0 * node_count + l.dst.0];
            if slot.is_some() {
                return invalid(format!("duplicate link {} -> {}", l.src, l.dst));
            }
            *slot = Some(i);
            out[l.src.0].push(i);
        }
        for adj in &mut out {
            adj.sort_by_key(|&i| links[i].dst);
        }
        Ok(Self {
            node_count,
            links,
            edge,
            index,
            out,
        })
    }

    pub fn from_toml_str(doc: &str) -> Result<Self, TopologyError> {
        let doc: TopologyDoc =
            toml::from_str(doc).map_err(|e| TopologyError::Parse(e.to_string()))?;
        Self::new(doc.nodes, &doc.edge_nodes, doc.links)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopologyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let doc = TopologyDoc {
            nodes: self.node_count,
            edge_nodes: self.edge_nodes(),
            links: self.links.clone(),
        };
        toml::to_string(&doc).expect("topology serializes")
    }

    /// The shipped 8-node reference topology.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_TOPOLOGY).expect("reference topology is valid")
    }

    pub fn reference_toml() -> &'static str {
        REFERENCE_TOPOLOGY
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, idx: LinkIdx) -> &Link {
        &self.links[idx]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn is_edge(&self, n: NodeId) -> bool {
        self.edge.get(n.0).copied().unwrap_or(false)
    }

    pub fn edge_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&n| self.is_edge(n)).collect()
    }

    pub fn core_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&n| !self.is_edge(n)).collect()
    }

    pub fn link_index(&self, src: NodeId, dst: NodeId) -> Option<LinkIdx> {
        if src.0 >= self.node_count || dst.0 >= self.node_count {
            return None;
        }
        self.index[src.0 * self.node_count + dst.0]
    }

    /// Bandwidth and propagation delay of the directed link `src -> dst`.
    pub fn link_lookup(&self, src: NodeId, dst: NodeId) -> Option<(f64, f64)> {
        self.link_index(src, dst)
            .map(|i| (self.links[i].bandwidth, self.links[i].prop_delay))
    }

    /// Outgoing links of `n`, ordered by destination id.
    pub fn out_links(&self, n: NodeId) -> impl Iterator<Item = &Link> + '_ {
        self.out[n.0].iter().map(move |&i| &self.links[i])
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.out[n.0].len()
    }

    pub fn mean_bandwidth(&self) -> f64 {
        if self.links.is_empty() {
            return 0.0;
        }
        self.links.iter().map(|l| l.bandwidth).sum::<f64>() / self.links.len() as f64
    }

    /// Minimum total propagation delay from `src` to `dst`.
    pub fn shortest_delay(&self, src: NodeId, dst: NodeId) -> Option<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut heap = BinaryHeap::new();
        dist[src.0] = 0.0;
        heap.push(Reverse((OrdF64(0.0), src.0)));
        while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
            if u == dst.0 {
                return Some(d);
            }
            if d > dist[u] {
                continue;
            }
            for l in self.out_links(NodeId(u)) {
                let nd = d + l.prop_delay;
                if nd < dist[l.dst.0] {
                    dist[l.dst.0] = nd;
                    heap.push(Reverse((OrdF64(nd), l.dst.0)));
                }
            }
        }
        None
    }
}

/// Totally ordered `f64` for priority queues.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OrdF64(pub f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
