//! Per-slot throughput, link utilization and path length.
//!
//! Loss follows a bottleneck model: every overloaded link scales its
//! traffic by `bandwidth / offered`, and a flow delivers its rate times the
//! smallest factor on its path.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::topology::{NetworkTopology, NodeId};
use crate::traffic::Flow;

pub const CSV_HEADER: &str = "slot,scheme,throughput,avg_util,avg_path_len,loss";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub slot: usize,
    pub throughput: f64,
    pub offered: f64,
    pub avg_link_utilization: f64,
    /// Mean hop count; 0 when there are no flows.
    pub avg_path_length: f64,
    /// `false` when there were no flows to average over.
    pub path_length_defined: bool,
    /// Offered rate per directed link, indexed like `NetworkTopology::links`.
    pub per_link_load: Vec<f64>,
    pub packet_loss: f64,
}

impl MetricsSample {
    pub fn max_link_utilization(&self, topo: &NetworkTopology) -> f64 {
        max_utilization(&self.per_link_load, topo)
    }

    pub fn csv_row(&self, scheme: &str) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            self.slot,
            scheme,
            self.throughput,
            self.avg_link_utilization,
            self.avg_path_length,
            self.packet_loss
        )
    }
}

/// Offered rate on each directed link.
///
/// # Panics
/// If a path uses a link missing from `topo`.
pub fn link_loads(flows: &[Flow], paths: &[Vec<NodeId>], topo: &NetworkTopology) -> Vec<f64> {
    let mut load = vec![0.0; topo.links().len()];
    for (f, path) in flows.iter().zip(paths) {
        for w in path.windows(2) {
            let i = topo
                .link_index(w[0], w[1])
                .unwrap_or_else(|| panic!("path uses missing link {}->{}", w[0], w[1]));
            load[i] += f.rate;
        }
    }
    load
}

/// Highest offered/bandwidth ratio over all links (unclamped).
pub fn max_utilization(load: &[f64], topo: &NetworkTopology) -> f64 {
    load.iter()
        .zip(topo.links())
        .map(|(l, link)| l / link.bandwidth)
        .fold(0.0, f64::max)
}

fn scale_factors(load: &[f64], topo: &NetworkTopology) -> Vec<f64> {
    load.iter()
        .zip(topo.links())
        .map(|(&l, link)| if l > link.bandwidth { link.bandwidth / l } else { 1.0 })
        .collect()
}

pub fn delivered_rates(flows: &[Flow], paths: &[Vec<NodeId>], topo: &NetworkTopology) -> Vec<f64> {
    let load = link_loads(flows, paths, topo);
    delivered_with(flows, paths, topo, &load)
}

fn delivered_with(
    flows: &[Flow],
    paths: &[Vec<NodeId>],
    topo: &NetworkTopology,
    load: &[f64],
) -> Vec<f64> {
    let factor = scale_factors(load, topo);
    flows
        .iter()
        .zip(paths)
        .map(|(f, path)| {
            let worst = path
                .windows(2)
                .filter_map(|w| topo.link_index(w[0], w[1]))
                .map(|i| factor[i])
                .fold(1.0, f64::min);
            f.rate * worst
        })
        .collect()
}

pub fn compute_sample(
    slot: usize,
    flows: &[Flow],
    paths: &[Vec<NodeId>],
    topo: &NetworkTopology,
) -> MetricsSample {
    assert_eq!(flows.len(), paths.len(), "one path per flow");
    let load = link_loads(flows, paths, topo);
    let delivered = delivered_with(flows, paths, topo, &load);
    let throughput: f64 = delivered.iter().sum();
    let offered: f64 = flows.iter().map(|f| f.rate).sum();
    let n_links = topo.links().len();
    let avg_link_utilization = if n_links == 0 {
        0.0
    } else {
        load.iter()
            .zip(topo.links())
            .map(|(l, link)| (l / link.bandwidth).min(1.0))
            .sum::<f64>()
            / n_links as f64
    };
    let path_length_defined = !flows.is_empty();
    let avg_path_length = if path_length_defined {
        paths.iter().map(|p| p.len().saturating_sub(1)).sum::<usize>() as f64 / flows.len() as f64
    } else {
        0.0
    };
    MetricsSample {
        slot,
        throughput,
        offered,
        avg_link_utilization,
        avg_path_length,
        path_length_defined,
        per_link_load: load,
        packet_loss: (offered - throughput).max(0.0),
    }
}

/// Renders samples as CSV, header first.
pub fn to_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a MetricsSample)>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (scheme, s) in rows {
        let _ = writeln!(out, "{}", s.csv_row(scheme));
    }
    out
}
