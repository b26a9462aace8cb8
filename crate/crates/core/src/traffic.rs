//! Stochastic flow population and per-slot rate growth.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so a seed reproduces the same flows on every platform.
//!
//! Each edge switch emits a truncated-geometric number of flows with success
//! probability `1 / (F_s * tau * N_S)`. Flow rates are uniform on
//! `(0, 2 * B_f * mean_bandwidth]`, destinations are uniform over the other
//! edge switches, and each flow tolerates `delay_stretch` times the delay of
//! its shortest path.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::topology::{NetworkTopology, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub usize);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// A fluid demand between two edge switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub id: FlowId,
    pub src: NodeId,
    pub dst: NodeId,
    pub rate: f64,
    pub max_delay: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrafficError {
    #[error("invalid traffic configuration: {0}")]
    Config(String),
}

/// Support of the per-source flow count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountSupport {
    /// `{1, ..., F_m}`: every edge switch emits at least one flow.
    #[default]
    FromOne,
    /// `{0, ..., F_m}`.
    FromZero,
}

fn default_tau() -> f64 {
    1.0
}

fn default_stretch() -> f64 {
    2.0
}

/// Traffic generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    /// `B_f`: mean flow rate as a fraction of the mean link bandwidth.
    pub bandwidth_fraction: f64,
    /// `F_s`.
    pub flow_scale: f64,
    /// `F_m`: maximum number of flows per edge switch.
    pub max_flows_per_source: usize,
    /// Upper bound of the uniform per-slot growth factor.
    #[serde(default)]
    pub growth_max: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Tolerable delay as a multiple of the shortest-path delay.
    #[serde(default = "default_stretch")]
    pub delay_stretch: f64,
    #[serde(default)]
    pub count_support: CountSupport,
    /// Redraw the population until it has exactly this many flows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_flow_count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl TrafficConfig {
    pub fn new(bandwidth_fraction: f64, flow_scale: f64, max_flows_per_source: usize) -> Self {
        Self {
            bandwidth_fraction,
            flow_scale,
            max_flows_per_source,
            growth_max: 0.0,
            tau: default_tau(),
            delay_stretch: default_stretch(),
            count_support: CountSupport::default(),
            target_flow_count: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        let err = |m: &str| Err(TrafficError::Config(m.to_string()));
        if !(self.bandwidth_fraction > 0.0 && self.bandwidth_fraction <= 1.0) {
            return err("bandwidth_fraction must lie in (0, 1]");
        }
        if self.flow_scale.is_nan() || self.flow_scale <= 0.0 {
            return err("flow_scale must be positive");
        }
        if self.max_flows_per_source < 1 {
            return err("max_flows_per_source must be at least 1");
        }
        if self.growth_max.is_nan() || self.growth_max < 0.0 {
            return err("growth_max must be non-negative");
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return err("tau must be positive");
        }
        if self.delay_stretch.is_nan() || self.delay_stretch < 1.0 {
            return err("delay_stretch must be at least 1");
        }
        Ok(())
    }

    /// `1 / (F_s * tau * N)` with `N` the number of switches.
    pub fn success_probability(&self, node_count: usize) -> f64 {
        1.0 / (self.flow_scale * self.tau * node_count as f64)
    }
}

/// Geometric distribution restricted to a bounded support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGeometric {
    p: f64,
    max: usize,
    support: CountSupport,
}

impl TruncatedGeometric {
    pub fn new(p: f64, max: usize, support: CountSupport) -> Result<Self, TrafficError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(TrafficError::Config(format!(
                "success probability {p} is outside (0, 1]"
            )));
        }
        if max < 1 {
            return Err(TrafficError::Config("maximum count must be at least 1".into()));
        }
        Ok(Self { p, max, support })
    }

    fn lowest(&self) -> usize {
        match self.support {
            CountSupport::FromOne => 1,
            CountSupport::FromZero => 0,
        }
    }

    /// Number of support points.
    fn width(&self) -> usize {
        self.max - self.lowest() + 1
    }

    /// Closed-form expectation.
    pub fn mean(&self) -> f64 {
        let q = 1.0 - self.p;
        let m = self.width() as f64;
        if q == 0.0 {
            return self.lowest() as f64;
        }
        // offset k = K - lowest is a geometric-on-{0..} count truncated at m - 1
        let offset_mean = q / self.p - m * q.powf(m) / (1.0 - q.powf(m));
        self.lowest() as f64 + offset_mean
    }

    /// Inverse-CDF sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let q = 1.0 - self.p;
        let u: f64 = rng.random();
        if q == 0.0 {
            return self.lowest();
        }
        let m = self.width() as f64;
        // smallest k >= 1 with (1 - q^k) / (1 - q^m) > u
        let k = ((1.0 - u * (1.0 - q.powf(m))).ln() / q.ln()).floor() as usize + 1;
        self.lowest() + k.min(self.width()) - 1
    }
}

fn draw_population(
    topo: &NetworkTopology,
    cfg: &TrafficConfig,
    counts: &TruncatedGeometric,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Flow>, TrafficError> {
    let edges = topo.edge_nodes();
    let peak = 2.0 * cfg.bandwidth_fraction * topo.mean_bandwidth();
    let mut flows = Vec::new();
    for &src in &edges {
        let others: Vec<NodeId> = edges.iter().copied().filter(|&n| n != src).collect();
        for _ in 0..counts.sample(rng) {
            let dst = others[rng.random_range(0..others.len())];
            let u: f64 = rng.random();
            let rate = peak * (1.0 - u);
            let shortest = topo.shortest_delay(src, dst).ok_or_else(|| {
                TrafficError::Config(format!("edge switches {src} and {dst} are disconnected"))
            })?;
            flows.push(Flow {
                id: FlowId(flows.len()),
                src,
                dst,
                rate,
                max_delay: cfg.delay_stretch * shortest,
            });
        }
    }
    Ok(flows)
}

const MAX_REDRAWS: usize = 100_000;

/// Draws the initial flow population. Deterministic in `(topo, cfg)`.
pub fn generate_flows(
    topo: &NetworkTopology,
    cfg: &TrafficConfig,
) -> Result<Vec<Flow>, TrafficError> {
    cfg.validate()?;
    let edges = topo.edge_nodes();
    if edges.len() < 2 {
        return Err(TrafficError::Config(
            "the topology needs at least two edge switches".into(),
        ));
    }
    let counts = TruncatedGeometric::new(
        cfg.success_probability(topo.node_count()),
        cfg.max_flows_per_source,
        cfg.count_support,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let Some(target) = cfg.target_flow_count else {
        return draw_population(topo, cfg, &counts, &mut rng);
    };
    let lo = edges.len() * counts.lowest();
    let hi = edges.len() * cfg.max_flows_per_source;
    if target < lo || target > hi {
        return Err(TrafficError::Config(format!(
            "target_flow_count {target} is unreachable: {} edge switches emit between {lo} and {hi} flows",
            edges.len()
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let flows = draw_population(topo, cfg, &counts, &mut rng)?;
        if flows.len() == target {
            return Ok(flows);
        }
    }
    Err(TrafficError::Config(format!(
        "no population of {target} flows after {MAX_REDRAWS} redraws"
    )))
}

/// Multiplies every rate by `1 + u`, `u ~ Uniform(0, growth_max)`, drawing
/// one `u` per flow in order from a fresh generator seeded with `seed`.
pub fn grow_flows(flows: &[Flow], growth_max: f64, seed: u64) -> Vec<Flow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    flows
        .iter()
        .map(|f| {
            let u: f64 = rng.random();
            Flow {
                rate: f.rate * (1.0 + u * growth_max),
                ..f.clone()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario1(seed: u64) -> TrafficConfig {
        TrafficConfig {
            seed,
            growth_max: 0.02,
            ..TrafficConfig::new(0.08, 0.8, 10)
        }
    }

    // direct summation over the support, independent of the closed form
    fn summed_mean(p: f64, max: usize, support: CountSupport) -> f64 {
        let q = 1.0 - p;
        let lo = match support {
            CountSupport::FromOne => 1,
            CountSupport::FromZero => 0,
        };
        let weights: Vec<(usize, f64)> =
            (lo..=max).map(|k| (k, q.powi((k - lo) as i32))).collect();
        let z: f64 = weights.iter().map(|(_, w)| w).sum();
        weights.iter().map(|&(k, w)| k as f64 * w).sum::<f64>() / z
    }

    #[test]
    fn closed_form_mean_matches_summation() {
        for &p in &[0.05, 0.15625, 0.3, 0.9, 1.0] {
            for &m in &[1, 2, 10, 25] {
                for s in [CountSupport::FromOne, CountSupport::FromZero] {
                    let d = TruncatedGeometric::new(p, m, s).unwrap();
                    assert!(
                        (d.mean() - summed_mean(p, m, s)).abs() < 1e-9,
                        "p={p} m={m} {s:?}: {} vs {}",
                        d.mean(),
                        summed_mean(p, m, s)
                    );
                }
            }
        }
    }

    #[test]
    fn empirical_mean_within_one_percent() {
        let topo = NetworkTopology::reference();
        let cfg = scenario1(0);
        let d = TruncatedGeometric::new(
            cfg.success_probability(topo.node_count()),
            cfg.max_flows_per_source,
            CountSupport::FromOne,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut total = 0usize;
        for _ in 0..n {
            let k = d.sample(&mut rng);
            assert!((1..=10).contains(&k));
            total += k;
        }
        let empirical = total as f64 / n as f64;
        assert!((empirical / d.mean() - 1.0).abs() < 0.01, "{empirical} vs {}", d.mean());
    }

    #[test]
    fn zero_support_can_emit_nothing() {
        let d = TruncatedGeometric::new(0.9, 3, CountSupport::FromZero).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).any(|_| d.sample(&mut rng) == 0));
    }

    #[test]
    fn invalid_probability_is_a_config_error() {
        let topo = NetworkTopology::reference();
        // 1 / (0.1 * 1 * 8) > 1
        let cfg = TrafficConfig::new(0.08, 0.1, 10);
        assert!(matches!(generate_flows(&topo, &cfg), Err(TrafficError::Config(_))));
    }

    #[test]
    fn generation_is_deterministic_and_well_formed() {
        let topo = NetworkTopology::reference();
        let a = generate_flows(&topo, &scenario1(7)).unwrap();
        let b = generate_flows(&topo, &scenario1(7)).unwrap();
        assert_eq!(a, b);
        let peak = 2.0 * 0.08 * 100.0;
        for (i, f) in a.iter().enumerate() {
            assert_eq!(f.id, FlowId(i));
            assert!(f.rate > 0.0 && f.rate <= peak);
            assert_ne!(f.src, f.dst);
            assert!(topo.is_edge(f.src) && topo.is_edge(f.dst));
            assert_eq!(f.max_delay, 2.0 * topo.shortest_delay(f.src, f.dst).unwrap());
        }
        let c = generate_flows(&topo, &scenario1(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn target_flow_count_is_honoured() {
        let topo = NetworkTopology::reference();
        let cfg = TrafficConfig {
            target_flow_count: Some(20),
            ..scenario1(3)
        };
        assert_eq!(generate_flows(&topo, &cfg).unwrap().len(), 20);
        let cfg = TrafficConfig {
            target_flow_count: Some(84),
            ..scenario1(3)
        };
        assert!(generate_flows(&topo, &cfg).is_err());
    }

    #[test]
    fn growth_bounds() {
        let topo = NetworkTopology::reference();
        let flows = generate_flows(&topo, &scenario1(1)).unwrap();
        assert_eq!(grow_flows(&flows, 0.0, 9), flows);
        let grown = grow_flows(&flows, 0.10, 9);
        for (old, new) in flows.iter().zip(&grown) {
            assert!(new.rate >= old.rate && new.rate <= 1.10 * old.rate);
        }
    }

    #[test]
    fn growth_replays_the_seeded_draw() {
        let seed = 1234;
        let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
        // choose growth_max so that the first draw is exactly 2 %
        let growth_max = 0.02 / u;
        let f = Flow {
            id: FlowId(0),
            src: NodeId(0),
            dst: NodeId(1),
            rate: 100.0,
            max_delay: 1.0,
        };
        let grown = grow_flows(&[f], growth_max, seed);
        assert!((grown[0].rate - 102.0).abs() < 1e-9);
    }
}
