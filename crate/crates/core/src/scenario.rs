//! Scenario files: everything one simulation run needs, in TOML.
//!
//! ```toml
//! name = "scenario3"
//! topology = "reference"        # or a path relative to this file
//! slots = 20
//! growth_max = 0.10
//! seed = 1
//! scheme = "proposed-ffr"
//!
//! [traffic]
//! bandwidth_fraction = 0.08
//! flow_scale = 0.6
//! max_flows_per_source = 10
//!
//! [lsp_plan]
//! kind = "auto"
//! k = 2
//! ```
//!
//! The scenario-level `seed` and `growth_max` take precedence over the
//! same keys inside `[traffic]`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffr::FlowOrder;
use crate::flow_rerouting::ReservationMode;
use crate::topology::{NetworkTopology, NodeId, TopologyError};
use crate::traffic::TrafficConfig;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario: `{key}` {message}")]
    Invalid { key: &'static str, message: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[serde(alias = "exact")]
    ProposedExact,
    #[serde(alias = "ffr")]
    ProposedFfr,
    #[serde(alias = "baseline")]
    ShortestPath,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::ShortestPath, Scheme::ProposedExact, Scheme::ProposedFfr];

    /// Short label used in CSV rows and logs.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::ProposedExact => "exact",
            Scheme::ProposedFfr => "ffr",
            Scheme::ShortestPath => "baseline",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "proposed-exact" => Ok(Scheme::ProposedExact),
            "ffr" | "proposed-ffr" => Ok(Scheme::ProposedFfr),
            "baseline" | "shortest-path" => Ok(Scheme::ShortestPath),
            other => Err(format!("unknown scheme `{other}` (expected exact, ffr or baseline)")),
        }
    }
}

fn default_k() -> usize {
    2
}

fn default_stretch() -> f64 {
    2.0
}

/// How the LSPs present at slot 0 are laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LspPlan {
    /// `k` shortest delay-feasible paths per ordered edge pair; each LSP gets
    /// an equal share of its bottleneck link's usable bandwidth.
    Auto {
        #[serde(default = "default_k")]
        k: usize,
        /// Delay budget as a multiple of the pair's shortest delay.
        #[serde(default = "default_stretch")]
        delay_stretch: f64,
    },
    /// Explicit LSPs, in order.
    Explicit {
        lsps: Vec<LspSpec>,
        #[serde(default = "default_stretch")]
        delay_stretch: f64,
    },
}

impl Default for LspPlan {
    fn default() -> Self {
        LspPlan::Auto {
            k: default_k(),
            delay_stretch: default_stretch(),
        }
    }
}

impl LspPlan {
    pub fn delay_stretch(&self) -> f64 {
        match self {
            LspPlan::Auto { delay_stretch, .. } | LspPlan::Explicit { delay_stretch, .. } => {
                *delay_stretch
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LspSpec {
    pub path: Vec<NodeId>,
    pub capacity: f64,
}

/// A flow given verbatim instead of drawn from the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub src: NodeId,
    pub dst: NodeId,
    pub rate: f64,
    pub max_delay: f64,
}

fn default_mu() -> f64 {
    0.9
}

fn default_interval() -> usize {
    5
}

fn default_margin() -> f64 {
    0.25
}

fn default_min_capacity() -> f64 {
    1.0
}

fn default_budget() -> u64 {
    crate::flow_rerouting::DEFAULT_NODE_BUDGET
}

fn default_scheme() -> Scheme {
    Scheme::ProposedFfr
}

fn default_topology() -> String {
    "reference".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    /// `"reference"` or a topology file path, relative to the scenario file.
    #[serde(default = "default_topology")]
    pub topology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<TrafficConfig>,
    /// Fixed flow set; used when `traffic` is absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<FlowSpec>,
    pub slots: usize,
    #[serde(default)]
    pub growth_max: f64,
    /// Re-routing fires when the most loaded link exceeds this fraction.
    #[serde(default = "default_mu")]
    pub mu_trigger: f64,
    /// Usable fraction of each link for reservations.
    #[serde(default = "default_mu")]
    pub mu_headroom: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub lsp_plan: LspPlan,
    #[serde(default = "default_interval")]
    pub rerouting_interval: usize,
    #[serde(default)]
    pub seed: u64,
    /// Separates scenarios that share every generator parameter: two
    /// scenarios with different streams draw different flows for one seed.
    #[serde(default)]
    pub stream: u64,
    #[serde(default)]
    pub reservation: ReservationMode,
    #[serde(default)]
    pub flow_order: FlowOrder,
    /// Spare capacity given to an LSP above its load when LSPs are rebuilt.
    #[serde(default = "default_margin")]
    pub recreation_margin: f64,
    #[serde(default = "default_min_capacity")]
    pub min_lsp_capacity: f64,
    #[serde(default = "default_budget")]
    pub node_budget: u64,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// A scenario on the built-in topology with generated traffic.
    pub fn new(traffic: TrafficConfig, slots: usize, growth_max: f64, seed: u64) -> Self {
        Self {
            name: String::new(),
            topology: default_topology(),
            traffic: Some(traffic),
            flows: Vec::new(),
            slots,
            growth_max,
            mu_trigger: default_mu(),
            mu_headroom: default_mu(),
            scheme: default_scheme(),
            lsp_plan: LspPlan::default(),
            rerouting_interval: default_interval(),
            seed,
            stream: 0,
            reservation: ReservationMode::default(),
            flow_order: FlowOrder::default(),
            recreation_margin: default_margin(),
            min_lsp_capacity: default_min_capacity(),
            node_budget: default_budget(),
            base_dir: None,
        }
    }

    pub fn from_toml_str(doc: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(doc).map_err(|e| ScenarioError::Parse {
            path: PathBuf::from("<string>"),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let doc = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = toml::from_str(&doc).map_err(|e| ScenarioError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |key, message: &str| {
            Err(ScenarioError::Invalid {
                key,
                message: message.to_string(),
            })
        };
        if self.slots < 1 {
            return bad("slots", "must be at least 1");
        }
        if !(self.growth_max >= 0.0 && self.growth_max.is_finite()) {
            return bad("growth_max", "must be a non-negative number");
        }
        if !(self.mu_trigger > 0.0 && self.mu_trigger <= 1.0) {
            return bad("mu_trigger", "must lie in (0, 1]");
        }
        if !(self.mu_headroom > 0.0 && self.mu_headroom <= 1.0) {
            return bad("mu_headroom", "must lie in (0, 1]");
        }
        if self.rerouting_interval < 1 {
            return bad("rerouting_interval", "must be at least 1");
        }
        if self.recreation_margin.is_nan() || self.recreation_margin < 0.0 {
            return bad("recreation_margin", "must be non-negative");
        }
        if self.min_lsp_capacity.is_nan() || self.min_lsp_capacity <= 0.0 {
            return bad("min_lsp_capacity", "must be positive");
        }
        if self.traffic.is_none() && self.flows.is_empty() {
            return bad("traffic", "is required unless `flows` lists the flows explicitly");
        }
        if self.traffic.is_some() && !self.flows.is_empty() {
            return bad("flows", "cannot be combined with `traffic`");
        }
        if let Some(t) = &self.traffic {
            if let Err(e) = t.validate() {
                return bad("traffic", &e.to_string());
            }
        }
        match &self.lsp_plan {
            LspPlan::Auto { k, .. } if *k < 1 => return bad("lsp_plan.k", "must be at least 1"),
            LspPlan::Explicit { lsps, .. } if lsps.is_empty() => {
                return bad("lsp_plan.lsps", "must not be empty")
            }
            _ => {}
        }
        if self.lsp_plan.delay_stretch().is_nan() || self.lsp_plan.delay_stretch() < 1.0 {
            return bad("lsp_plan.delay_stretch", "must be at least 1");
        }
        Ok(())
    }

    /// Seed of all randomness in a run, combining `seed` and `stream`.
    pub fn run_seed(&self) -> u64 {
        self.seed ^ self.stream.rotate_left(32)
    }

    /// Traffic parameters with the scenario-level seed and growth applied.
    pub fn effective_traffic(&self) -> Option<TrafficConfig> {
        self.traffic.clone().map(|t| TrafficConfig {
            seed: self.run_seed(),
            growth_max: self.growth_max,
            ..t
        })
    }

    pub fn load_topology(&self) -> Result<NetworkTopology, ScenarioError> {
        if self.topology == "reference" {
            return Ok(NetworkTopology::reference());
        }
        let p = Path::new(&self.topology);
        let full = match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        Ok(NetworkTopology::load(full)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
name = "s"
slots = 3
growth_max = 0.1
seed = 4
scheme = "exact"

[traffic]
bandwidth_fraction = 0.08
flow_scale = 0.6
max_flows_per_source = 10
seed = 99
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ScenarioConfig::from_toml_str(DOC).unwrap();
        assert_eq!(c.scheme, Scheme::ProposedExact);
        assert_eq!(c.lsp_plan, LspPlan::default());
        assert_eq!(c.rerouting_interval, 5);
        assert_eq!(c.mu_trigger, 0.9);
        let t = c.effective_traffic().unwrap();
        assert_eq!(t.seed, 4);
        assert_eq!(t.growth_max, 0.1);
    }

    #[test]
    fn echo_round_trips() {
        let c = ScenarioConfig::from_toml_str(DOC).unwrap();
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ScenarioConfig::from_toml_str(&format!("{DOC}\nbogus = 1\n")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn invalid_value_names_the_key() {
        let doc = DOC.replace("slots = 3", "slots = 0");
        let err = ScenarioConfig::from_toml_str(&doc).unwrap_err();
        assert!(err.to_string().contains("`slots`"), "{err}");
    }

    #[test]
    fn scheme_names() {
        assert_eq!("ffr".parse::<Scheme>(), Ok(Scheme::ProposedFfr));
        assert_eq!("shortest-path".parse::<Scheme>(), Ok(Scheme::ShortestPath));
        assert!("ecmp".parse::<Scheme>().is_err());
    }
}
