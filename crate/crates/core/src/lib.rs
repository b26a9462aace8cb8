//! Time-slot simulation of traffic engineering in a hybrid SDN/MPLS
//! network: flows are re-assigned to existing LSPs when links congest, and
//! LSPs are re-routed when re-assignment alone cannot cope.
//!
//! The pieces can be used on their own:
//!
//! - [`topology`]: the directed network and its TOML format
//! - [`lsp`]: LSPs, flow assignments and the link-to-LSP incidence
//! - [`traffic`]: the stochastic flow generator and per-slot growth
//! - [`flow_rerouting`]: exact minimum-change flow re-assignment
//! - [`lsp_recreation`]: exact minimum-change LSP re-routing
//! - [`ffr`]: the greedy re-routing heuristic
//! - [`baseline`]: load-oblivious shortest-path routing
//! - [`metrics`]: throughput, utilization and path length
//! - [`audit`]: an independent constraint checker
//! - [`scenario`] and [`sim`]: scenario files and the slot loop

pub mod audit;
pub mod baseline;
pub mod ffr;
pub mod flow_rerouting;
pub mod lsp;
pub mod lsp_recreation;
pub mod metrics;
pub mod scenario;
pub mod sim;
pub mod topology;
pub mod traffic;

pub use flow_rerouting::{solve_flow_rerouting, ReroutingProblem, ReroutingSolution, ReservationMode};
pub use lsp::{build_lsp, FlowAssignment, Lsp, LspId, LspRouting};
pub use lsp_recreation::{solve_lsp_recreation, LspRequest, RecreationProblem, RecreationSolution};
pub use scenario::{ScenarioConfig, Scheme};
pub use sim::{run_scenario, run_schemes, RunOptions, RunResult};
pub use topology::{Link, NetworkTopology, NodeId};
pub use traffic::{Flow, FlowId, TrafficConfig};
