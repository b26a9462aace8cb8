//! The time-slot loop.
//!
//! Every slot grows the flow rates, checks the trigger (most loaded link
//! above `mu_trigger`, or a periodic slot), re-routes flows with the exact
//! solver or the heuristic, and escalates to LSP re-creation when flow
//! re-routing fails. Escalation happens at most once per slot and is
//! followed by a single re-routing retry; whatever congestion remains is
//! left for the metrics to record. The shortest-path scheme never re-routes.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::baseline::{self, BaselineError};
use crate::ffr;
use crate::flow_rerouting::{solve_flow_rerouting, ReroutingError, ReroutingProblem};
use crate::lsp::{build_lsp, lsp_loads, FlowAssignment, Lsp, LspError, LspId, LspRouting};
use crate::lsp_recreation::{
    enumerate_simple_paths, solve_lsp_recreation, LspRequest, RecreationProblem,
};
use crate::metrics::{self, compute_sample, MetricsSample};
use crate::scenario::{LspPlan, ScenarioConfig, ScenarioError, Scheme};
use crate::topology::{NetworkTopology, NodeId};
use crate::traffic::{generate_flows, grow_flows, Flow, FlowId, TrafficError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Lsp(#[from] LspError),
    #[error(transparent)]
    Unreachable(#[from] BaselineError),
    #[error("scenario is inconsistent with its topology: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write every solver problem and result as JSON under this directory.
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Trigger { max_util: f64, periodic: bool },
    Rerouted { changes: usize, optimal: bool, retry: bool },
    RerouteFailed { reason: String, retry: bool },
    Placed { changes: usize, requests: usize, augmented: usize, retry: bool },
    Recreated { changed_entries: usize, optimal: bool, margin: f64 },
    RecreationFailed { reason: String, margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub slot: usize,
    pub scheme: Scheme,
    pub kind: EventKind,
}

impl Event {
    pub fn is_trigger(&self) -> bool {
        matches!(self.kind, EventKind::Trigger { .. })
    }

    pub fn is_recreation(&self) -> bool {
        matches!(
            self.kind,
            EventKind::Recreated { .. } | EventKind::RecreationFailed { .. }
        )
    }

    pub fn is_solver(&self) -> bool {
        !self.is_trigger()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let retry = |r: bool| if r { " retry" } else { "" };
        write!(f, "slot={} scheme={} ", self.slot, self.scheme)?;
        match &self.kind {
            EventKind::Trigger { max_util, periodic } => {
                write!(f, "trigger max_util={max_util:.4} periodic={periodic}")
            }
            EventKind::Rerouted {
                changes,
                optimal,
                retry: r,
            } => write!(f, "reroute{} ok changes={changes} optimal={optimal}", retry(*r)),
            EventKind::RerouteFailed { reason, retry: r } => {
                write!(f, "reroute{} failed: {reason}", retry(*r))
            }
            EventKind::Placed {
                changes,
                requests,
                augmented,
                retry: r,
            } => write!(
                f,
                "ffr{} changes={changes} augmented={augmented} requests={requests}",
                retry(*r)
            ),
            EventKind::Recreated {
                changed_entries,
                optimal,
                margin,
            } => write!(
                f,
                "recreate ok margin={margin:.2} changed_entries={changed_entries} optimal={optimal}"
            ),
            EventKind::RecreationFailed { reason, margin } => {
                write!(f, "recreate failed margin={margin:.2}: {reason}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: Scheme,
    /// Metrics right after initial placement, before any growth.
    pub initial: MetricsSample,
    /// One sample per slot, slot 1 first.
    pub samples: Vec<MetricsSample>,
    /// Most loaded link's utilization when the trigger was evaluated.
    pub trigger_util: Vec<f64>,
    pub final_lsps: Vec<Lsp>,
    pub final_assignment: Option<FlowAssignment>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub flow_count: usize,
    pub lsp_count: usize,
    pub runs: Vec<SchemeRun>,
    pub events: Vec<Event>,
}

impl RunResult {
    pub fn run(&self, scheme: Scheme) -> Option<&SchemeRun> {
        self.runs.iter().find(|r| r.scheme == scheme)
    }

    /// Slot-major CSV, schemes in run order within a slot.
    pub fn metrics_csv(&self) -> String {
        let slots = self.runs.first().map_or(0, |r| r.samples.len());
        metrics::to_csv(
            (0..slots).flat_map(|t| self.runs.iter().map(move |r| (r.scheme.label(), &r.samples[t]))),
        )
    }

    pub fn events_log(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn config_echo(&self) -> String {
        self.config.to_toml_string()
    }

    /// Writes `metrics.csv`, `events.log` and `config.echo` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), SimError> {
        std::fs::create_dir_all(dir).map_err(|source| SimError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, body) in [
            ("metrics.csv", self.metrics_csv()),
            ("events.log", self.events_log()),
            ("config.echo", self.config_echo()),
        ] {
            write_file(&dir.join(name), &body)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), SimError> {
    std::fs::write(path, body).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Seed of the growth draws at `slot`. All schemes of one run share it, so
/// they see identical rates.
pub fn growth_seed(seed: u64, slot: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(slot as u64)
}

/// Delay budget of an LSP between `src` and `dst`.
fn delay_budget(topo: &NetworkTopology, src: NodeId, dst: NodeId, stretch: f64) -> Option<f64> {
    topo.shortest_delay(src, dst).map(|d| d * stretch)
}

/// `k` LSPs per ordered edge pair along the first `k` delay-feasible paths,
/// each sized to an equal share of `mu` times its bottleneck bandwidth.
/// Returns the LSPs and their delay budgets.
pub fn auto_lsp_plan(
    topo: &NetworkTopology,
    k: usize,
    delay_stretch: f64,
    mu: f64,
) -> Result<(Vec<Lsp>, Vec<f64>), SimError> {
    let edges = topo.edge_nodes();
    let mut paths = Vec::new();
    let mut budgets = Vec::new();
    for &s in &edges {
        for &d in &edges {
            if s == d {
                continue;
            }
            let Some(budget) = delay_budget(topo, s, d, delay_stretch) else {
                continue;
            };
            for p in enumerate_simple_paths(topo, s, d, budget, k) {
                paths.push(p);
                budgets.push(budget);
            }
        }
    }
    let mut per_link = vec![0usize; topo.links().len()];
    for p in &paths {
        for w in p.windows(2) {
            per_link[topo.link_index(w[0], w[1]).expect("enumerated path")] += 1;
        }
    }
    let lsps = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let cap = p
                .windows(2)
                .map(|w| {
                    let l = topo.link_index(w[0], w[1]).expect("enumerated path");
                    mu * topo.link(l).bandwidth / per_link[l] as f64
                })
                .fold(f64::INFINITY, f64::min);
            build_lsp(topo, LspId(i), p, cap)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((lsps, budgets))
}

fn proper(flow: &Flow, lsp: &Lsp) -> bool {
    lsp.src == flow.src && lsp.dst == flow.dst && lsp.prop_delay <= flow.max_delay + 1e-9
}

/// Places each flow, in id order, on its proper LSP with the most free
/// capacity (ties to the lower id).
pub fn initial_placement(flows: &[Flow], lsps: &[Lsp]) -> Result<FlowAssignment, SimError> {
    let mut free: Vec<f64> = lsps.iter().map(|l| l.capacity).collect();
    let mut out = Vec::with_capacity(flows.len());
    for f in flows {
        let best = lsps
            .iter()
            .filter(|l| proper(f, l))
            .map(|l| l.id.0)
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(b) if free[b] >= free[i] => Some(b),
                _ => Some(i),
            })
            .ok_or_else(|| {
                SimError::Config(format!(
                    "flow {} ({} -> {}, max delay {}) has no usable LSP",
                    f.id, f.src, f.dst, f.max_delay
                ))
            })?;
        free[best] -= f.rate;
        out.push(LspId(best));
    }
    Ok(FlowAssignment(out))
}

/// New LSP capacities: current load plus `margin`, never below `floor`.
pub fn redimension(
    lsps: &[Lsp],
    flows: &[Flow],
    assignment: &FlowAssignment,
    margin: f64,
    floor: f64,
) -> Vec<f64> {
    lsp_loads(lsps.len(), flows, assignment)
        .into_iter()
        .map(|l| (l * (1.0 + margin)).max(floor))
        .collect()
}

fn lsp_paths(lsps: &[Lsp], fr: &FlowAssignment) -> Vec<Vec<NodeId>> {
    fr.0.iter().map(|l| lsps[l.0].path.clone()).collect()
}

struct Setup {
    topo: NetworkTopology,
    flows: Vec<Flow>,
    lsps: Vec<Lsp>,
    budgets: Vec<f64>,
}

fn setup(cfg: &ScenarioConfig) -> Result<Setup, SimError> {
    let topo = cfg.load_topology()?;
    let flows = match cfg.effective_traffic() {
        Some(t) => generate_flows(&topo, &t)?,
        None => cfg
            .flows
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.src.0 >= topo.node_count() || s.dst.0 >= topo.node_count() || s.src == s.dst {
                    return Err(SimError::Config(format!("flow {i} has bad endpoints")));
                }
                if !(s.rate >= 0.0 && s.max_delay >= 0.0) {
                    return Err(SimError::Config(format!("flow {i} has a negative rate or delay")));
                }
                Ok(Flow {
                    id: FlowId(i),
                    src: s.src,
                    dst: s.dst,
                    rate: s.rate,
                    max_delay: s.max_delay,
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let stretch = cfg.lsp_plan.delay_stretch();
    let (lsps, budgets) = match &cfg.lsp_plan {
        LspPlan::Auto { k, .. } => auto_lsp_plan(&topo, *k, stretch, cfg.mu_headroom)?,
        LspPlan::Explicit { lsps, .. } => {
            let built = lsps
                .iter()
                .enumerate()
                .map(|(i, s)| build_lsp(&topo, LspId(i), &s.path, s.capacity))
                .collect::<Result<Vec<_>, _>>()?;
            let budgets = built
                .iter()
                .map(|l| {
                    delay_budget(&topo, l.src, l.dst, stretch)
                        .unwrap_or(l.prop_delay)
                        .max(l.prop_delay)
                })
                .collect();
            (built, budgets)
        }
    };
    Ok(Setup {
        topo,
        flows,
        lsps,
        budgets,
    })
}

/// Runs the scheme named in the scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, SimError> {
    run_schemes(cfg, &[cfg.scheme], &RunOptions::default())
}

/// Runs several schemes over the same flows and growth draws. Schemes run
/// on separate threads; the result does not depend on their timing.
pub fn run_schemes(
    cfg: &ScenarioConfig,
    schemes: &[Scheme],
    opts: &RunOptions,
) -> Result<RunResult, SimError> {
    cfg.validate()?;
    let s = setup(cfg)?;
    if let Some(dir) = &opts.dump_dir {
        std::fs::create_dir_all(dir).map_err(|source| SimError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let outcomes: Vec<Result<(SchemeRun, Vec<Event>), SimError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = schemes
            .iter()
            .map(|&scheme| {
                let s = &s;
                scope.spawn(move || run_one(cfg, s, scheme, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scheme thread panicked"))
            .collect()
    });
    let mut runs = Vec::new();
    let mut events = Vec::new();
    for o in outcomes {
        let (run, ev) = o?;
        runs.push(run);
        events.extend(ev);
    }
    events.sort_by_key(|e| e.slot);
    Ok(RunResult {
        config: cfg.clone(),
        seed: cfg.seed,
        flow_count: s.flows.len(),
        lsp_count: s.lsps.len(),
        runs,
        events,
    })
}

fn run_one(
    cfg: &ScenarioConfig,
    s: &Setup,
    scheme: Scheme,
    opts: &RunOptions,
) -> Result<(SchemeRun, Vec<Event>), SimError> {
    if scheme == Scheme::ShortestPath {
        return run_baseline(cfg, s);
    }
    let fr = initial_placement(&s.flows, &s.lsps)?;
    let initial = compute_sample(0, &s.flows, &lsp_paths(&s.lsps, &fr), &s.topo);
    let mut st = Proposed {
        cfg,
        topo: &s.topo,
        budgets: &s.budgets,
        scheme,
        dump: opts.dump_dir.as_deref(),
        flows: s.flows.clone(),
        lsps: s.lsps.clone(),
        fr,
        events: Vec::new(),
        slot: 0,
    };
    let mut samples = Vec::with_capacity(cfg.slots);
    let mut trigger_util = Vec::with_capacity(cfg.slots);
    for t in 1..=cfg.slots {
        st.slot = t;
        st.flows = grow_flows(&st.flows, cfg.growth_max, growth_seed(cfg.run_seed(), t));
        let load = metrics::link_loads(&st.flows, &lsp_paths(&st.lsps, &st.fr), st.topo);
        let max_util = metrics::max_utilization(&load, st.topo);
        trigger_util.push(max_util);
        let periodic = t % cfg.rerouting_interval == 0;
        if max_util > cfg.mu_trigger || periodic {
            st.log(EventKind::Trigger { max_util, periodic });
            if st.reroute(false)? {
                st.recreate()?;
                st.reroute(true)?;
            }
        }
        samples.push(compute_sample(t, &st.flows, &lsp_paths(&st.lsps, &st.fr), st.topo));
    }
    Ok((
        SchemeRun {
            scheme,
            initial,
            samples,
            trigger_util,
            final_lsps: st.lsps,
            final_assignment: Some(st.fr),
        },
        st.events,
    ))
}

fn run_baseline(cfg: &ScenarioConfig, s: &Setup) -> Result<(SchemeRun, Vec<Event>), SimError> {
    let paths = baseline::route_all(&s.flows, &s.topo)?;
    let initial = compute_sample(0, &s.flows, &paths, &s.topo);
    let mut flows = s.flows.clone();
    let mut samples = Vec::with_capacity(cfg.slots);
    let mut trigger_util = Vec::with_capacity(cfg.slots);
    for t in 1..=cfg.slots {
        flows = grow_flows(&flows, cfg.growth_max, growth_seed(cfg.run_seed(), t));
        let sample = compute_sample(t, &flows, &paths, &s.topo);
        trigger_util.push(sample.max_link_utilization(&s.topo));
        samples.push(sample);
    }
    Ok((
        SchemeRun {
            scheme: Scheme::ShortestPath,
            initial,
            samples,
            trigger_util,
            final_lsps: Vec::new(),
            final_assignment: None,
        },
        Vec::new(),
    ))
}

struct Proposed<'a> {
    cfg: &'a ScenarioConfig,
    topo: &'a NetworkTopology,
    budgets: &'a [f64],
    scheme: Scheme,
    dump: Option<&'a Path>,
    flows: Vec<Flow>,
    lsps: Vec<Lsp>,
    fr: FlowAssignment,
    events: Vec<Event>,
    slot: usize,
}

impl Proposed<'_> {
    fn log(&mut self, kind: EventKind) {
        self.events.push(Event {
            slot: self.slot,
            scheme: self.scheme,
            kind,
        });
    }

    fn dump<P: Serialize, S: Serialize>(
        &self,
        what: &str,
        problem: &P,
        solution: &S,
    ) -> Result<(), SimError> {
        let Some(dir) = self.dump else {
            return Ok(());
        };
        let stem = format!("slot{:03}-{}-{}", self.slot, self.scheme, what);
        let problem = serde_json::to_string_pretty(problem).expect("solver data serializes");
        let solution = serde_json::to_string_pretty(solution).expect("solver data serializes");
        write_file(&dir.join(format!("{stem}.problem.json")), &problem)?;
        write_file(&dir.join(format!("{stem}.solution.json")), &solution)
    }

    /// One flow-level pass. Returns whether LSP re-creation is needed.
    fn reroute(&mut self, retry: bool) -> Result<bool, SimError> {
        match self.scheme {
            Scheme::ProposedExact => {
                let problem = ReroutingProblem::new(self.topo, &self.flows, &self.lsps, &self.fr)
                    .with_mode(self.cfg.reservation, self.cfg.mu_headroom)
                    .with_node_budget(self.cfg.node_budget);
                let result = solve_flow_rerouting(&problem);
                let what = if retry { "reroute-retry" } else { "reroute" };
                self.dump(what, &problem, &result.as_ref().map_err(ToString::to_string))?;
                match result {
                    Ok(sol) => {
                        self.fr = sol.fr_new;
                        self.log(EventKind::Rerouted {
                            changes: sol.changes,
                            optimal: sol.optimal,
                            retry,
                        });
                        Ok(false)
                    }
                    Err(e) => {
                        let escalate = !matches!(e, ReroutingError::Malformed(_));
                        self.log(EventKind::RerouteFailed {
                            reason: e.to_string(),
                            retry,
                        });
                        Ok(escalate)
                    }
                }
            }
            Scheme::ProposedFfr => {
                let out = ffr::ffr(
                    &self.flows,
                    &self.lsps,
                    &self.fr,
                    self.topo,
                    self.cfg.mu_headroom,
                    self.cfg.flow_order,
                );
                let changes = out.assignment.changes_from(&self.fr);
                let augmented = out
                    .augmentation(&self.lsps)
                    .iter()
                    .filter(|&&a| a > 1e-9)
                    .count();
                self.fr = out.assignment;
                self.log(EventKind::Placed {
                    changes,
                    requests: out.requests.len(),
                    augmented,
                    retry,
                });
                Ok(!out.requests.is_empty())
            }
            Scheme::ShortestPath => Ok(false),
        }
    }

    fn recreate(&mut self) -> Result<(), SimError> {
        let lr_old = LspRouting::from_lsps(self.topo.node_count(), &self.lsps);
        let margins = [self.cfg.recreation_margin, 0.0];
        for (attempt, &margin) in margins.iter().enumerate() {
            if attempt > 0 && margin == margins[0] {
                break;
            }
            let caps = redimension(
                &self.lsps,
                &self.flows,
                &self.fr,
                margin,
                self.cfg.min_lsp_capacity,
            );
            let requests: Vec<LspRequest> = self
                .lsps
                .iter()
                .zip(&caps)
                .zip(self.budgets)
                .map(|((l, &capacity), &max_delay)| LspRequest {
                    src: l.src,
                    dst: l.dst,
                    capacity,
                    max_delay,
                })
                .collect();
            let mut problem =
                RecreationProblem::new(self.topo, requests, lr_old.clone(), self.cfg.mu_headroom);
            problem.node_budget = self.cfg.node_budget;
            let result = solve_lsp_recreation(&problem);
            self.dump(
                &format!("recreate-{attempt}"),
                &problem,
                &result.as_ref().map_err(ToString::to_string),
            )?;
            match result {
                Ok(sol) => {
                    self.lsps = sol
                        .lr_new
                        .paths
                        .iter()
                        .zip(&caps)
                        .enumerate()
                        .map(|(i, (p, &c))| build_lsp(self.topo, LspId(i), p, c))
                        .collect::<Result<_, _>>()?;
                    self.log(EventKind::Recreated {
                        changed_entries: sol.changed_entries,
                        optimal: sol.optimal,
                        margin,
                    });
                    return Ok(());
                }
                Err(e) => self.log(EventKind::RecreationFailed {
                    reason: e.to_string(),
                    margin,
                }),
            }
        }
        Ok(())
    }
}
