//! Runs a scenario file with one scheme, writes the three output files and
//! prints the event log.
//!
//! cargo run --example run_scenario -- crates/core/scenarios/scenario3.toml exact /tmp/run

use std::path::PathBuf;

use hybrid_te::sim::{run_schemes, RunOptions};
use hybrid_te::{ScenarioConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .cloned()
        .unwrap_or_else(|| "crates/core/scenarios/scenario3.toml".into());
    let mut cfg = ScenarioConfig::load(&path)?;
    if let Some(s) = args.get(1) {
        cfg.scheme = s.parse::<Scheme>()?;
    }
    let out = args
        .get(2)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hybrid-te-run"));

    let result = run_schemes(&cfg, &[cfg.scheme], &RunOptions::default())?;
    result.write_outputs(&out)?;
    println!(
        "{} with {} flows over {} LSPs; outputs in {}",
        cfg.scheme,
        result.flow_count,
        result.lsp_count,
        out.display()
    );
    print!("{}", result.events_log());
    let run = &result.runs[0];
    let first = &run.samples[0];
    let last = run.samples.last().unwrap();
    println!(
        "throughput {:.1} -> {:.1}, loss {:.1} -> {:.1}",
        first.throughput, last.throughput, first.packet_loss, last.packet_loss
    );
    Ok(())
}
