//! Runs all three schemes on one scenario and prints the per-slot
//! throughput side by side.
//!
//! cargo run --example compare_schemes -- crates/core/scenarios/scenario4.toml

use hybrid_te::sim::{run_schemes, RunOptions};
use hybrid_te::{ScenarioConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/scenarios/scenario4.toml".into());
    let cfg = ScenarioConfig::load(&path)?;
    let r = run_schemes(&cfg, &Scheme::ALL, &RunOptions::default())?;

    println!("{:>4} {:>10} {:>10} {:>10} {:>10}", "slot", "offered", "baseline", "exact", "ffr");
    let tp = |s: Scheme, t: usize| r.run(s).unwrap().samples[t].throughput;
    for t in 0..cfg.slots {
        println!(
            "{:>4} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
            t + 1,
            r.runs[0].samples[t].offered,
            tp(Scheme::ShortestPath, t),
            tp(Scheme::ProposedExact, t),
            tp(Scheme::ProposedFfr, t)
        );
    }
    let recreations = r.events.iter().filter(|e| e.is_recreation()).count();
    println!("{recreations} LSP re-creation attempts");
    Ok(())
}
