//! Runs one scenario over a range of seeds and prints mean throughput of
//! each scheme over the final five slots.
//!
//! cargo run --release --example seed_sweep -- crates/core/scenarios/scenario3.toml 1 10

use hybrid_te::sim::{run_schemes, RunOptions};
use hybrid_te::{ScenarioConfig, Scheme};

fn tail_mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .map(String::as_str)
        .unwrap_or("crates/core/scenarios/scenario3.toml");
    let lo: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let hi: u64 = args.get(2).map_or(Ok(10), |s| s.parse())?;
    let base = ScenarioConfig::load(path)?;

    println!(
        "{:>4} {:>5} {:>10} {:>10} {:>10} {:>9} {:>7} {:>7} {:>7}",
        "seed", "flows", "baseline", "exact", "ffr", "bl_loss", "ex/bl", "ffr/bl", "recr"
    );
    for seed in lo..=hi {
        let cfg = ScenarioConfig { seed, ..base.clone() };
        let r = run_schemes(&cfg, &Scheme::ALL, &RunOptions::default())?;
        let tail = |s: Scheme, f: fn(&hybrid_te::metrics::MetricsSample) -> f64| {
            let run = r.run(s).expect("scheme ran");
            tail_mean(run.samples[run.samples.len().saturating_sub(5)..].iter().map(f))
        };
        let bl = tail(Scheme::ShortestPath, |s| s.throughput);
        let ex = tail(Scheme::ProposedExact, |s| s.throughput);
        let ff = tail(Scheme::ProposedFfr, |s| s.throughput);
        let loss = tail(Scheme::ShortestPath, |s| s.packet_loss);
        let recr = r.events.iter().filter(|e| e.is_recreation()).count();
        println!(
            "{seed:>4} {:>5} {bl:>10.2} {ex:>10.2} {ff:>10.2} {loss:>9.2} {:>7.3} {:>7.3} {recr:>7}",
            r.flow_count,
            ex / bl,
            ff / bl
        );
    }
    Ok(())
}
