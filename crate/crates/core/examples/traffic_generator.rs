//! Draws flow populations for the two flow-scale settings and shows how
//! rates grow over a few slots.
//!
//! cargo run --example traffic_generator

use hybrid_te::traffic::{generate_flows, grow_flows, CountSupport, TruncatedGeometric};
use hybrid_te::{NetworkTopology, TrafficConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topo = NetworkTopology::reference();
    for fs in [0.8, 0.6] {
        let cfg = TrafficConfig {
            seed: 42,
            ..TrafficConfig::new(0.08, fs, 10)
        };
        let p = cfg.success_probability(topo.node_count());
        let dist = TruncatedGeometric::new(p, cfg.max_flows_per_source, CountSupport::FromOne)?;
        let flows = generate_flows(&topo, &cfg)?;
        println!(
            "F_s={fs}: p={p:.4}, expected {:.2} flows per edge switch, drew {} flows",
            dist.mean(),
            flows.len()
        );
        for f in flows.iter().take(5) {
            println!("  {} {} -> {} rate {:.2} max delay {}", f.id, f.src, f.dst, f.rate, f.max_delay);
        }
    }

    let cfg = TrafficConfig {
        seed: 7,
        ..TrafficConfig::new(0.08, 0.6, 10)
    };
    let mut flows = generate_flows(&topo, &cfg)?;
    let total = |fs: &[hybrid_te::Flow]| fs.iter().map(|f| f.rate).sum::<f64>();
    println!("\ngrowth at up to 10% per slot:");
    println!("  slot 0: total demand {:.2}", total(&flows));
    for slot in 1..=5 {
        flows = grow_flows(&flows, 0.10, slot);
        println!("  slot {slot}: total demand {:.2}", total(&flows));
    }
    Ok(())
}
