//! Routes a flow population along shortest paths and shows how the
//! bottleneck loss model turns overload into lost throughput.
//!
//! cargo run --example baseline_and_metrics

use hybrid_te::baseline::route_all;
use hybrid_te::metrics::{compute_sample, delivered_rates, to_csv};
use hybrid_te::traffic::{generate_flows, grow_flows};
use hybrid_te::{NetworkTopology, TrafficConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topo = NetworkTopology::reference();
    let cfg = TrafficConfig {
        seed: 3,
        ..TrafficConfig::new(0.08, 0.6, 10)
    };
    let mut flows = generate_flows(&topo, &cfg)?;
    let paths = route_all(&flows, &topo)?;

    let mut samples = Vec::new();
    for slot in 0..=20 {
        if slot > 0 {
            flows = grow_flows(&flows, 0.10, slot as u64);
        }
        samples.push(compute_sample(slot, &flows, &paths, &topo));
    }
    print!("{}", to_csv(samples.iter().map(|s| ("baseline", s))));

    let last = samples.last().unwrap();
    let busiest = last
        .per_link_load
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, l)| (topo.link(i), *l))
        .unwrap();
    println!(
        "\nbusiest link {} -> {} carries {:.1} on {:.0} of bandwidth",
        busiest.0.src, busiest.0.dst, busiest.1, busiest.0.bandwidth
    );
    let delivered = delivered_rates(&flows, &paths, &topo);
    let squeezed = flows.iter().zip(&delivered).filter(|(f, d)| **d < f.rate).count();
    println!("{squeezed} of {} flows lose traffic in the final slot", flows.len());
    Ok(())
}
