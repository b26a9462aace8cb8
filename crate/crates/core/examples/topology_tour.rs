//! Loads the built-in reference topology and prints its structure.
//!
//! cargo run --example topology_tour

use hybrid_te::NetworkTopology;

fn main() {
    let t = NetworkTopology::reference();
    println!("{} switches, {} directed links", t.node_count(), t.links().len());
    println!("edge (OpenFlow) switches: {:?}", t.edge_nodes());
    println!("core (MPLS) routers:      {:?}", t.core_nodes());
    println!("mean link bandwidth: {}", t.mean_bandwidth());

    println!("\nshortest propagation delay between edge switches:");
    for s in t.edge_nodes() {
        let row: Vec<String> = t
            .edge_nodes()
            .into_iter()
            .map(|d| format!("{:>4}", t.shortest_delay(s, d).unwrap_or(f64::NAN)))
            .collect();
        println!("  {s}: {}", row.join(""));
    }

    println!("\nTOML form:\n{}", t.to_toml_string());
}
