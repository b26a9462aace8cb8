//! Re-routes LSPs whose reservations no longer fit, changing as few
//! link assignments as possible.
//!
//! cargo run --example lsp_recreation

use hybrid_te::lsp_recreation::enumerate_simple_paths;
use hybrid_te::topology::{Link, NetworkTopology, NodeId};
use hybrid_te::{solve_lsp_recreation, LspRequest, LspRouting, RecreationProblem};

fn ids(p: &[usize]) -> Vec<NodeId> {
    p.iter().copied().map(NodeId).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 0 -> 1 -> 3 shares link 1->3 with 2 -> 1 -> 3; a detour runs 2 -> 4 -> 3
    let mut links = Vec::new();
    for (s, d) in [(0, 1), (2, 1), (1, 3), (2, 4), (4, 3)] {
        links.push(Link {
            src: NodeId(s),
            dst: NodeId(d),
            bandwidth: 10.0,
            prop_delay: 1.0,
        });
    }
    let topo = NetworkTopology::new(5, &[], links)?;

    let requests = vec![
        LspRequest { src: NodeId(0), dst: NodeId(3), capacity: 6.0, max_delay: 4.0 },
        LspRequest { src: NodeId(2), dst: NodeId(3), capacity: 6.0, max_delay: 4.0 },
    ];
    let old = LspRouting {
        node_count: 5,
        paths: vec![ids(&[0, 1, 3]), ids(&[2, 1, 3])],
    };
    for r in &requests {
        let paths = enumerate_simple_paths(&topo, r.src, r.dst, r.max_delay, 10);
        println!("candidate paths {} -> {}: {paths:?}", r.src, r.dst);
    }

    let sol = solve_lsp_recreation(&RecreationProblem::new(&topo, requests, old.clone(), 1.0))?;
    for (i, (before, after)) in old.paths.iter().zip(&sol.lr_new.paths).enumerate() {
        println!("lsp{i}: {before:?} -> {after:?}");
    }
    println!("changed link entries: {}, optimal: {}", sol.changed_entries, sol.optimal);
    Ok(())
}
