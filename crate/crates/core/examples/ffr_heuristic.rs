//! One pass of the greedy re-routing heuristic: a flow that fits stays,
//! one that does not moves, one that fits nowhere stretches an LSP, and
//! one too large for any stretch becomes a re-creation request.
//!
//! cargo run --example ffr_heuristic

use hybrid_te::audit::audit_ffr;
use hybrid_te::ffr::{ffr, FlowOrder};
use hybrid_te::lsp::{build_lsp, FlowAssignment, LspId};
use hybrid_te::topology::{Link, NetworkTopology, NodeId};
use hybrid_te::traffic::{Flow, FlowId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let link = |s, d| Link {
        src: NodeId(s),
        dst: NodeId(d),
        bandwidth: 20.0,
        prop_delay: 1.0,
    };
    let topo = NetworkTopology::new(
        4,
        &[NodeId(0), NodeId(3)],
        vec![link(0, 1), link(1, 3), link(0, 2), link(2, 3)],
    )?;
    let lsps = vec![
        build_lsp(&topo, LspId(0), &[NodeId(0), NodeId(1), NodeId(3)], 8.0)?,
        build_lsp(&topo, LspId(1), &[NodeId(0), NodeId(2), NodeId(3)], 8.0)?,
    ];
    let flows: Vec<Flow> = [7.0, 6.0, 9.0, 30.0]
        .iter()
        .enumerate()
        .map(|(i, &rate)| Flow {
            id: FlowId(i),
            src: NodeId(0),
            dst: NodeId(3),
            rate,
            max_delay: 2.0,
        })
        .collect();
    let old = FlowAssignment(vec![LspId(0); flows.len()]);

    let out = ffr(&flows, &lsps, &old, &topo, 0.9, FlowOrder::DescendingRate);
    for (f, l) in flows.iter().zip(&out.assignment.0) {
        println!("{} (rate {:>4}) -> {l}", f.id, f.rate);
    }
    println!("LSP capacity after the pass: {:?}", out.working_capacity);
    for r in &out.requests {
        println!("re-creation request: {} needs {:.1} more", r.flow, r.deficit);
    }
    println!("candidate examinations: {}", out.examinations);
    let violations = audit_ffr(&topo, &flows, &lsps, &old, &out, 0.9);
    println!("audit violations: {}", violations.len());
    Ok(())
}
