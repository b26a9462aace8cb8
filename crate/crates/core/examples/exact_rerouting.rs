//! Re-assigns flows to existing LSPs with the fewest possible moves, first
//! with reserved LSPs and then with a per-link utilization cap.
//!
//! cargo run --example exact_rerouting

use hybrid_te::lsp::{build_lsp, FlowAssignment, LspId};
use hybrid_te::topology::{Link, NetworkTopology, NodeId};
use hybrid_te::traffic::{Flow, FlowId};
use hybrid_te::{solve_flow_rerouting, ReroutingProblem, ReservationMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // two disjoint two-hop paths from 0 to 3
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
    let upper = build_lsp(&topo, LspId(0), &[NodeId(0), NodeId(1), NodeId(3)], 10.0)?;
    let lower = build_lsp(&topo, LspId(1), &[NodeId(0), NodeId(2), NodeId(3)], 10.0)?;
    let lsps = vec![upper, lower];

    // three flows that all sit on the upper LSP and have outgrown it
    let flows: Vec<Flow> = [6.0, 3.0, 4.0]
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
    let old = FlowAssignment(vec![LspId(0); 3]);

    let sol = solve_flow_rerouting(&ReroutingProblem::new(&topo, &flows, &lsps, &old))?;
    println!("reserved:   {:?} -> {:?}, {} change(s)", old.0, sol.fr_new.0, sol.changes);

    let capped = ReroutingProblem::new(&topo, &flows, &lsps, &old)
        .with_mode(ReservationMode::Unreserved, 0.3);
    match solve_flow_rerouting(&capped) {
        Ok(sol) => println!("mu = 0.3:   {:?}", sol.fr_new.0),
        Err(e) => println!("mu = 0.3:   {e}"),
    }

    println!("\nproblem as dumped by --dump-lp:\n{}", serde_json::to_string_pretty(&capped)?);
    Ok(())
}
