//! A single pinned node with zero dynamics: events land exactly where the
//! decaying threshold meets the post-jump error, at ln 4, ln 16, ln 64, ...
//!
//!     cargo run --example closed_form_events

use pinsync::model::{validate_topology, Zero};
use pinsync::simulator::Jump;
use pinsync::{
    simulate, CouplingPolicy, InnerCoupling, NetworkSpec, NodeDynamics, NodeTrigger, PinSet, SimConfig, TriggerParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = NetworkSpec::new(
        validate_topology(&[vec![0.0]])?,
        InnerCoupling::identity(3),
        NodeDynamics::new(Zero { dim: 3 }, 0.0)?,
        CouplingPolicy::Fixed { c: 1.0 },
    )?;
    // V(0) = 0.25, threshold e^{-t}, each impulse quarters V
    let trigger = NodeTrigger { alpha: 1.0, beta: 1.0, d: 0.5 };
    let config = SimConfig::new(
        spec,
        PinSet::all(1),
        TriggerParams::new(vec![trigger])?,
        vec![vec![0.5, 0.0, 0.0]],
        vec![0.0; 3],
    )
    .with_horizon(0.0, 8.0);
    let (trace, log) = simulate(&config)?;
    for (k, e) in log.records.iter().enumerate() {
        let exact = (4f64.powi(k as i32 + 1)).ln();
        println!("event {}: t = {:.9} (exact {:.9}), V {:.6e} -> {:.6e}", e.k, e.t, exact, e.v_before, e.v_after);
    }
    let jumps = trace.rows.iter().filter(|r| r.jump != Jump::Flow).count();
    println!("{} trace rows, {jumps} of them at jumps", trace.rows.len());
    Ok(())
}
