//! Eight Chen oscillators synchronized by event-triggered impulses on the
//! greedily selected pins.
//!
//!     cargo run --release --example simulate_chen

use pinsync::rng::SplitMix64;
use pinsync::{
    fixture_topology8, select_pinned_nodes, simulate, CouplingPolicy, InnerCoupling, NetworkSpec, NodeDynamics,
    NodeTrigger, SimConfig, TriggerParams, CHEN_GAMMA,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topology = fixture_topology8();
    let c = 8.0;
    let pins = select_pinned_nodes(&topology, CHEN_GAMMA, c).pins;
    let spec = NetworkSpec::new(
        topology,
        InnerCoupling::diagonal(&[1.0, 2.0, 1.0])?,
        NodeDynamics::chen(),
        CouplingPolicy::Fixed { c },
    )?;

    let mut rng = SplitMix64::new(42);
    let z0 = vec![0.1, -0.2, 0.1];
    let x0: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.uniform_open(-1.0, 1.0)).collect()).collect();
    let betas = [0.8, 0.6, 0.9];
    let triggers = pins
        .indices()
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let v0: f64 = x0[i].iter().zip(&z0).map(|(x, z)| (x - z) * (x - z)).sum();
            NodeTrigger { alpha: 1.01 * v0, beta: betas[k % 3], d: rng.uniform_open(0.0, 1.0) }
        })
        .collect();

    let config = SimConfig::new(spec, pins.clone(), TriggerParams::new(triggers)?, x0, z0).with_horizon(0.0, 20.0);
    let (trace, log) = simulate(&config)?;

    for t in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let row = trace.rows.iter().find(|r| r.t >= t - 1e-12).unwrap_or(trace.last());
        println!("t = {:>5.2}  V = {:.4e}  W = {:.4e}", row.t, row.v_total, row.w);
    }
    for &i in pins.indices() {
        println!("node {i}: {} impulses", log.count(i));
    }
    Ok(())
}
