//! Plugging in a user-defined node model: estimate its one-sided bound on a
//! box, then select pins and simulate with that bound.
//!
//!     cargo run --release --example custom_dynamics

use pinsync::model::FnField;
use pinsync::rng::SplitMix64;
use pinsync::{
    check_sync_condition, select_pinned_nodes, simulate, verify_one_sided_bound, CouplingPolicy, InnerCoupling,
    NetworkSpec, NodeDynamics, NodeTrigger, PinSet, SimConfig, Topology, TriggerParams,
};

fn lorenz() -> FnField<impl Fn(f64, &[f64], &mut [f64]) + Send + Sync> {
    FnField::new(3, |_t, z: &[f64], out: &mut [f64]| {
        out[0] = 10.0 * (z[1] - z[0]);
        out[1] = z[0] * (28.0 - z[2]) - z[1];
        out[2] = z[0] * z[1] - 8.0 / 3.0 * z[2];
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inner = InnerCoupling::identity(3);
    let bounds = [(-25.0, 25.0), (-30.0, 30.0), (0.0, 55.0)];
    let probe = NodeDynamics::new(lorenz(), 1e6)?;
    let gamma_hat = verify_one_sided_bound(&probe, &inner, &bounds, 200_000, 3)?.empirical_gamma_hat.unwrap_or(0.0);
    let gamma = 1.1 * gamma_hat;
    println!("estimated one-sided bound {gamma_hat:.3}, using gamma = {gamma:.3}");

    // ring of ten nodes
    let n = 10;
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let topology = Topology::from_edges(n, &edges)?;
    let c = 30.0;
    let sel = select_pinned_nodes(&topology, gamma, c);
    let pins: PinSet = sel.pins;
    let cond = check_sync_condition(gamma, c, &topology, &pins)?;
    println!("pins {:?}, minimum coupling {:.3}, c = {c}", pins.indices(), cond.min_coupling);

    let spec = NetworkSpec::new(topology, inner, NodeDynamics::new(lorenz(), gamma)?, CouplingPolicy::Fixed { c })?;
    let mut rng = SplitMix64::new(5);
    let z0 = vec![1.0, 1.0, 20.0];
    let x0: Vec<Vec<f64>> = (0..n).map(|_| z0.iter().map(|z| z + rng.uniform_open(-2.0, 2.0)).collect()).collect();
    let triggers = pins
        .indices()
        .iter()
        .map(|&i| {
            let v0: f64 = x0[i].iter().zip(&z0).map(|(x, z)| (x - z) * (x - z)).sum();
            NodeTrigger { alpha: 1.01 * v0, beta: 0.5, d: 0.6 }
        })
        .collect();
    let config =
        SimConfig::new(spec, pins, TriggerParams::new(triggers)?, x0, z0).with_horizon(0.0, 15.0).with_step(2e-4);
    let (trace, log) = simulate(&config)?;
    println!("V: {:.3e} -> {:.3e} with {} impulses", trace.first().v_total, trace.last().v_total, log.len());
    Ok(())
}
