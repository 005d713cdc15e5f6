//! Lower bounds on the time between consecutive impulses of a node, checked
//! against a simulated run.
//!
//!     cargo run --release --example inter_event_bounds

use pinsync::bounds::{analyze_run, inter_event_lower_bound, RunBoundsInput};
use pinsync::cli::parse_config;
use pinsync::{select_pinned_nodes, simulate, zeno_diagnostics};

const CONFIG: &str = r#"{
    "topology": "fixture8",
    "inner": [1, 2, 1],
    "dynamics": {"kind": "chen"},
    "coupling": {"kind": "fixed", "c": 8},
    "t_end": 20,
    "initial": {"random": {}},
    "z0": [0.1, -0.2, 0.1],
    "seed": 42
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the scalar root: 0.25 + T = 2^-T
    let t = inter_event_lower_bound(1.0, 0.0, 0.0, 1.0, std::f64::consts::LN_2, 0.5, 1.0)?;
    println!("T for (V=1, alpha=1, beta=ln2, d=0.5, sigma=1): {t:.10}");

    let cfg = parse_config(CONFIG, None)?;
    let pins = select_pinned_nodes(&cfg.spec.topology, cfg.gamma(), 8.0).pins;
    let realized = cfg.realize(pins.clone())?;
    let (trace, log) = simulate(&cfg.sim_config(&realized)?)?;

    let input = RunBoundsInput {
        topology: &cfg.spec.topology,
        inner: &cfg.spec.inner,
        pins: &pins,
        triggers: &realized.triggers,
        gamma: cfg.gamma(),
        c: trace.c_max(),
        t0: cfg.t0,
        w0: trace.first().w,
        w_sup: trace.w_max(),
        log: &log,
        epsilon: 1.0,
        mu: None,
        event_tol: cfg.event_tol,
    };
    let rb = analyze_run(&input)?;
    println!(
        "theta = {:.4e}, M (proof) = {:.4e}, M (observed) = {:.4}",
        rb.theta?,
        rb.m_proof.unwrap_or(f64::NAN),
        rb.m_observed
    );
    for s in &rb.sigmas {
        println!("node {}: sigma = {:.4}", s.node, s.used);
    }
    let tightest =
        rb.events.iter().filter_map(|e| Some((e, e.gap? / *e.bound.as_ref().ok()?))).min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((e, ratio)) = tightest {
        println!("tightest: node {} event {} gap/T = {ratio:.3}", e.node, e.k);
    }
    println!("{} events, {} violations", rb.events.len(), rb.violations);

    let zeno = zeno_diagnostics(&log, (cfg.t0, cfg.t_end), pins.indices())?;
    for n in &zeno.nodes {
        println!("node {}: {} events, min gap {:?}", n.node, n.count, n.min_gap);
    }
    Ok(())
}
