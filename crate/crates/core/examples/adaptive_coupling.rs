//! Adaptive coupling `c' = zeta * sum of e^T Gamma e` over unpinned nodes,
//! with and without saturation at the spectral threshold plus a margin.
//!
//!     cargo run --release --example adaptive_coupling

use pinsync::cli::parse_config;
use pinsync::{check_sync_condition, select_pinned_nodes, simulate, CouplingPolicy};

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
    let mut cfg = parse_config(CONFIG, None)?;
    let pins = select_pinned_nodes(&cfg.spec.topology, cfg.gamma(), 8.0).pins;
    let threshold = check_sync_condition(cfg.gamma(), 8.0, &cfg.spec.topology, &pins)?.min_coupling;
    println!("pins {:?}, spectral threshold {threshold:.4}", pins.indices());

    let policies = [
        CouplingPolicy::Adaptive { c0: 1.0, zeta: 0.2 },
        CouplingPolicy::Adaptive { c0: 1.0, zeta: 2.0 },
        CouplingPolicy::SaturatedAdaptive { c0: 1.0, zeta: 2.0, cap: threshold + 0.01 },
    ];
    for policy in policies {
        cfg.spec.coupling = policy;
        let realized = cfg.realize(pins.clone())?;
        let (trace, log) = simulate(&cfg.sim_config(&realized)?)?;
        println!("{policy:?}");
        for t in [0.0, 0.5, 1.0, 5.0, 20.0] {
            let row = trace.rows.iter().find(|r| r.t >= t - 1e-12).unwrap_or(trace.last());
            println!("  t = {:>5.2}  c = {:.4}  V = {:.3e}", row.t, row.c, row.v_total);
        }
        println!("  {} impulses", log.len());
    }
    Ok(())
}
