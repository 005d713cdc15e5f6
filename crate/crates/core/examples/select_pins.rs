//! Greedy pin selection: mandatory low-degree nodes first, then the
//! highest-degree remaining node until the condition holds.
//!
//!     cargo run --example select_pins [c]

use pinsync::{fixture_topology8, select_pinned_nodes, CHEN_GAMMA};

fn main() {
    let c: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8.0);
    let topology = fixture_topology8();
    println!("degrees: {:?}", topology.degrees());
    println!("mandatory threshold gamma/c = {:.4}", CHEN_GAMMA / c);

    let sel = select_pinned_nodes(&topology, CHEN_GAMMA, c);
    for trial in &sel.trail {
        println!(
            "{:<20} lambda_max {:>9}  gamma/|lambda| {:>9.4}  {}",
            format!("{:?}", trial.pins.indices()),
            trial.report.lambda_max_abar.map_or("-".into(), |l| format!("{l:.4}")),
            trial.report.min_coupling,
            if trial.report.satisfied { "ok" } else { "" }
        );
    }
    println!("selected: {:?}", sel.pins.indices());
}
