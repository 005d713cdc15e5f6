//! Evaluate the synchronization condition for a few pin sets on the bundled
//! 8-node topology.
//!
//!     cargo run --example check_condition

use pinsync::{check_sync_condition, fixture_topology8, PinSet, CHEN_GAMMA};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topology = fixture_topology8();
    let c = 8.0;
    println!("gamma = {CHEN_GAMMA}, c = {c}");
    for pins in [vec![], vec![5], vec![5, 0, 1], vec![5, 0, 1, 3, 6], (0..8).collect()] {
        let set = PinSet::new(pins.clone(), topology.n_nodes())?;
        let r = check_sync_condition(CHEN_GAMMA, c, &topology, &set)?;
        let lambda = r.lambda_max_abar.map_or("n/a".to_string(), |l| format!("{l:+.4}"));
        println!(
            "pins {:<18} lambda_max {:>8}  min c {:>10.4}  satisfied {}",
            format!("{pins:?}"),
            lambda,
            r.min_coupling,
            r.satisfied
        );
    }
    Ok(())
}
