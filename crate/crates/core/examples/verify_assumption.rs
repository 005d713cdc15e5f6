//! Monte Carlo check that the Chen system satisfies the one-sided Lipschitz
//! bound `(x-y)^T (f(x)-f(y)) <= gamma (x-y)^T Gamma (x-y)` on a box.
//!
//!     cargo run --release --example verify_assumption

use pinsync::{verify_one_sided_bound, InnerCoupling, NodeDynamics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inner = InnerCoupling::diagonal(&[1.0, 2.0, 1.0])?;
    let chen = NodeDynamics::chen();
    let attractor_box = [(-30.0, 30.0), (-30.0, 30.0), (0.0, 60.0)];
    let rep = verify_one_sided_bound(&chen, &inner, &attractor_box, 200_000, 1)?;
    println!(
        "gamma = {}: {} violations in {} samples, largest observed ratio {:.4}",
        rep.gamma,
        rep.violation_count,
        rep.n_samples,
        rep.empirical_gamma_hat.unwrap_or(f64::NAN)
    );

    // a too-small gamma is caught
    let tight = NodeDynamics::new(pinsync::Chen, 5.0)?;
    let rep = verify_one_sided_bound(&tight, &inner, &attractor_box, 200_000, 1)?;
    println!("gamma = {}: {} violations", rep.gamma, rep.violation_count);
    Ok(())
}
