//! One-sided third derivatives of theta(t) = |t| phi(x0, r, 0, 1/|t|) at t = 0.

use finsler_core::unicorn::{regularity_probe, UnicornParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (alpha, beta) in [("1", "1"), ("0.5", "2"), ("1", "0")] {
        let p = regularity_probe(&UnicornParams::alpha_beta(alpha, beta, "1")?, 0.0, 0.6)?;
        println!(
            "alpha = {alpha:<3} beta = {beta}: theta'''(0+) = {:+.5} (predicted {:+.5}), theta'''(0-) = {:+.5} (predicted {:+.5})",
            p.theta_ppp_plus, p.predicted_plus, p.theta_ppp_minus, p.predicted_minus
        );
    }
    Ok(())
}
