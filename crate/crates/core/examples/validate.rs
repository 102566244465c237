//! Positive definiteness on a grid: the phi/Omega/Lambda criterion against Hessian eigenvalues.

use finsler_core::dsl::ParameterEnv;
use finsler_core::metric::{validate, Axis, GridSpec, MetricSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec { z: Axis::new(-2.0, 2.0, 9), ..GridSpec::default() };
    for c in [0.5, 1.5] {
        let env = ParameterEnv::new().with("c", c)?;
        let spec = MetricSpec::parse(&format!("randers c={c}"), 3, "sqrt(z^2+1)+c*z", env)?;
        let rep = validate(&spec, &grid)?;
        println!(
            "{:<14} pass = {:<5} min phi = {:+.4}  min Lambda = {:+.4}  criterion failures = {:>3}  disagreements = {}",
            spec.name, rep.pass, rep.min_phi, rep.min_lambda, rep.criterion_failures, rep.disagreements
        );
    }
    Ok(())
}
