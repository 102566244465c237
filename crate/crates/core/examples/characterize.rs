//! Classification and the independent characterizations that must agree with it.

use finsler_core::characterize::{classify, VANISH_TOL};
use finsler_core::dsl::ParameterEnv;
use finsler_core::metric::{Axis, GridSpec, MetricSpec};
use finsler_core::suite::{concordance_for, derived_unicorn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec { x0: Axis::new(-1.0, 1.0, 3), r: Axis::new(0.2, 1.0, 3), ..GridSpec::default() };
    let specs = [
        MetricSpec::parse("euclidean", 3, "sqrt(z^2+1)", ParameterEnv::new())?,
        MetricSpec::parse("generic", 3, "sqrt(z^2+1)+0.1*r*z", ParameterEnv::new())?,
        MetricSpec::parse("s-dependent riemannian", 3, "sqrt(z^2+1+0.3*s^2)", ParameterEnv::new())?,
        derived_unicorn("exp(x0)"),
    ];
    for spec in &specs {
        let c = classify(spec, &grid, VANISH_TOL);
        let k = concordance_for(spec, &grid, VANISH_TOL)?;
        println!(
            "{:<28} {:<22} B = {:.2e}  L = {:.2e}  anomaly = {}  paths agree = {}",
            spec.name,
            c.verdict.as_str(),
            c.berwald_max.unwrap_or(f64::NAN),
            c.landsberg_max.unwrap_or(f64::NAN),
            c.anomaly,
            k.agrees()
        );
    }
    Ok(())
}
