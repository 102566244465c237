//! Berwald and Landsberg tensors from the closed forms, checked against differentiation oracles.

use finsler_core::curvature::compare_curvature;
use finsler_core::dsl::ParameterEnv;
use finsler_core::metric::{MetricSpec, SamplePoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        MetricSpec::parse("riemannian", 3, "sqrt(exp(2*x0)*z^2+1)", ParameterEnv::new())?,
        MetricSpec::parse("generic", 3, "sqrt(z^2+1+0.2*s^2)+0.1*r*z", ParameterEnv::new())?,
    ];
    let p = SamplePoint::new(0.2, vec![0.5, 0.1, -0.3], 0.9, vec![-0.4, 0.8, 0.3])?;
    for spec in &specs {
        let c = compare_curvature(spec, &p)?;
        println!("{}", spec.name);
        println!("  |B| max = {:.6e}  closed vs oracle = {:.2e}", c.berwald_max_abs, c.berwald_diff);
        println!("  |L| max = {:.6e}  closed vs oracle = {:.2e}", c.landsberg_max_abs, c.landsberg_diff);
        println!(
            "  B symmetry defect = {:.2e}  B y-contraction = {:.2e}",
            c.berwald_symmetry_defect, c.berwald_y_contraction
        );
    }
    Ok(())
}
