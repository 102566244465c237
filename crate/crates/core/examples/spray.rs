//! Geodesic spray coefficients: closed form against the raw-coordinate oracle.

use finsler_core::dsl::ParameterEnv;
use finsler_core::metric::{MetricSpec, SamplePoint};
use finsler_core::spray::{spray, spray_oracle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = MetricSpec::parse("demo", 3, "sqrt(z^2+1+0.3*s^2)*exp(0.2*x0)+0.1*r*z", ParameterEnv::new())?;
    let p = SamplePoint::new(0.4, vec![0.3, -0.2, 0.5], 1.1, vec![0.2, 0.7, -0.4])?;
    let closed = spray(&spec, &p)?;
    let oracle = spray_oracle(&spec, &p)?;
    println!("{:>3} {:>22} {:>22} {:>10}", "A", "closed", "oracle", "|delta|");
    for (a, (c, o)) in closed.g.iter().zip(&oracle.g).enumerate() {
        println!("{a:>3} {c:>22.15e} {o:>22.15e} {:>10.2e}", (c - o).abs());
    }
    Ok(())
}
