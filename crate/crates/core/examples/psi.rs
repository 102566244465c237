//! The radial operator Psi(T) = -s T_s - z T_z and its identities.

use finsler_core::dsl::{parse, ParameterEnv};
use finsler_core::metric::SamplePoint;
use finsler_core::psi::{default_sz_grid, psi, verify_identities, verify_vector_identities};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = ParameterEnv::new();
    let theta = parse("exp(s*z) + s^2/z")?;
    println!("Psi(theta) at (s, z) = (0.3, 1.5): {:.12}", psi(&theta, &env, 0.3, 1.5)?);

    let scalar = verify_identities(&theta, &env, &default_sz_grid())?;
    for (name, r) in scalar.names.iter().zip(&scalar.residuals) {
        println!("  {name:<48} {r:.2e}");
    }
    let vector = verify_vector_identities(&theta, &env, &SamplePoint::canonical(3, 0.1, 0.7, 0.2, 1.3, 1.0))?;
    for (name, r) in vector.names.iter().zip(&vector.residuals) {
        println!("  {name:<48} {r:.2e}");
    }
    Ok(())
}
