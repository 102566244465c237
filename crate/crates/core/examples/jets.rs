//! Truncated Taylor jets: exact partial derivatives of a composite expression.

use finsler_core::jets::{Jet, JetSpace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = JetSpace::new(&["s", "z"], 3)?;
    let s = Jet::variable(&space, "s", 0.3)?;
    let z = Jet::variable(&space, "z", 1.2)?;
    // f = sqrt(z^2 + 1) * exp(s z)
    let f = &(&z * &z + Jet::constant(&space, 1.0)).sqrt()? * &(&s * &z).exp();
    println!("f        = {:.12}", f.value());
    for (name, idx) in [("f_s", [1, 0]), ("f_z", [0, 1]), ("f_sz", [1, 1]), ("f_zzz", [0, 3]), ("f_ssz", [2, 1])] {
        println!("{name:<8} = {:.12}", f.partial(&idx)?);
    }
    Ok(())
}
