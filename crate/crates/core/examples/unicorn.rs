//! The Landsberg family built from g1, g2, g3: conditions, curvature and both displayed forms.

use finsler_core::characterize::{grid_curvature_max, VANISH_TOL};
use finsler_core::metric::GridSpec;
use finsler_core::unicorn::{build_unicorn, check_conditions, variant_consistency, UnicornParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridSpec::default();
    for k in ["exp(x0)", "1"] {
        let params = UnicornParams::derived(k)?;
        let spec = build_unicorn(&params, &grid)?;
        let m = grid_curvature_max(&spec, &grid)?;
        println!("k = {k}: Berwald max {:.3e}, Landsberg max {:.3e}", m.berwald_max, m.landsberg_max);
        let cond = check_conditions(&params, &grid, VANISH_TOL)?;
        for (name, r) in cond.names.iter().zip(&cond.residuals) {
            println!("    {name:<36} {r:.3e}");
        }
    }
    for v in variant_consistency(&UnicornParams::derived("exp(x0)")?, &grid, VANISH_TOL) {
        println!("{:<15} Landsberg max {:?}  vanishes = {}", v.variant, v.landsberg_max, v.landsberg_vanishes);
    }
    Ok(())
}
