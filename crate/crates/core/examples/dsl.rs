//! Parsing and evaluating metric expressions, with parameters and built-in families.

use finsler_core::dsl::{builtin, eval_f64, parse_with_params, Family, ParameterEnv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ParameterEnv::new().with("c", 0.25)?;
    let phi = parse_with_params("sqrt(z^2 + 1 + s^2/4) + c*z*exp(-x0^2)", &params)?;
    println!("phi      = {phi}");
    let point = [0.5, 0.8, 0.2, 1.1];
    println!("phi({point:?}) = {:.12}", eval_f64(&phi, point, &params)?);

    let randers = Family::Randers { c: 0.5 }.expr()?;
    let unicorn = builtin("unicorn", &ParameterEnv::new().with("beta", 0.5)?)?;
    println!("unicorn  = {unicorn}");
    println!("randers  = {randers}");

    match parse_with_params("sqrt(z^2 + q)", &ParameterEnv::new()) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("unbound parameter rejected: {e}"),
    }
    Ok(())
}
