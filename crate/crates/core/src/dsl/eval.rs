use std::sync::Arc;

use crate::jets::{Elementary, Jet, JetSpace, Real};

use super::ast::{BinOp, Expr, Var};
use super::{DslError, ParameterEnv};

fn constant_value(e: &Expr, params: &ParameterEnv) -> Result<Option<f64>, DslError> {
    if Var::ALL.iter().any(|&v| e.depends_on(v)) {
        return Ok(None);
    }
    eval(e, &[0.0; 4], params).map(Some)
}

/// Evaluates `e` with the variables `x0, r, s, z` bound to `vars` (in that order).
pub fn eval<T: Real>(e: &Expr, vars: &[T; 4], params: &ParameterEnv) -> Result<T, DslError> {
    let lift = |v: f64| vars[0].lift(v);
    Ok(match e {
        Expr::Num(v) => lift(*v),
        Expr::Var(v) => vars[v.index()].clone(),
        Expr::Param(p) => lift(params.get(p).ok_or_else(|| DslError::UnboundParameter(p.clone()))?),
        Expr::Neg(a) => -eval(a, vars, params)?,
        Expr::Call(f, a) => eval(a, vars, params)?.apply(*f)?,
        Expr::Bin(op, a, b) => {
            let x = eval(a, vars, params)?;
            match op {
                BinOp::Add => x + eval(b, vars, params)?,
                BinOp::Sub => x - eval(b, vars, params)?,
                BinOp::Mul => x * eval(b, vars, params)?,
                BinOp::Div => {
                    let y = eval(b, vars, params)?;
                    if y.value() == 0.0 {
                        return Err(DslError::DivisionByZero);
                    }
                    x / y
                }
                BinOp::Pow => match constant_value(b, params)? {
                    Some(p) if p.fract() == 0.0 && p.abs() <= 64.0 => {
                        if p < 0.0 && x.value() == 0.0 {
                            return Err(DslError::DivisionByZero);
                        }
                        x.powi(p as i32)
                    }
                    Some(p) => x.apply(Elementary::Pow(p))?,
                    None => (eval(b, vars, params)? * x.apply(Elementary::Log)?).apply(Elementary::Exp)?,
                },
            }
        }
    })
}

pub fn eval_f64(e: &Expr, point: [f64; 4], params: &ParameterEnv) -> Result<f64, DslError> {
    eval(e, &point, params)
}

/// Evaluates `e` on jets over `space`; variables of `(x0, r, s, z)` absent from the space
/// are held constant.
pub fn eval_jets(e: &Expr, space: &Arc<JetSpace>, point: [f64; 4], params: &ParameterEnv) -> Result<Jet, DslError> {
    let bind = |v: Var| match space.var_index(v.name()) {
        Some(i) => Jet::variable_at(space, i, point[v.index()]),
        None => Jet::constant(space, point[v.index()]),
    };
    let vars = [bind(Var::X0), bind(Var::R), bind(Var::S), bind(Var::Z)];
    eval(e, &vars, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use approx::assert_relative_eq;

    fn zspace(order: usize) -> Arc<JetSpace> {
        JetSpace::new(&["z"], order).unwrap()
    }

    #[test]
    fn square() {
        let j = eval_jets(&parse("z^2").unwrap(), &zspace(2), [0.0, 0.0, 0.0, 2.0], &ParameterEnv::new()).unwrap();
        assert_eq!(j.value(), 4.0);
        assert_eq!(j.partial(&[1]).unwrap(), 4.0);
    }

    #[test]
    fn sqrt_taylor() {
        let j = eval_jets(&parse("sqrt(z^2+1)").unwrap(), &zspace(3), [0.0; 4], &ParameterEnv::new()).unwrap();
        assert_relative_eq!(j.value(), 1.0);
        assert_relative_eq!(j.partial(&[1]).unwrap(), 0.0);
        assert_relative_eq!(j.partial(&[2]).unwrap(), 1.0);
    }

    #[test]
    fn division_by_zero() {
        let e = parse("1/(r)").unwrap();
        assert_eq!(eval_f64(&e, [0.0; 4], &ParameterEnv::new()), Err(DslError::DivisionByZero));
        let space = JetSpace::new(&["r"], 2).unwrap();
        assert_eq!(eval_jets(&e, &space, [0.0; 4], &ParameterEnv::new()).unwrap_err(), DslError::DivisionByZero);
    }

    #[test]
    fn parameters_and_powers() {
        let params = ParameterEnv::new().with("c", 0.5).unwrap();
        let e = parse("c*z^1.5 + 2^z + z^-2").unwrap();
        let v = eval_f64(&e, [0.0, 0.0, 0.0, 2.0], &params).unwrap();
        assert_relative_eq!(v, 0.5 * 2f64.powf(1.5) + 4.0 + 0.25, epsilon = 1e-14);
        assert_eq!(eval_f64(&parse("q").unwrap(), [0.0; 4], &params), Err(DslError::UnboundParameter("q".into())));
    }

    #[test]
    fn negative_base_integer_power() {
        let v = eval_f64(&parse("z^3").unwrap(), [0.0, 0.0, 0.0, -2.0], &ParameterEnv::new()).unwrap();
        assert_eq!(v, -8.0);
        assert!(eval_f64(&parse("z^0.5").unwrap(), [0.0, 0.0, 0.0, -2.0], &ParameterEnv::new()).is_err());
    }
}
