use super::ast::Expr;
use super::{parse, DslError, ParameterEnv};

/// Built-in metric families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `sqrt(z^2+1)`
    Euclidean,
    /// `sqrt(z^2+1) + c*z`, `|c| < 1`
    Randers { c: f64 },
    /// `k*sqrt(zeta^2+alpha^2)*exp(beta*arctan(zeta/alpha))` with `zeta = z + alpha*beta`
    Unicorn { k: f64, alpha: f64, beta: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Euclidean => "euclidean",
            Family::Randers { .. } => "randers",
            Family::Unicorn { .. } => "unicorn",
        }
    }

    /// Reads a family from its name and parameters; missing parameters take defaults
    /// (`c = 0.5`; `k = alpha = beta = 1`).
    pub fn from_name(name: &str, params: &ParameterEnv) -> Result<Family, DslError> {
        let invalid = |message: String| DslError::InvalidFamilyParameter { family: name.to_string(), message };
        let allowed: &[&str] = match name {
            "euclidean" => &[],
            "randers" => &["c"],
            "unicorn" => &["k", "alpha", "beta"],
            _ => return Err(invalid("unknown family".into())),
        };
        if let Some((p, _)) = params.iter().find(|(p, _)| !allowed.contains(p)) {
            return Err(invalid(format!("unexpected parameter `{p}`")));
        }
        let get = |p: &str, default: f64| params.get(p).unwrap_or(default);
        Ok(match name {
            "euclidean" => Family::Euclidean,
            "randers" => Family::Randers { c: get("c", 0.5) },
            _ => Family::Unicorn { k: get("k", 1.0), alpha: get("alpha", 1.0), beta: get("beta", 1.0) },
        })
    }

    pub fn expr(&self) -> Result<Expr, DslError> {
        let invalid = |message: &str| DslError::InvalidFamilyParameter {
            family: self.name().to_string(),
            message: message.to_string(),
        };
        let (text, env) = match *self {
            Family::Euclidean => ("sqrt(z^2+1)", ParameterEnv::new()),
            Family::Randers { c } => {
                if !(c.abs() < 1.0) {
                    return Err(invalid("|c| < 1 is required"));
                }
                ("sqrt(z^2+1)+c*z", ParameterEnv::new().with("c", c)?)
            }
            Family::Unicorn { k, alpha, beta } => {
                if !(alpha > 0.0) {
                    return Err(invalid("alpha > 0 is required"));
                }
                if !(k > 0.0) || !beta.is_finite() {
                    return Err(invalid("k > 0 and finite beta are required"));
                }
                (
                    "k*sqrt((z+alpha*beta)^2+alpha^2)*exp(beta*arctan((z+alpha*beta)/alpha))",
                    ParameterEnv::new().with("k", k)?.with("alpha", alpha)?.with("beta", beta)?,
                )
            }
        };
        Ok(parse(text)?.substitute_params(&env))
    }
}

/// Closed expression for the named family.
pub fn builtin(name: &str, params: &ParameterEnv) -> Result<Expr, DslError> {
    Family::from_name(name, params)?.expr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean() {
        assert_eq!(builtin("euclidean", &ParameterEnv::new()).unwrap(), parse("sqrt(z^2+1)").unwrap());
    }

    #[test]
    fn randers() {
        let params = ParameterEnv::new().with("c", 0.5).unwrap();
        assert_eq!(builtin("randers", &params).unwrap(), parse("sqrt(z^2+1)+0.5*z").unwrap());
        let bad = ParameterEnv::new().with("c", 1.5).unwrap();
        assert!(matches!(builtin("randers", &bad), Err(DslError::InvalidFamilyParameter { .. })));
    }

    #[test]
    fn unicorn_substitutes_literals() {
        let e = builtin("unicorn", &ParameterEnv::new()).unwrap();
        assert!(e.parameter_refs().is_empty());
        let want = parse("1*sqrt((z+1*1)^2+1^2)*exp(1*arctan((z+1*1)/1))").unwrap();
        assert_eq!(e, want);
    }

    #[test]
    fn unknown_family_or_parameter() {
        assert!(builtin("kropina", &ParameterEnv::new()).is_err());
        let params = ParameterEnv::new().with("c", 0.1).unwrap();
        assert!(builtin("euclidean", &params).is_err());
    }
}
