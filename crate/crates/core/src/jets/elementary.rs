use super::space::factorial;
use super::{Jet, JetError};

/// Elementary functions that can be lifted to jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sqrt,
    Exp,
    Log,
    Arctan,
    Sin,
    Cos,
    Pow(f64),
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sqrt => "sqrt",
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Arctan => "arctan",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Pow(_) => "pow",
        }
    }

    pub fn from_name(name: &str) -> Option<Elementary> {
        Some(match name {
            "sqrt" => Elementary::Sqrt,
            "exp" => Elementary::Exp,
            "log" => Elementary::Log,
            "arctan" => Elementary::Arctan,
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            _ => return None,
        })
    }

    fn check_domain(self, a: f64) -> Result<(), JetError> {
        let ok = match self {
            Elementary::Sqrt | Elementary::Log => a > 0.0,
            Elementary::Pow(p) if p.fract() != 0.0 => a > 0.0,
            Elementary::Pow(p) if p < 0.0 => a != 0.0,
            _ => true,
        };
        if ok && a.is_finite() {
            Ok(())
        } else {
            Err(JetError::DomainError { function: self.name(), value: a })
        }
    }

    /// Plain evaluation with the same domain rules as the jet lift.
    pub fn eval(self, a: f64) -> Result<f64, JetError> {
        self.check_domain(a)?;
        Ok(match self {
            Elementary::Sqrt => a.sqrt(),
            Elementary::Exp => a.exp(),
            Elementary::Log => a.ln(),
            Elementary::Arctan => a.atan(),
            Elementary::Sin => a.sin(),
            Elementary::Cos => a.cos(),
            Elementary::Pow(p) if p.fract() == 0.0 && p.abs() < i32::MAX as f64 => a.powi(p as i32),
            Elementary::Pow(p) => a.powf(p),
        })
    }

    /// Taylor coefficients `f^(k)(a)/k!` for `k = 0..=order`.
    fn taylor(self, a: f64, order: usize) -> Vec<f64> {
        let mut c = vec![0.0; order + 1];
        match self {
            Elementary::Exp => {
                let e = a.exp();
                for (k, ck) in c.iter_mut().enumerate() {
                    *ck = e / factorial(k);
                }
            }
            Elementary::Log => {
                c[0] = a.ln();
                for (k, ck) in c.iter_mut().enumerate().skip(1) {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *ck = sign / (k as f64 * a.powi(k as i32));
                }
            }
            Elementary::Sqrt => return binomial_series(a, 0.5, order),
            Elementary::Pow(p) => return binomial_series(a, p, order),
            Elementary::Sin | Elementary::Cos => {
                let (s, co) = a.sin_cos();
                let cycle = if self == Elementary::Sin { [s, co, -s, -co] } else { [co, -s, -co, s] };
                for (k, ck) in c.iter_mut().enumerate() {
                    *ck = cycle[k % 4] / factorial(k);
                }
            }
            Elementary::Arctan => {
                // r_m: Taylor coefficients of 1/(1+(a+t)^2)
                let q = 1.0 + a * a;
                let mut r = vec![0.0; order.max(1)];
                for m in 0..r.len() {
                    r[m] = match m {
                        0 => 1.0 / q,
                        1 => -2.0 * a * r[0] / q,
                        _ => -(2.0 * a * r[m - 1] + r[m - 2]) / q,
                    };
                }
                c[0] = a.atan();
                for k in 1..=order {
                    c[k] = r[k - 1] / k as f64;
                }
            }
        }
        c
    }
}

fn binomial_series(a: f64, p: f64, order: usize) -> Vec<f64> {
    let mut c = vec![0.0; order + 1];
    let mut binom = 1.0;
    for (k, ck) in c.iter_mut().enumerate() {
        if k > 0 {
            binom *= (p - (k - 1) as f64) / k as f64;
        }
        *ck = binom * a.powf(p - k as f64);
    }
    c
}

fn compose(x: &Jet, coeffs: &[f64]) -> Jet {
    let a = x.value();
    let h = x.clone() - a;
    let mut acc = x.constant_like(*coeffs.last().unwrap());
    for &c in coeffs.iter().rev().skip(1) {
        acc = &acc * &h + c;
    }
    acc
}

pub(super) fn apply(x: &Jet, f: Elementary) -> Result<Jet, JetError> {
    let a = x.value();
    f.check_domain(a)?;
    if let Elementary::Pow(p) = f {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return Ok(x.powi(p as i32));
        }
    }
    Ok(compose(x, &f.taylor(a, x.order())))
}

pub(super) fn recip(x: &Jet) -> Jet {
    compose(x, &binomial_series(x.value(), -1.0, x.order()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::JetSpace;
    use approx::assert_relative_eq;

    fn z_at(order: usize, z: f64) -> Jet {
        Jet::variable(&JetSpace::new(&["z"], order).unwrap(), "z", z).unwrap()
    }

    #[test]
    fn exp_series() {
        let e = z_at(3, 0.0).exp();
        for (c, want) in e.coeffs().iter().zip([1.0, 1.0, 0.5, 1.0 / 6.0]) {
            assert_relative_eq!(*c, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn arctan_first_order() {
        let t = z_at(1, 1.0).atan();
        assert_relative_eq!(t.value(), std::f64::consts::FRAC_PI_4);
        assert_relative_eq!(t.partial(&[1]).unwrap(), 0.5);
    }

    #[test]
    fn sqrt_of_constant() {
        let space = JetSpace::new(&["z"], 3).unwrap();
        assert_eq!(Jet::constant(&space, 4.0).sqrt().unwrap(), Jet::constant(&space, 2.0));
    }

    #[test]
    fn exp_of_arctan() {
        let f = z_at(2, 0.0).atan().exp();
        assert_relative_eq!(f.value(), 1.0);
        assert_relative_eq!(f.partial(&[1]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(&[2]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.coeff(&[2]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn domain_errors() {
        let space = JetSpace::new(&["z"], 2).unwrap();
        let zero = Jet::constant(&space, 0.0);
        assert!(matches!(zero.sqrt(), Err(JetError::DomainError { function: "sqrt", .. })));
        assert!(zero.ln().is_err());
        assert!(zero.apply(Elementary::Pow(1.5)).is_err());
        assert!((zero.clone() - 1.0).apply(Elementary::Pow(2.0)).is_ok());
    }

    #[test]
    fn arctan_matches_high_order_derivatives() {
        // d^3/dz^3 atan(z) = (6z^2 - 2)/(1+z^2)^3
        let z = 0.7;
        let t = z_at(4, z).atan();
        let want = (6.0 * z * z - 2.0) / (1.0 + z * z).powi(3);
        assert_relative_eq!(t.partial(&[3]).unwrap(), want, epsilon = 1e-13);
        // d^4 = 24 z (1 - z^2)/(1+z^2)^4
        let want4 = 24.0 * z * (1.0 - z * z) / (1.0 + z * z).powi(4);
        assert_relative_eq!(t.partial(&[4]).unwrap(), want4, epsilon = 1e-12);
    }

    #[test]
    fn sin_cos_pythagoras() {
        let space = JetSpace::new(&["s", "z"], 5).unwrap();
        let s = Jet::variable(&space, "s", 0.3).unwrap();
        let z = Jet::variable(&space, "z", -1.2).unwrap();
        let x = &s * &z + s.exp();
        let one = x.sin().powi(2) + x.cos().powi(2);
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-14);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn log_inverts_exp() {
        let x = z_at(6, 0.4) * 1.5;
        let back = x.exp().ln().unwrap();
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-13);
        }
    }

    #[test]
    fn fractional_power() {
        let f = z_at(3, 2.0).apply(Elementary::Pow(1.5)).unwrap();
        assert_relative_eq!(f.partial(&[1]).unwrap(), 1.5 * 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(f.partial(&[3]).unwrap(), 1.5 * 0.5 * -0.5 * 2f64.powf(-1.5), epsilon = 1e-14);
    }
}
