//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] holds the Taylor-normalized coefficients of a function around a base point: the
//! coefficient of `∏ dxᵢ^kᵢ` is `∂^k f / ∏ kᵢ!`. Arithmetic on jets is exact up to the
//! truncation order, so evaluating an expression on jets yields all of its partial
//! derivatives at once. [`fd`] provides the finite-difference fallback used as an oracle.
//!
//! Every jet carries its own effective order, which may be lower than the order of its
//! [`JetSpace`]. Differentiating a jet lowers its order by one, and binary operations
//! truncate to the smaller operand order, so coefficients that are not known exactly are
//! never reported.

mod elementary;
pub mod fd;
mod space;

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use thiserror::Error;

pub use elementary::Elementary;
pub use space::JetSpace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("{function} is undefined at {value}")]
    DomainError { function: &'static str, value: f64 },
    #[error("derivative of total order {requested} exceeds jet order {available}")]
    OrderExceeded { requested: usize, available: usize },
    #[error("finite-difference stencil leaves the function domain at {0:?}")]
    StencilOutOfDomain(Vec<f64>),
    #[error("invalid jet space: {0}")]
    InvalidSpace(String),
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("vars", &self.space.vars())
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    /// Constant function at full space order.
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        Self::constant_with_order(space, value, space.order())
    }

    pub fn constant_with_order(space: &Arc<JetSpace>, value: f64, order: usize) -> Jet {
        let order = order.min(space.order());
        let mut coeffs = vec![0.0; space.len_for_order(order)];
        coeffs[0] = value;
        Jet { space: space.clone(), order, coeffs }
    }

    /// The coordinate function `name`, expanded around `base`.
    pub fn variable(space: &Arc<JetSpace>, name: &str, base: f64) -> Result<Jet, JetError> {
        let v = space.var_index(name).ok_or_else(|| JetError::UnknownVariable(name.to_string()))?;
        Ok(Self::variable_at(space, v, base))
    }

    pub fn variable_at(space: &Arc<JetSpace>, var: usize, base: f64) -> Jet {
        let mut jet = Self::constant(space, base);
        // degree-1 monomials follow the constant term in variable order
        jet.coeffs[1 + var] = 1.0;
        jet
    }

    /// Builds a jet directly from Taylor-normalized coefficients in the space layout.
    pub fn from_coeffs(space: &Arc<JetSpace>, order: usize, coeffs: Vec<f64>) -> Jet {
        let order = order.min(space.order());
        assert_eq!(coeffs.len(), space.len_for_order(order), "coefficient count mismatch");
        Jet { space: space.clone(), order, coeffs }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Same space and order, every coefficient but the value set to zero.
    pub fn constant_like(&self, value: f64) -> Jet {
        Self::constant_with_order(&self.space, value, self.order)
    }

    /// Taylor coefficient for the exponent vector `idx` (one entry per variable).
    pub fn coeff(&self, idx: &[u8]) -> Result<f64, JetError> {
        let requested = idx.iter().map(|&e| e as usize).sum();
        if requested > self.order {
            return Err(JetError::OrderExceeded { requested, available: self.order });
        }
        let m =
            self.space.monomial_index(idx).ok_or_else(|| JetError::InvalidSpace(format!("bad multi-index {idx:?}")))?;
        Ok(self.coeffs[m])
    }

    /// `∂^idx f` at the base point, i.e. the Taylor coefficient times `∏ kᵢ!`.
    pub fn partial(&self, idx: &[u8]) -> Result<f64, JetError> {
        let c = self.coeff(idx)?;
        let m = self.space.monomial_index(idx).expect("checked by coeff");
        Ok(c * self.space.factorial_weight(m))
    }

    /// Partial derivative addressed by a list of variable names, e.g. `["s", "z", "z"]`.
    pub fn partial_by_names(&self, names: &[&str]) -> Result<f64, JetError> {
        let mut idx = vec![0u8; self.space.nvars()];
        for name in names {
            let v = self.space.var_index(name).ok_or_else(|| JetError::UnknownVariable(name.to_string()))?;
            idx[v] += 1;
        }
        self.partial(&idx)
    }

    /// Exact derivative with respect to variable `var`; the result has order one lower.
    pub fn derivative(&self, var: usize) -> Result<Jet, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderExceeded { requested: 1, available: 0 });
        }
        let order = self.order - 1;
        let mut coeffs = vec![0.0; self.space.len_for_order(order)];
        for (m, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if let Some(down) = self.space.lowered(var, m) {
                if down < coeffs.len() {
                    coeffs[down] += c * self.space.exponents(m)[var] as f64;
                }
            }
        }
        Ok(Jet { space: self.space.clone(), order, coeffs })
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { space: self.space.clone(), order, coeffs: self.coeffs[..self.space.len_for_order(order)].to_vec() }
    }

    /// Applies an elementary function by composing its univariate Taylor series.
    pub fn apply(&self, f: Elementary) -> Result<Jet, JetError> {
        elementary::apply(self, f)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Sqrt)
    }

    pub fn exp(&self) -> Jet {
        self.apply(Elementary::Exp).expect("exp is total")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        self.apply(Elementary::Log)
    }

    pub fn atan(&self) -> Jet {
        self.apply(Elementary::Arctan).expect("arctan is total")
    }

    pub fn sin(&self) -> Jet {
        self.apply(Elementary::Sin).expect("sin is total")
    }

    pub fn cos(&self) -> Jet {
        self.apply(Elementary::Cos).expect("cos is total")
    }

    /// `1/f`; the base value must be nonzero (a zero base yields non-finite coefficients).
    pub fn recip(&self) -> Jet {
        elementary::recip(self)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: i32) -> Jet {
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.constant_like(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Largest coefficient magnitude, useful for residual checks.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn check_same_space(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces: {:?} vs {:?}",
            self.space.vars(),
            other.space.vars()
        );
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_same_space(other);
        let order = self.order.min(other.order);
        let n = self.space.len_for_order(order);
        let coeffs = self.coeffs[..n].iter().zip(&other.coeffs[..n]).map(|(&a, &b)| f(a, b)).collect();
        Jet { space: self.space.clone(), order, coeffs }
    }

    fn scale(mut self, k: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= k);
        self
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        self.check_same_space(other);
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; self.space.len_for_order(order)];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in self.space.products(order) {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet { space: self.space.clone(), order, coeffs }
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.order == other.order && self.coeffs == other.coeffs
    }
}

/// Scalar types the differentiation pipelines are generic over: plain `f64` and [`Jet`].
pub trait Real:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant of the same shape as `self`.
    fn lift(&self, value: f64) -> Self;
    fn value(&self) -> f64;
    fn apply(&self, f: Elementary) -> Result<Self, JetError>;
    fn powi(&self, n: i32) -> Self;
}

impl Real for f64 {
    fn lift(&self, value: f64) -> f64 {
        value
    }

    fn value(&self) -> f64 {
        *self
    }

    fn apply(&self, f: Elementary) -> Result<f64, JetError> {
        f.eval(*self)
    }

    fn powi(&self, n: i32) -> f64 {
        f64::powi(*self, n)
    }
}

impl Real for Jet {
    fn lift(&self, value: f64) -> Jet {
        self.constant_like(value)
    }

    fn value(&self) -> f64 {
        Jet::value(self)
    }

    fn apply(&self, f: Elementary) -> Result<Jet, JetError> {
        Jet::apply(self, f)
    }

    fn powi(&self, n: i32) -> Jet {
        Jet::powi(self, n)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_jet(b));
jet_binop!(Div, div, |a, b| a.mul_jet(&b.recip()));

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.clone().scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.clone() + rhs
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.clone() - rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.clone().scale(rhs)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.clone().scale(1.0 / rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.clone().scale(self)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Jet> for Jet {
    fn mul_assign(&mut self, rhs: &Jet) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sz(order: usize) -> Arc<JetSpace> {
        JetSpace::new(&["s", "z"], order).unwrap()
    }

    #[test]
    fn constant_jet_has_zero_derivatives() {
        let space = JetSpace::new(&["z"], 3).unwrap();
        let c = Jet::constant(&space, 5.0);
        assert_eq!(c.coeffs(), &[5.0, 0.0, 0.0, 0.0]);
        let zero = Jet::constant(&sz(2), 0.0);
        assert!(zero.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constants_multiply_like_reals() {
        let space = sz(3);
        let p = Jet::constant(&space, 3.0) * Jet::constant(&space, -2.5);
        assert_eq!(p, Jet::constant(&space, -7.5));
    }

    #[test]
    fn square_of_variable() {
        let space = JetSpace::new(&["z"], 3).unwrap();
        let z = Jet::variable(&space, "z", 2.0).unwrap();
        let sq = &z * &z;
        assert_eq!(sq.value(), 4.0);
        assert_eq!(sq.partial(&[1]).unwrap(), 4.0);
        assert_eq!(sq.coeff(&[2]).unwrap(), 1.0);
        assert_eq!(sq.coeff(&[3]).unwrap(), 0.0);
    }

    #[test]
    fn mixed_coefficient_of_product() {
        let space = sz(2);
        let s = Jet::variable(&space, "s", 1.0).unwrap();
        let z = Jet::variable(&space, "z", 2.0).unwrap();
        assert_eq!((&s * &z).coeff(&[1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn unknown_variable() {
        assert_eq!(Jet::variable(&sz(2), "r", 0.0).unwrap_err(), JetError::UnknownVariable("r".into()));
    }

    #[test]
    fn partial_restores_factorials() {
        let space = JetSpace::new(&["z"], 3).unwrap();
        let z = Jet::variable(&space, "z", 1.0).unwrap();
        assert_eq!(z.powi(3).partial(&[3]).unwrap(), 6.0);
        assert_eq!(Jet::constant(&space, 2.0).partial(&[2]).unwrap(), 0.0);

        let space = sz(3);
        let s = Jet::variable(&space, "s", 1.0).unwrap();
        let z = Jet::variable(&space, "z", 1.0).unwrap();
        let f = &s * &s * &z;
        assert_relative_eq!(f.partial_by_names(&["s", "s", "z"]).unwrap(), 2.0);
    }

    #[test]
    fn partial_beyond_order_is_an_error() {
        let space = JetSpace::new(&["z"], 2).unwrap();
        let z = Jet::variable(&space, "z", 1.0).unwrap();
        assert_eq!(z.partial(&[3]).unwrap_err(), JetError::OrderExceeded { requested: 3, available: 2 });
    }

    #[test]
    fn derivative_lowers_order() {
        let space = sz(3);
        let s = Jet::variable(&space, "s", 0.5).unwrap();
        let z = Jet::variable(&space, "z", 2.0).unwrap();
        let f = &s * &z.powi(2);
        let fz = f.derivative(1).unwrap();
        assert_eq!(fz.order(), 2);
        assert_relative_eq!(fz.value(), 2.0 * 0.5 * 2.0);
        assert_relative_eq!(fz.partial(&[1, 1]).unwrap(), 2.0);
        let c = Jet::constant_with_order(&space, 1.0, 0);
        assert!(c.derivative(0).is_err());
    }

    #[test]
    fn mixed_order_operands_truncate() {
        let space = sz(3);
        let z = Jet::variable(&space, "z", 1.0).unwrap();
        let low = z.truncate(1);
        let p = &z * &low;
        assert_eq!(p.order(), 1);
        assert_eq!(p.coeffs().len(), 3);
    }

    #[test]
    fn division_and_powers() {
        let space = JetSpace::new(&["z"], 4).unwrap();
        let z = Jet::variable(&space, "z", 2.0).unwrap();
        let q = Jet::constant(&space, 1.0) / &z;
        // 1/z at 2: 1/2, -1/4, 1/8 (coefficient), ...
        assert_relative_eq!(q.coeff(&[0]).unwrap(), 0.5);
        assert_relative_eq!(q.coeff(&[1]).unwrap(), -0.25);
        assert_relative_eq!(q.coeff(&[2]).unwrap(), 0.125);
        let back = z.powi(-2) * z.powi(2);
        assert_relative_eq!(back.value(), 1.0, epsilon = 1e-15);
        assert!(back.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }
}
