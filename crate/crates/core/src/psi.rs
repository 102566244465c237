//! The radial operator `Ψ(Θ) = −sΘ_s − zΘ_z` on `(s, z)`-jets and the identity suites.

use std::sync::Arc;

use serde::Serialize;

use crate::dsl::{self, Expr, ParameterEnv};
use crate::error::Result;
use crate::jets::{Jet, JetSpace, Real};
use crate::metric::SamplePoint;

/// Calculus on jets in `(s, z)` around a fixed base point.
#[derive(Debug, Clone)]
pub struct SzCalc {
    pub space: Arc<JetSpace>,
    pub s: Jet,
    pub z: Jet,
}

impl SzCalc {
    pub fn new(order: usize, s: f64, z: f64) -> Result<SzCalc> {
        let space = JetSpace::new(&["s", "z"], order)?;
        let sj = Jet::variable_at(&space, 0, s);
        let zj = Jet::variable_at(&space, 1, z);
        Ok(SzCalc { space, s: sj, z: zj })
    }

    pub fn ds(&self, t: &Jet) -> Jet {
        t.derivative(0).expect("jet order exhausted")
    }

    pub fn dz(&self, t: &Jet) -> Jet {
        t.derivative(1).expect("jet order exhausted")
    }

    /// `Ψ(Θ) = −sΘ_s − zΘ_z`; lowers the jet order by one.
    pub fn psi(&self, t: &Jet) -> Jet {
        -(&self.s * &self.ds(t)) - &self.z * &self.dz(t)
    }

    /// `∂_s Ψ(Θ)`
    pub fn psi_s(&self, t: &Jet) -> Jet {
        self.ds(&self.psi(t))
    }

    /// `∂_z Ψ(Θ)`
    pub fn psi_z(&self, t: &Jet) -> Jet {
        self.dz(&self.psi(t))
    }

    /// `zᵏ Θ` for any integer `k`.
    pub fn zpow(&self, t: &Jet, k: i32) -> Jet {
        t * &self.z.powi(k)
    }

    pub fn eval_theta(&self, theta: &Expr, params: &ParameterEnv) -> Result<Jet> {
        let x0 = self.s.constant_like(0.0);
        let r = self.s.constant_like(1.0);
        Ok(dsl::eval(theta, &[x0, r, self.s.clone(), self.z.clone()], params)?)
    }
}

/// `Ψ(Θ)` at `(s, z)` for an expression in `s` and `z`.
pub fn psi(theta: &Expr, params: &ParameterEnv, s: f64, z: f64) -> Result<f64> {
    let c = SzCalc::new(1, s, z)?;
    Ok(c.psi(&c.eval_theta(theta, params)?).value())
}

pub const SCALAR_IDENTITIES: [&str; 9] = [
    "Psi(z^2 Psi(T/z^2)) = -s z Psi(T_s/z) - z^2 Psi(T_z/z)",
    "Psi(z^2 Psi(T/z))/z = -s Psi(T_s) - z Psi(T_z) - z Psi(T/z)",
    "Psi(z^2 Psi(T))/z^2 = -3 Psi(T) - s Psi(T_s) - z Psi(T_z)",
    "Psi(T_z) = Psi_z(T) + T_z",
    "z Psi_z(T) = Psi(z T_z)",
    "z Psi_s(T/z) = Psi(T_s)",
    "(z Psi(T/z))_z = Psi(T_z)",
    "Psi(z^2 Psi(z^2 Psi(T/z^2)))/z^2 = -2 Psi(z^2 Psi(T/z^2)) - (s/z) Psi(z^2 Psi(T_s/z)) - Psi(z^2 Psi(T_z/z))",
    "Psi(z^2 Psi(z^2 Psi(T/z)))/z^2 = -3 Psi(z^2 Psi(T/z)) - (s/z) Psi(z^2 Psi(T_s)) - Psi(z^2 Psi(T_z))",
];

/// Left minus right side of each scalar identity for the jet `t` (order ≥ 4).
pub fn scalar_identity_residuals(c: &SzCalc, t: &Jet) -> [f64; 9] {
    let p = |x: &Jet| c.psi(x);
    let zp = |x: &Jet, k: i32| c.zpow(x, k);
    let s = &c.s;
    let z = &c.z;
    let ts = c.ds(t);
    let tz = c.dz(t);
    // nested building blocks
    let z2p = |x: &Jet| zp(&p(x), 2);

    let id1 = p(&z2p(&zp(t, -2))) + s * z * p(&zp(&ts, -1)) + zp(&p(&zp(&tz, -1)), 2);
    let id2 = zp(&p(&z2p(&zp(t, -1))), -1) + s * p(&ts) + z * p(&tz) + z * p(&zp(t, -1));
    let id3 = zp(&p(&z2p(t)), -2) + p(t) * 3.0 + s * p(&ts) + z * p(&tz);
    let id4 = p(&tz) - c.psi_z(t) - &tz;
    let id5 = z * c.psi_z(t) - p(&(z * &tz));
    let id6 = z * c.psi_s(&zp(t, -1)) - p(&ts);
    let id7 = c.dz(&(z * p(&zp(t, -1)))) - p(&tz);
    let id8 = zp(&p(&z2p(&z2p(&zp(t, -2)))), -2)
        + p(&z2p(&zp(t, -2))) * 2.0
        + (s / z) * p(&z2p(&zp(&ts, -1)))
        + p(&z2p(&zp(&tz, -1)));
    let id9 = zp(&p(&z2p(&z2p(&zp(t, -1)))), -2) + p(&z2p(&zp(t, -1))) * 3.0 + (s / z) * p(&z2p(&ts)) + p(&z2p(&tz));
    [id1, id2, id3, id4, id5, id6, id7, id8, id9].map(|j| j.value().abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub names: Vec<String>,
    pub residuals: Vec<f64>,
    pub points: usize,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, &r| m.max(r))
    }

    fn merge_max(&mut self, other: &[f64]) {
        for (a, b) in self.residuals.iter_mut().zip(other) {
            *a = a.max(*b);
        }
    }
}

/// Max residual of every scalar identity over the `(s, z)` points.
pub fn verify_identities(theta: &Expr, params: &ParameterEnv, grid: &[(f64, f64)]) -> Result<IdentityReport> {
    let mut rep = IdentityReport {
        names: SCALAR_IDENTITIES.iter().map(|s| s.to_string()).collect(),
        residuals: vec![0.0; 9],
        points: grid.len(),
    };
    for &(s, z) in grid {
        let c = SzCalc::new(5, s, z)?;
        let t = c.eval_theta(theta, params)?;
        rep.merge_max(&scalar_identity_residuals(&c, &t));
    }
    Ok(rep)
}

pub const VECTOR_IDENTITIES: [&str; 5] = [
    "dT/dy0 = T_z/u",
    "u dT/dy^l = T_s x^l + Psi(T) u_l",
    "u d(T u_l)/dy^k = T d_kl + T_s x^k u_l + Psi(z T)/z u_k u_l",
    "u d(T u_k u_l)/dy^j = T (d_jk u_l)_kl + T_s x^j u_k u_l + Psi(z^2 T)/z^2 u_j u_k u_l",
    "u d(T u_k u_l u_i)/dy^j = T (d_jk u_l u_i)_kli + T_s x^j u_k u_l u_i + Psi(z^3 T)/z^3 u_j u_k u_l u_i",
];

/// Checks the y-derivative identities at `p`: left sides by jets in `(y⁰, ȳ)` through the
/// chain rule, right sides from `(s, z)`-jets.
pub fn verify_vector_identities(theta: &Expr, params: &ParameterEnv, p: &SamplePoint) -> Result<IdentityReport> {
    let n = p.n();
    let names: Vec<String> = (0..=n).map(|a| format!("y{a}")).collect();
    let space = JetSpace::new(&names, 1)?;
    let y: Vec<Jet> = p.y().iter().enumerate().map(|(a, &v)| Jet::variable_at(&space, a, v)).collect();
    let u = y[1..].iter().skip(1).fold(&y[1] * &y[1], |acc, v| acc + v * v).sqrt()?;
    let s = y[1..].iter().zip(&p.xbar).fold(Jet::constant(&space, 0.0), |acc, (v, &x)| acc + v * x) / &u;
    let z = &y[0] / &u;
    let [x0, r, sv, zv] = p.reduced();
    let theta_y = dsl::eval(theta, &[u.lift(x0), u.lift(r), s, z], params)?;
    let ul: Vec<Jet> = (0..n).map(|l| &y[l + 1] / &u).collect();
    let uv = p.u();

    let c = SzCalc::new(2, sv, zv)?;
    let t = c.eval_theta_at(theta, params, x0, r)?;
    let (tv, ts) = (t.value(), c.ds(&t).value());
    let psi_k = |k: i32| c.zpow(&c.psi(&c.zpow(&t, k)), -k).value();
    let (psi0, psi1, psi2, psi3) = (psi_k(0), psi_k(1), psi_k(2), psi_k(3));
    let uvals: Vec<f64> = ul.iter().map(|j| j.value()).collect();
    let x = &p.xbar;
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let dy = |f: &Jet, a: usize| f.partial(&unit(n + 1, a)).unwrap();

    let mut res = [0.0f64; 5];
    res[0] = (dy(&theta_y, 0) - tv_z(&c, &t) / uv).abs();
    for l in 0..n {
        let lhs = uv * dy(&theta_y, l + 1);
        res[1] = res[1].max((lhs - (ts * x[l] + psi0 * uvals[l])).abs());
        let tul = &theta_y * &ul[l];
        for k in 0..n {
            let lhs = uv * dy(&tul, k + 1);
            let rhs = tv * d(k, l) + ts * x[k] * uvals[l] + psi1 * uvals[k] * uvals[l];
            res[2] = res[2].max((lhs - rhs).abs());
            let tukul = &tul * &ul[k];
            for j in 0..n {
                let lhs = uv * dy(&tukul, j + 1);
                let rhs = tv * (d(j, k) * uvals[l] + d(j, l) * uvals[k])
                    + ts * x[j] * uvals[k] * uvals[l]
                    + psi2 * uvals[j] * uvals[k] * uvals[l];
                res[3] = res[3].max((lhs - rhs).abs());
                for i in 0..n {
                    let f = &tukul * &ul[i];
                    let lhs = uv * dy(&f, j + 1);
                    let rhs = tv
                        * (d(j, k) * uvals[l] * uvals[i]
                            + d(j, l) * uvals[i] * uvals[k]
                            + d(j, i) * uvals[k] * uvals[l])
                        + ts * x[j] * uvals[k] * uvals[l] * uvals[i]
                        + psi3 * uvals[j] * uvals[k] * uvals[l] * uvals[i];
                    res[4] = res[4].max((lhs - rhs).abs());
                }
            }
        }
    }
    Ok(IdentityReport {
        names: VECTOR_IDENTITIES.iter().map(|s| s.to_string()).collect(),
        residuals: res.to_vec(),
        points: 1,
    })
}

fn tv_z(c: &SzCalc, t: &Jet) -> f64 {
    c.dz(t).value()
}

fn unit(len: usize, a: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    v[a] = 1;
    v
}

impl SzCalc {
    /// Like [`SzCalc::eval_theta`] but with `x⁰` and `r` fixed to given values.
    pub fn eval_theta_at(&self, theta: &Expr, params: &ParameterEnv, x0: f64, r: f64) -> Result<Jet> {
        let vars = [self.s.lift(x0), self.s.lift(r), self.s.clone(), self.z.clone()];
        Ok(dsl::eval(theta, &vars, params)?)
    }
}

/// The `(s, z)` points used by the identity suite: `s ∈ [−0.9, 0.9]`, `z ∈ [0.1, 2]`.
pub fn default_sz_grid() -> Vec<(f64, f64)> {
    let ss = crate::metric::Axis::new(-0.9, 0.9, 5).values();
    let zs = crate::metric::Axis::new(0.1, 2.0, 5).values();
    ss.iter().flat_map(|&s| zs.iter().map(move |&z| (s, z))).collect()
}

/// Ten test functions for the identity suite.
pub const THETA_CORPUS: [&str; 10] = [
    "s^2*z",
    "exp(s)*arctan(z)",
    "1",
    "sqrt(z^2+1)+0.3*s*z",
    "sin(s)*cos(z)+z^3",
    "log(2+s)*exp(-z)",
    "(1+s^2)^1.5/(1+z^2)",
    "arctan(s*z+1)",
    "exp(s*z)*sqrt(3+s+z)",
    "s^4-2*s^2*z^2+z^5",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use approx::assert_relative_eq;

    fn env() -> ParameterEnv {
        ParameterEnv::new()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&parse("3.5").unwrap(), &env(), 0.4, 1.2).unwrap(), 0.0);
        assert_relative_eq!(psi(&parse("s*z").unwrap(), &env(), 1.0, 1.0).unwrap(), -2.0);
        // Euler: s^a z^b has Psi = -(a+b) Theta
        let v = psi(&parse("s^2*z^3").unwrap(), &env(), 0.7, 1.3).unwrap();
        assert_relative_eq!(v, -5.0 * 0.49 * 1.3f64.powi(3), max_relative = 1e-14);
    }

    #[test]
    fn polynomial_identities_are_exact() {
        let rep = verify_identities(&parse("s^2*z").unwrap(), &env(), &default_sz_grid()).unwrap();
        assert!(rep.max() <= 1e-12, "{:?}", rep.residuals);
    }

    #[test]
    fn transcendental_identities() {
        let rep = verify_identities(&parse("exp(s)*arctan(z)").unwrap(), &env(), &default_sz_grid()).unwrap();
        assert!(rep.max() <= 1e-10, "{:?}", rep.residuals);
    }

    #[test]
    fn constant_identities_hold() {
        let rep = verify_identities(&parse("1").unwrap(), &env(), &default_sz_grid()).unwrap();
        assert!(rep.max() <= 1e-12, "{:?}", rep.residuals);
    }

    #[test]
    fn vector_identities_simple_fields() {
        let p = SamplePoint::new(0.1, vec![0.4, -0.2, 0.5], 0.8, vec![0.3, 0.6, -0.4]).unwrap();
        for text in ["z", "s", "exp(s)*sqrt(1+z^2)"] {
            let rep = verify_vector_identities(&parse(text).unwrap(), &env(), &p).unwrap();
            assert!(rep.max() <= 1e-12, "{text}: {:?}", rep.residuals);
        }
    }
}
