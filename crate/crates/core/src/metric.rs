//! Metric definitions `F = |ȳ| φ(x⁰, r, s, z)`, sample points, grids and validity checks.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::dsl::{self, Expr, Family, ParameterEnv, Var};
use crate::error::{FinslerError, Result};
use crate::jets::{Elementary, Jet, JetSpace, Real};

/// Order of the φ jet: enough for third (s, z)-derivatives of the spray quantities.
pub const PHI_ORDER: usize = 6;

/// A point of the slit tangent bundle in raw coordinates `(x⁰, x̄, y⁰, ȳ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub x0: f64,
    pub xbar: Vec<f64>,
    pub y0: f64,
    pub ybar: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SamplePoint {
    pub fn new(x0: f64, xbar: Vec<f64>, y0: f64, ybar: Vec<f64>) -> Result<SamplePoint> {
        if xbar.len() != ybar.len() {
            return Err(FinslerError::InvalidPoint("x̄ and ȳ differ in length".into()));
        }
        if !(2..=6).contains(&xbar.len()) {
            return Err(FinslerError::InvalidDimension(xbar.len()));
        }
        if dot(&ybar, &ybar) == 0.0 {
            return Err(FinslerError::InvalidPoint("ȳ = 0".into()));
        }
        Ok(SamplePoint { x0, xbar, y0, ybar })
    }

    /// The point `x̄ = (r, 0, …)`, `ȳ = u (s/r, √(r²−s²)/r, 0, …)`, `y⁰ = u z`.
    pub fn canonical(n: usize, x0: f64, r: f64, s: f64, z: f64, u: f64) -> SamplePoint {
        let mut xbar = vec![0.0; n];
        let mut ybar = vec![0.0; n];
        xbar[0] = r;
        ybar[0] = u * s / r;
        ybar[1] = u * (r * r - s * s).max(0.0).sqrt() / r;
        SamplePoint { x0, xbar, y0: u * z, ybar }
    }

    pub fn n(&self) -> usize {
        self.xbar.len()
    }

    pub fn r(&self) -> f64 {
        dot(&self.xbar, &self.xbar).sqrt()
    }

    pub fn u(&self) -> f64 {
        dot(&self.ybar, &self.ybar).sqrt()
    }

    pub fn s(&self) -> f64 {
        dot(&self.xbar, &self.ybar) / self.u()
    }

    pub fn z(&self) -> f64 {
        self.y0 / self.u()
    }

    /// `(x⁰, r, s, z)`
    pub fn reduced(&self) -> [f64; 4] {
        [self.x0, self.r(), self.s(), self.z()]
    }

    /// `y` as one vector `(y⁰, ȳ)`.
    pub fn y(&self) -> Vec<f64> {
        std::iter::once(self.y0).chain(self.ybar.iter().copied()).collect()
    }

    pub fn with_y_scaled(&self, lambda: f64) -> SamplePoint {
        SamplePoint {
            x0: self.x0,
            xbar: self.xbar.clone(),
            y0: lambda * self.y0,
            ybar: self.ybar.iter().map(|v| lambda * v).collect(),
        }
    }

    /// Applies `O` to both `x̄` and `ȳ`.
    pub fn rotated(&self, o: &DMatrix<f64>) -> SamplePoint {
        let apply = |v: &[f64]| (o * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec();
        SamplePoint { x0: self.x0, xbar: apply(&self.xbar), y0: self.y0, ybar: apply(&self.ybar) }
    }
}

/// Box constraints on `(x⁰, r, s/r, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainBox {
    pub x0: (f64, f64),
    pub r: (f64, f64),
    /// Bound on `|s|/r`; must stay below 1.
    pub s_frac: f64,
    pub z: (f64, f64),
}

impl Default for DomainBox {
    fn default() -> DomainBox {
        DomainBox {
            x0: (f64::NEG_INFINITY, f64::INFINITY),
            r: (0.0, f64::INFINITY),
            s_frac: 1.0,
            z: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl DomainBox {
    pub fn contains(&self, [x0, r, s, z]: [f64; 4]) -> bool {
        let inside = |(lo, hi): (f64, f64), v: f64| lo <= v && v <= hi;
        inside(self.x0, x0) && r > 0.0 && inside(self.r, r) && s.abs() < self.s_frac * r && inside(self.z, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub const fn new(min: f64, max: f64, count: usize) -> Axis {
        Axis { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Tensor-product grid over `(x⁰, r, s/r, z)`; `s` is sampled as a fraction of `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x0: Axis,
    pub r: Axis,
    pub s_frac: Axis,
    pub z: Axis,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec {
            x0: Axis::new(-1.0, 1.0, 5),
            r: Axis::new(0.2, 1.0, 5),
            s_frac: Axis::new(-0.9, 0.9, 5),
            z: Axis::new(0.1, 2.0, 5),
        }
    }
}

impl GridSpec {
    /// Points `(x⁰, r, s, z)` with `z` varying fastest.
    pub fn points(&self) -> Vec<[f64; 4]> {
        let (zs, fs) = (self.z.values(), self.s_frac.values());
        let mut out = Vec::new();
        for x0 in self.x0.values() {
            for r in self.r.values() {
                for &f in &fs {
                    for &z in &zs {
                        out.push([x0, r, f * r, z]);
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.x0.count * self.r.count * self.s_frac.count * self.z.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A weakly orthogonally invariant metric: `φ` as an expression plus dimension and domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub n: usize,
    pub phi: Expr,
    pub params: ParameterEnv,
    pub domain: DomainBox,
}

impl MetricSpec {
    pub fn new(name: &str, n: usize, phi: Expr, params: ParameterEnv) -> Result<MetricSpec> {
        if !(2..=6).contains(&n) {
            return Err(FinslerError::InvalidDimension(n));
        }
        for p in phi.parameter_refs() {
            if !params.contains(p) {
                return Err(dsl::DslError::UnboundParameter(p.to_string()).into());
            }
        }
        Ok(MetricSpec { name: name.to_string(), n, phi, params, domain: DomainBox::default() })
    }

    pub fn parse(name: &str, n: usize, text: &str, params: ParameterEnv) -> Result<MetricSpec> {
        let phi = dsl::parse_with_params(text, &params)?;
        MetricSpec::new(name, n, phi, params)
    }

    pub fn builtin(family: Family, n: usize) -> Result<MetricSpec> {
        MetricSpec::new(family.name(), n, family.expr()?, ParameterEnv::new())
    }

    pub fn with_domain(mut self, domain: DomainBox) -> MetricSpec {
        self.domain = domain;
        self
    }

    /// Syntactic test: `s` does not occur in `φ`.
    pub fn is_s_independent(&self) -> bool {
        !self.phi.depends_on(Var::S)
    }

    pub fn phi_eval<T: Real>(&self, vars: &[T; 4]) -> Result<T> {
        Ok(dsl::eval(&self.phi, vars, &self.params)?)
    }

    pub fn phi_value(&self, p: [f64; 4]) -> Result<f64> {
        self.phi_eval(&p)
    }

    /// `F = |ȳ| φ(x⁰, |x̄|, ⟨x̄,ȳ⟩/|ȳ|, y⁰/|ȳ|)` on any scalar type.
    pub fn finsler<T: Real>(&self, x0: &T, xbar: &[T], y0: &T, ybar: &[T]) -> Result<T> {
        let sum_sq = |v: &[T]| v.iter().skip(1).fold(v[0].clone() * v[0].clone(), |acc, a| acc + a.clone() * a.clone());
        let r = sum_sq(xbar).apply(Elementary::Sqrt)?;
        let u = sum_sq(ybar).apply(Elementary::Sqrt)?;
        let xy = xbar
            .iter()
            .zip(ybar)
            .skip(1)
            .fold(xbar[0].clone() * ybar[0].clone(), |acc, (a, b)| acc + a.clone() * b.clone());
        let s = xy / u.clone();
        let z = y0.clone() / u.clone();
        let phi = self.phi_eval(&[x0.clone(), r, s, z])?;
        Ok(u * phi)
    }

    pub fn finsler_at(&self, p: &SamplePoint) -> Result<f64> {
        self.finsler(&p.x0, &p.xbar, &p.y0, &p.ybar)
    }

    fn check_point(&self, p: [f64; 4]) -> Result<()> {
        if !self.domain.contains(p) {
            return Err(FinslerError::OutOfDomain(p));
        }
        Ok(())
    }

    /// All partials of φ up to total order 6 at `(x⁰, r, s, z)`.
    pub fn phi_table_at(&self, p: [f64; 4]) -> Result<PhiTable> {
        self.check_point(p)?;
        let space = JetSpace::new(&["x0", "r", "s", "z"], PHI_ORDER)?;
        let jet = dsl::eval_jets(&self.phi, &space, p, &self.params)?;
        if !(jet.value() > 0.0) {
            return Err(FinslerError::NonPositivePhi { value: jet.value(), point: p });
        }
        Ok(PhiTable { point: p, jet })
    }

    pub fn phi_table(&self, p: &SamplePoint) -> Result<PhiTable> {
        self.phi_table_at(p.reduced())
    }

    /// `φ` with its `(s, z)` derivatives to order 2: all that Ω, Λ and validity need.
    pub fn phi_sz2(&self, p: [f64; 4]) -> Result<PhiTable> {
        self.check_point(p)?;
        let space = JetSpace::new(&["x0", "r", "s", "z"], 2)?;
        let jet = dsl::eval_jets(&self.phi, &space, p, &self.params)?;
        Ok(PhiTable { point: p, jet })
    }

    /// `g_AB = ½ ∂²F²/∂y^A∂y^B` by order-2 jets in `(y⁰, ȳ)`.
    pub fn fundamental_tensor(&self, p: &SamplePoint) -> Result<DMatrix<f64>> {
        let n = p.n();
        let names: Vec<String> = (0..=n).map(|a| format!("y{a}")).collect();
        let space = JetSpace::new(&names, 2)?;
        let y: Vec<Jet> = p.y().iter().enumerate().map(|(a, &v)| Jet::variable_at(&space, a, v)).collect();
        let x0 = Jet::constant(&space, p.x0);
        let xbar: Vec<Jet> = p.xbar.iter().map(|&v| Jet::constant(&space, v)).collect();
        let f = self.finsler(&x0, &xbar, &y[0], &y[1..])?;
        let f2 = &f * &f;
        let mut g = DMatrix::zeros(n + 1, n + 1);
        let mut idx = vec![0u8; n + 1];
        for a in 0..=n {
            for b in a..=n {
                idx[a] += 1;
                idx[b] += 1;
                let v = 0.5 * f2.partial(&idx)?;
                idx[a] -= 1;
                idx[b] -= 1;
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        Ok(g)
    }
}

/// The φ jet at a point together with accessors for the named partials.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub point: [f64; 4],
    jet: Jet,
}

impl PhiTable {
    pub fn jet(&self) -> &Jet {
        &self.jet
    }

    pub fn order(&self) -> usize {
        self.jet.order()
    }

    /// `∂^{a+b+c+d} φ / ∂x⁰^a ∂r^b ∂s^c ∂z^d`.
    pub fn d(&self, a: u8, b: u8, c: u8, d: u8) -> f64 {
        self.jet.partial(&[a, b, c, d]).expect("phi table order exceeded")
    }

    pub fn phi(&self) -> f64 {
        self.jet.value()
    }
    pub fn phi_s(&self) -> f64 {
        self.d(0, 0, 1, 0)
    }
    pub fn phi_z(&self) -> f64 {
        self.d(0, 0, 0, 1)
    }
    pub fn phi_ss(&self) -> f64 {
        self.d(0, 0, 2, 0)
    }
    pub fn phi_sz(&self) -> f64 {
        self.d(0, 0, 1, 1)
    }
    pub fn phi_zz(&self) -> f64 {
        self.d(0, 0, 0, 2)
    }
    pub fn phi_x0(&self) -> f64 {
        self.d(1, 0, 0, 0)
    }
    pub fn phi_r(&self) -> f64 {
        self.d(0, 1, 0, 0)
    }

    /// The partial `base` of φ as a jet in `(s, z)`: the coefficient of `sⁱzʲ` is
    /// `∂^{base + (0,0,i,j)} φ / (i! j!)`.
    pub fn sz_jet(&self, space: &Arc<JetSpace>, base: [u8; 4]) -> Jet {
        let order = space.order();
        let base_deg: usize = base.iter().map(|&b| b as usize).sum();
        assert!(base_deg + order <= self.order(), "phi table too shallow for an order-{order} (s, z) jet");
        let n = space.len_for_order(order);
        let coeffs = (0..n)
            .map(|m| {
                let e = space.exponents(m);
                let idx = [base[0], base[1], base[2] + e[0], base[3] + e[1]];
                self.jet.partial(&idx).unwrap() / space.factorial_weight(m)
            })
            .collect();
        Jet::from_coeffs(space, order, coeffs)
    }
}

/// `Ω = φ − sφ_s − zφ_z`
pub fn omega(t: &PhiTable) -> f64 {
    let [_, _, s, z] = t.point;
    t.phi() - s * t.phi_s() - z * t.phi_z()
}

/// `Λ = Ω φ_zz + (r² − s²)(φ_ss φ_zz − φ_sz²)`
pub fn lambda_(t: &PhiTable, r: f64, s: f64) -> f64 {
    omega(t) * t.phi_zz() + (r * r - s * s) * (t.phi_ss() * t.phi_zz() - t.phi_sz() * t.phi_sz())
}

/// Relative eigenvalue floor for positive definiteness.
pub const EIGEN_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointValidity {
    pub point: [f64; 4],
    pub phi: f64,
    pub omega: f64,
    pub lambda: f64,
    pub eigen_ratio: f64,
    pub criterion: bool,
    pub hessian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub points: usize,
    pub min_phi: f64,
    pub min_omega: f64,
    pub min_lambda: f64,
    pub min_eigen_ratio: f64,
    pub criterion_failures: usize,
    pub hessian_failures: usize,
    pub disagreements: usize,
    pub errors: usize,
    pub pass: bool,
    pub hessian_pass: bool,
}

/// Validity at a single point: the φ/Ω/Λ criterion and the eigenvalues of `g_AB`.
pub fn validate_point(spec: &MetricSpec, p: [f64; 4]) -> Result<PointValidity> {
    let t = spec.phi_sz2(p)?;
    let [x0, r, s, z] = p;
    let (phi, om, lam) = (t.phi(), omega(&t), lambda_(&t, r, s));
    let criterion = phi > 0.0 && lam > 0.0 && (spec.n < 3 || om > 0.0);
    let g = spec.fundamental_tensor(&SamplePoint::canonical(spec.n, x0, r, s, z, 1.0))?;
    let eig = SymmetricEigen::new(g).eigenvalues;
    let (lo, hi) = (eig.min(), eig.abs().max());
    let eigen_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    Ok(PointValidity {
        point: p,
        phi,
        omega: om,
        lambda: lam,
        eigen_ratio,
        criterion,
        hessian: eigen_ratio > EIGEN_FLOOR,
    })
}

pub fn validate(spec: &MetricSpec, grid: &GridSpec) -> Result<ValidityReport> {
    let pts = grid.points();
    if pts.is_empty() {
        return Err(FinslerError::EmptyGrid);
    }
    let results: Vec<Result<PointValidity>> = pts.par_iter().map(|&p| validate_point(spec, p)).collect();
    let mut rep = ValidityReport {
        points: pts.len(),
        min_phi: f64::INFINITY,
        min_omega: f64::INFINITY,
        min_lambda: f64::INFINITY,
        min_eigen_ratio: f64::INFINITY,
        criterion_failures: 0,
        hessian_failures: 0,
        disagreements: 0,
        errors: 0,
        pass: true,
        hessian_pass: true,
    };
    for r in results {
        let Ok(v) = r else {
            rep.errors += 1;
            rep.criterion_failures += 1;
            rep.hessian_failures += 1;
            continue;
        };
        rep.min_phi = rep.min_phi.min(v.phi);
        rep.min_omega = rep.min_omega.min(v.omega);
        rep.min_lambda = rep.min_lambda.min(v.lambda);
        rep.min_eigen_ratio = rep.min_eigen_ratio.min(v.eigen_ratio);
        rep.criterion_failures += usize::from(!v.criterion);
        rep.hessian_failures += usize::from(!v.hessian);
        rep.disagreements += usize::from(v.criterion != v.hessian);
    }
    rep.pass = rep.criterion_failures == 0;
    rep.hessian_pass = rep.hessian_failures == 0;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn euclid() -> MetricSpec {
        MetricSpec::builtin(Family::Euclidean, 3).unwrap()
    }

    #[test]
    fn canonical_point_coordinates() {
        let p = SamplePoint::canonical(3, 0.1, 0.8, -0.3, 1.5, 2.0);
        let [x0, r, s, z] = p.reduced();
        assert_eq!(x0, 0.1);
        assert_relative_eq!(r, 0.8);
        assert_relative_eq!(s, -0.3, epsilon = 1e-15);
        assert_relative_eq!(z, 1.5, epsilon = 1e-15);
        assert_relative_eq!(p.u(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn euclidean_table() {
        let t = euclid().phi_table_at([0.3, 0.5, 0.1, 0.7]).unwrap();
        assert_eq!(t.phi_s(), 0.0);
        assert_eq!(t.phi_r(), 0.0);
        assert_eq!(t.phi_x0(), 0.0);
        assert_relative_eq!(t.phi(), (0.49f64 + 1.0).sqrt());
    }

    #[test]
    fn randers_table() {
        let spec = MetricSpec::builtin(Family::Randers { c: 0.5 }, 3).unwrap();
        let t = spec.phi_table_at([0.0, 0.5, 0.1, 0.0]).unwrap();
        assert_relative_eq!(t.phi(), 1.0);
        assert_relative_eq!(t.phi_z(), 0.5);
        assert_relative_eq!(t.phi_zz(), 1.0);
    }

    #[test]
    fn omega_values() {
        let e = euclid();
        assert_relative_eq!(omega(&e.phi_table_at([0.0, 0.5, 0.0, 0.0]).unwrap()), 1.0);
        assert_relative_eq!(omega(&e.phi_table_at([0.0, 0.5, 0.0, 1.0]).unwrap()), 0.5f64.sqrt(), epsilon = 1e-15);
        let lin = MetricSpec::parse("lin", 3, "1+0.3*z", ParameterEnv::new()).unwrap();
        for z in [-1.0, 0.2, 3.0] {
            assert_relative_eq!(omega(&lin.phi_table_at([0.0, 0.5, 0.0, z]).unwrap()), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn lambda_values() {
        let e = euclid();
        let t = e.phi_table_at([0.0, 0.5, 0.0, 0.0]).unwrap();
        assert_relative_eq!(lambda_(&t, 0.5, 0.0), 1.0);
        let spec = MetricSpec::parse("si", 3, "sqrt(z^2+1+r)*exp(x0)", ParameterEnv::new()).unwrap();
        let t = spec.phi_table_at([0.2, 0.5, 0.3, 0.9]).unwrap();
        assert_eq!(lambda_(&t, 0.5, 0.3), omega(&t) * t.phi_zz());
    }

    #[test]
    fn nonpositive_phi_is_rejected() {
        let spec = MetricSpec::parse("neg", 3, "z", ParameterEnv::new()).unwrap();
        assert!(matches!(spec.phi_table_at([0.0, 0.5, 0.0, -1.0]), Err(FinslerError::NonPositivePhi { .. })));
    }

    #[test]
    fn euclidean_fundamental_tensor_is_identity() {
        let p = SamplePoint::new(0.2, vec![0.3, -0.1, 0.4], 0.7, vec![0.5, 0.2, -0.9]).unwrap();
        let g = euclid().fundamental_tensor(&p).unwrap();
        assert!((g - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-14);
    }

    #[test]
    fn euclidean_validates() {
        let rep = validate(&euclid(), &GridSpec::default()).unwrap();
        assert!(rep.pass && rep.hessian_pass);
        assert_eq!(rep.disagreements, 0);
        assert!(rep.min_lambda > 0.0 && rep.min_omega > 0.0);
    }

    #[test]
    fn randers_beyond_unit_coefficient_fails() {
        // |c| < 1 is enforced by the builtin, so go through the expression language
        let spec = MetricSpec::parse("randers15", 3, "sqrt(z^2+1)+1.5*z", ParameterEnv::new()).unwrap();
        let mut grid = GridSpec::default();
        grid.z = Axis::new(-2.0, 2.0, 5);
        let rep = validate(&spec, &grid).unwrap();
        assert!(!rep.pass && !rep.hessian_pass);
        assert_eq!(rep.disagreements, 0);
    }

    #[test]
    fn empty_grid() {
        let mut grid = GridSpec::default();
        grid.z.count = 0;
        assert_eq!(validate(&euclid(), &grid).unwrap_err(), FinslerError::EmptyGrid);
    }

    #[test]
    fn grid_order_is_fixed() {
        let pts = GridSpec::default().points();
        assert_eq!(pts.len(), 625);
        assert_eq!(pts[0], [-1.0, 0.2, -0.9 * 0.2, 0.1]);
        assert_eq!(pts[1][3], 0.1 + 1.9 / 4.0);
    }
}
