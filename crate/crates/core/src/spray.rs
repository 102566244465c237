//! Geodesic spray coefficients: the reduced closed form and a raw-coordinate oracle.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::jets::{Jet, JetSpace, Real};
use crate::metric::{MetricSpec, PhiTable, SamplePoint};

/// The φ-partials the spray formulas consume.
#[derive(Debug, Clone)]
pub struct PhiPartials<T> {
    pub phi: T,
    pub s: T,
    pub z: T,
    pub ss: T,
    pub sz: T,
    pub zz: T,
    pub x0: T,
    pub r: T,
    pub x0s: T,
    pub x0z: T,
    pub rs: T,
    pub rz: T,
}

const BASES: [[u8; 4]; 12] = [
    [0, 0, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [0, 0, 2, 0],
    [0, 0, 1, 1],
    [0, 0, 0, 2],
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
];

impl<T: Clone> PhiPartials<T> {
    fn from_fn(mut f: impl FnMut([u8; 4]) -> T) -> PhiPartials<T> {
        let [phi, s, z, ss, sz, zz, x0, r, x0s, x0z, rs, rz] = BASES.map(&mut f);
        PhiPartials { phi, s, z, ss, sz, zz, x0, r, x0s, x0z, rs, rz }
    }
}

impl PhiPartials<f64> {
    pub fn from_table(t: &PhiTable) -> PhiPartials<f64> {
        PhiPartials::from_fn(|[a, b, c, d]| t.d(a, b, c, d))
    }
}

impl PhiPartials<Jet> {
    /// Each partial promoted to a jet in `(s, z)` over `space`.
    pub fn sz_jets(t: &PhiTable, space: &Arc<JetSpace>) -> PhiPartials<Jet> {
        PhiPartials::from_fn(|base| t.sz_jet(space, base))
    }
}

/// `N, W, L, U, V, φ̃, p₁, p₂` at a point (or as jets around it).
#[derive(Debug, Clone, Serialize)]
pub struct SprayQuantities<T> {
    pub n: T,
    pub w: T,
    pub l: T,
    pub u: T,
    pub v: T,
    pub varphi: T,
    pub p1: T,
    pub p2: T,
}

/// The reduced spray quantities; `s` and `z` may be jets so that the result carries
/// `(s, z)`-derivatives.
pub fn spray_quantities_generic<T: Real>(d: &PhiPartials<T>, r: f64, s: &T, z: &T) -> Result<SprayQuantities<T>> {
    let s = s.clone();
    let z = z.clone();
    let d = d.clone();
    let rr_ss = -(s.clone() * s.clone()) + r * r;
    let varphi = z.clone() * d.x0.clone() + s.clone() * d.r.clone() / r + d.s.clone();
    let p1 = z.clone() * d.x0s.clone() - d.r.clone() / r + s.clone() * d.rs.clone() / r + d.ss.clone();
    let p2 = z.clone() * d.x0z.clone() - d.x0.clone() + s.clone() * d.rz.clone() / r + d.sz.clone();
    let omega = d.phi.clone() - s.clone() * d.s.clone() - z.clone() * d.z.clone();
    let lambda =
        omega.clone() * d.zz.clone() + rr_ss.clone() * (d.ss.clone() * d.zz.clone() - d.sz.clone() * d.sz.clone());
    if lambda.value() == 0.0 {
        return Err(FinslerError::SingularLambda);
    }
    let two_lambda = lambda * 2.0;
    let u = (p1.clone() * d.zz.clone() - p2.clone() * d.sz.clone()) / two_lambda.clone();
    let l = (-(rr_ss.clone() * p1.clone() * d.sz.clone()) + p2.clone() * (omega + rr_ss.clone() * d.ss.clone()))
        / two_lambda.clone();
    let v = (p1.clone() * d.sz.clone() - p2.clone() * d.ss.clone()) / two_lambda;
    let w = (varphi.clone() / 2.0
        - s.clone() * d.phi.clone() * u.clone()
        - d.z.clone() * l.clone()
        - rr_ss * d.s.clone() * u.clone())
        / d.phi.clone();
    let n = z * (w.clone() + s * u.clone()) + l.clone();
    Ok(SprayQuantities { n, w, l, u, v, varphi, p1, p2 })
}

pub fn spray_quantities(t: &PhiTable) -> Result<SprayQuantities<f64>> {
    let [_, r, s, z] = t.point;
    spray_quantities_generic(&PhiPartials::from_table(t), r, &s, &z)
}

/// The spray quantities as order-`order` jets in `(s, z)` around the table point.
pub fn spray_quantity_jets(t: &PhiTable, order: usize) -> Result<SprayQuantities<Jet>> {
    let [_, r, s, z] = t.point;
    let space = JetSpace::new(&["s", "z"], order)?;
    let d = PhiPartials::sz_jets(t, &space);
    let sj = Jet::variable_at(&space, 0, s);
    let zj = Jet::variable_at(&space, 1, z);
    spray_quantities_generic(&d, r, &sj, &zj)
}

/// The shortcut forms for s-independent φ, next to the general ones.
#[derive(Debug, Clone, Serialize)]
pub struct ShortcutCheck {
    pub u: f64,
    pub l: f64,
    pub w: f64,
    pub du: f64,
    pub dl: f64,
    pub dw: f64,
    /// `W` with the sign of the `φ_r` term flipped; matches the general form when `du`, `dl`
    /// vanish.
    pub dw_flipped: f64,
}

pub fn shortcut_check(t: &PhiTable) -> Result<ShortcutCheck> {
    let [_, r, s, z] = t.point;
    let q = spray_quantities(t)?;
    let d = PhiPartials::from_table(t);
    let denom = d.phi - z * d.z;
    if denom == 0.0 {
        return Err(FinslerError::SingularOmega);
    }
    if d.zz == 0.0 {
        return Err(FinslerError::SingularPhiZZ);
    }
    let u = -d.r / (2.0 * r * denom);
    let l = (z * d.x0z + s / r * d.rz - d.x0) / (2.0 * d.zz);
    let w = (z / 2.0 * d.x0 - s / (2.0 * r) * d.r - s * d.phi * u - d.z * l) / d.phi;
    let w_flipped = (z / 2.0 * d.x0 + s / (2.0 * r) * d.r - s * d.phi * u - d.z * l) / d.phi;
    Ok(ShortcutCheck {
        u,
        l,
        w,
        du: (u - q.u).abs(),
        dl: (l - q.l).abs(),
        dw: (w - q.w).abs(),
        dw_flipped: (w_flipped - q.w).abs(),
    })
}

/// `G^A` for `A = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayCoefficients {
    pub g: Vec<f64>,
}

impl SprayCoefficients {
    pub fn max_abs(&self) -> f64 {
        self.g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// `G⁰ = u²N`, `Gⁱ = u²W uᵢ + u²U xⁱ`.
pub fn spray(spec: &MetricSpec, p: &SamplePoint) -> Result<SprayCoefficients> {
    let q = spray_quantities(&spec.phi_table(p)?)?;
    let u = p.u();
    let mut g = Vec::with_capacity(p.n() + 1);
    g.push(u * u * q.n);
    for i in 0..p.n() {
        g.push(u * q.w * p.ybar[i] + u * u * q.u * p.xbar[i]);
    }
    Ok(SprayCoefficients { g })
}

/// `F²` as a jet in all raw coordinates `(x⁰, x̄, y⁰, ȳ)` of order `order`.
pub(crate) fn raw_f_jet(spec: &MetricSpec, p: &SamplePoint, order: usize) -> Result<(Jet, Jet)> {
    let n = p.n();
    let names: Vec<String> = (0..=n).map(|a| format!("x{a}")).chain((0..=n).map(|a| format!("y{a}"))).collect();
    let space = JetSpace::new(&names, order)?;
    let base: Vec<f64> = std::iter::once(p.x0).chain(p.xbar.iter().copied()).chain(p.y()).collect();
    let v: Vec<Jet> = base.iter().enumerate().map(|(i, &b)| Jet::variable_at(&space, i, b)).collect();
    let f = spec.finsler(&v[0], &v[1..=n], &v[n + 1], &v[n + 2..])?;
    let f2 = &f * &f;
    Ok((f, f2))
}

/// Solves `A x = b` on jets by Gaussian elimination with pivoting on base values.
pub(crate) fn solve_jets(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>) -> Result<Vec<Jet>> {
    let m = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |s, j| s.max(j.value().abs()));
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs())).unwrap();
        if !(a[piv][col].value().abs() > 1e-14 * scale) {
            return Err(FinslerError::SingularMetric);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for row in col + 1..m {
            let factor = &a[row][col] * &inv;
            for k in col..m {
                let t = &factor * &a[col][k];
                a[row][k] -= &t;
            }
            let t = &factor * &b[col];
            b[row] -= &t;
        }
    }
    let mut x: Vec<Jet> = b.clone();
    for row in (0..m).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..m {
            acc -= &(&a[row][k] * &x[k]);
        }
        x[row] = &acc * &a[row][row].recip();
    }
    Ok(x)
}

/// `G^A = ¼ g^{AB}([F²]_{x^C y^B} y^C − [F²]_{x^B})` as jets in the raw coordinates.
///
/// With `order = 2 + k` the returned jets carry all derivatives of `G` up to order `k`.
pub(crate) fn oracle_spray_jets(spec: &MetricSpec, p: &SamplePoint, order: usize) -> Result<Vec<Jet>> {
    let n = p.n();
    let (_, f2) = raw_f_jet(spec, p, order)?;
    let space = f2.space().clone();
    let xv = |a: usize| a;
    let yv = |a: usize| n + 1 + a;
    let dy: Vec<Jet> = (0..=n).map(|b| f2.derivative(yv(b))).collect::<Result<_, _>>()?;
    let g: Vec<Vec<Jet>> = (0..=n)
        .map(|a| (0..=n).map(|b| dy[b].derivative(yv(a)).map(|j| j * 0.5)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let mut rhs = Vec::with_capacity(n + 1);
    for b in 0..=n {
        let mut m = -f2.derivative(xv(b))?;
        for c in 0..=n {
            let y_c = Jet::variable_at(&space, yv(c), p.y()[c]);
            m += &(&dy[b].derivative(xv(c))? * &y_c);
        }
        rhs.push(m * 0.25);
    }
    solve_jets(g, rhs)
}

/// Spray coefficients straight from the definition, without the `(r, s, z)` reduction.
pub fn spray_oracle(spec: &MetricSpec, p: &SamplePoint) -> Result<SprayCoefficients> {
    let g = oracle_spray_jets(spec, p, 2)?;
    Ok(SprayCoefficients { g: g.iter().map(|j| j.value()).collect() })
}

/// `max|a − b| ≤ rel · max(scale, floor/rel)`: relative above `1e-4`, absolute below.
pub fn agree(delta: f64, scale: f64, rel: f64) -> bool {
    delta <= rel * scale.max(1e-4)
}
