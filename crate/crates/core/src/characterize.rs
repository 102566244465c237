//! Residual evaluators for the PDE characterizations and the Berwald/Landsberg classifier.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{berwald_closed_from, landsberg_closed_from, CurvatureInputs};
use crate::error::{FinslerError, Result};
use crate::metric::{omega, validate, GridSpec, MetricSpec, SamplePoint, ValidityReport};
use crate::spray::{spray_quantities, PhiPartials};
use crate::unicorn::{theta_probe, ThetaProbe};

/// Default vanishing threshold.
pub const VANISH_TOL: f64 = 1e-7;

/// Per-equation maxima of absolute residuals over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub names: Vec<String>,
    pub residuals: Vec<f64>,
    pub points: usize,
    pub tol: f64,
    pub vanishes: bool,
}

impl ResidualReport {
    fn new(names: &[&str], rows: Vec<Vec<f64>>, tol: f64) -> ResidualReport {
        let mut residuals = vec![0.0f64; names.len()];
        for row in &rows {
            for (m, v) in residuals.iter_mut().zip(row) {
                *m = m.max(v.abs());
            }
        }
        let vanishes = residuals.iter().all(|&v| v <= tol);
        ResidualReport {
            names: names.iter().map(|s| s.to_string()).collect(),
            residuals,
            points: rows.len(),
            tol,
            vanishes,
        }
    }

    pub fn max(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

fn canonical(spec: &MetricSpec, [x0, r, s, z]: [f64; 4]) -> SamplePoint {
    SamplePoint::canonical(spec.n, x0, r, s, z, 1.0)
}

/// Curvature inputs at every grid point, in grid order.
pub fn grid_inputs(spec: &MetricSpec, grid: &GridSpec) -> Result<Vec<CurvatureInputs>> {
    let pts = grid.points();
    if pts.is_empty() {
        return Err(FinslerError::EmptyGrid);
    }
    pts.par_iter().map(|&p| CurvatureInputs::new(spec, &canonical(spec, p))).collect::<Vec<_>>().into_iter().collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridCurvature {
    pub berwald_max: f64,
    pub landsberg_max: f64,
    pub points: usize,
}

fn curvature_max(inputs: &[CurvatureInputs]) -> GridCurvature {
    let maxima: Vec<(f64, f64)> =
        inputs.par_iter().map(|c| (berwald_closed_from(c).max_abs(), landsberg_closed_from(c).max_abs())).collect();
    let (b, l) = maxima.into_iter().fold((0.0f64, 0.0f64), |(b, l), (x, y)| (b.max(x), l.max(y)));
    GridCurvature { berwald_max: b, landsberg_max: l, points: inputs.len() }
}

/// Closed-form Berwald and Landsberg maxima over the grid.
pub fn grid_curvature_max(spec: &MetricSpec, grid: &GridSpec) -> Result<GridCurvature> {
    Ok(curvature_max(&grid_inputs(spec, grid)?))
}

pub const BERWALD_CONDITION_NAMES: [&str; 8] =
    ["z Psi(U_s/z)", "z Psi(U_z/z)", "U_zzz", "z Psi(N_s/z)", "z Psi(N_z/z)", "N_zzz", "z Psi(W/z)", "W_zz"];

fn berwald_condition_row(c: &CurvatureInputs) -> Vec<f64> {
    let (u, n, w) = (&c.u_, &c.n, &c.w);
    vec![u.zpsi_s, u.zpsi_z, u.zzz, n.zpsi_s, n.zpsi_z, n.zzz, w.zpsi_0, w.zz]
}

/// The vanishing-Berwald conditions on `U`, `N`, `W`.
pub fn berwald_psi_residuals(spec: &MetricSpec, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let inputs = grid_inputs(spec, grid)?;
    Ok(ResidualReport::new(&BERWALD_CONDITION_NAMES, inputs.iter().map(berwald_condition_row).collect(), tol))
}

pub const LANDSBERG_EQUATION_NAMES: [&str; 4] = [
    "phi_z N_zzz + s Omega U_zzz + Omega W_zzz",
    "phi_z N_szz + Omega W_szz",
    "z phi_z Psi(N_z/z) + z s Omega Psi(U_z/z) + Omega Psi(W_z)",
    "z phi_z Psi(N_s/z) + Omega Psi(W_s)",
];

fn landsberg_equation_row(c: &CurvatureInputs) -> Vec<f64> {
    let (u, n, w) = (&c.u_, &c.n, &c.w);
    let (a, om, s) = (c.phi_z, c.omega, c.s);
    vec![
        a * n.zzz + s * om * u.zzz + om * w.zzz,
        a * n.szz + om * w.szz,
        a * n.zpsi_z + s * om * u.zpsi_z + om * w.psi_z,
        a * n.zpsi_s + om * w.psi_s,
    ]
}

/// Largest `|φ_s|` over the grid.
pub fn max_phi_s(spec: &MetricSpec, grid: &GridSpec) -> Result<f64> {
    let v: Vec<Result<f64>> = grid.points().par_iter().map(|&p| Ok(spec.phi_sz2(p)?.phi_s().abs())).collect();
    v.into_iter().try_fold(0.0f64, |m, x| Ok(m.max(x?)))
}

const S_INDEPENDENCE_TOL: f64 = 1e-12;

fn require_s_independent(spec: &MetricSpec, grid: &GridSpec) -> Result<()> {
    let m = max_phi_s(spec, grid)?;
    if m > S_INDEPENDENCE_TOL {
        return Err(FinslerError::NotSIndependent(m));
    }
    Ok(())
}

/// The vanishing-Landsberg equations for `s`-independent `φ`.
pub fn landsberg_pde_residuals(spec: &MetricSpec, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    require_s_independent(spec, grid)?;
    let inputs = grid_inputs(spec, grid)?;
    Ok(ResidualReport::new(&LANDSBERG_EQUATION_NAMES, inputs.iter().map(landsberg_equation_row).collect(), tol))
}

/// Coefficients `f₁ … f₁₀` recovered at one `(x⁰, r)`.
#[derive(Debug, Clone, Serialize)]
pub struct FitCell {
    pub x0: f64,
    pub r: f64,
    pub f: [f64; 10],
    pub fit_residual: f64,
    pub pde_residuals: [f64; 3],
    /// `−φ_r/(2r(φ − zφ_z))` at the first grid `z` (only for `s`-independent `φ`).
    pub g1: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyFit {
    pub cells: Vec<FitCell>,
    pub fit_residual: f64,
    pub pde_residuals: [f64; 3],
    /// `max |f₄ − g₁|`: for `s`-independent Berwald metrics `U` is the constant `f₄`.
    pub g1_delta: Option<f64>,
    pub samples_per_cell: usize,
}

fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (m, k) = (rows.len(), rows[0].len());
    if m < k {
        return Err(FinslerError::RankDeficientFit { samples: m, unknowns: k });
    }
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < k {
        return Err(FinslerError::RankDeficientFit { samples: m, unknowns: k });
    }
    let x = svd.solve(&b, 1e-14 * smax).map_err(|_| FinslerError::RankDeficientFit { samples: m, unknowns: k })?;
    let res = (&a * &x - &b).amax();
    Ok((x.as_slice().to_vec(), res))
}

/// Least-squares fit of `U`, `L`, `W` to the polynomial forms in `(s, z)` at each `(x⁰, r)`,
/// plus the three coupled PDEs evaluated with the fitted polynomials.
pub fn berwald_poly_fit(spec: &MetricSpec, grid: &GridSpec) -> Result<PolyFit> {
    let s_indep = max_phi_s(spec, grid)? <= S_INDEPENDENCE_TOL;
    let (fs, zs) = (grid.s_frac.values(), grid.z.values());
    let cells_xr: Vec<(f64, f64)> =
        grid.x0.values().into_iter().flat_map(|x0| grid.r.values().into_iter().map(move |r| (x0, r))).collect();
    let cells: Vec<Result<FitCell>> = cells_xr
        .par_iter()
        .map(|&(x0, r)| {
            let mut tables = Vec::new();
            for &f in &fs {
                for &z in &zs {
                    let t = spec.phi_table_at([x0, r, f * r, z])?;
                    let q = spray_quantities(&t)?;
                    tables.push((f * r, z, t, q));
                }
            }
            let basis = |s: f64, z: f64| vec![s * s / 2.0, s * z, z * z / 2.0, 1.0];
            let rows: Vec<Vec<f64>> = tables.iter().map(|(s, z, ..)| basis(*s, *z)).collect();
            let (fu, ru) = lstsq(&rows, &tables.iter().map(|(.., q)| q.u).collect::<Vec<_>>())?;
            let u_fit = |s: f64, z: f64| fu[0] * s * s / 2.0 + fu[1] * s * z + fu[2] * z * z / 2.0 + fu[3];
            let l_target: Vec<f64> = tables.iter().map(|(s, z, _, q)| q.l + s * z * (u_fit(*s, *z) - fu[3])).collect();
            let (fl, rl) = lstsq(&rows, &l_target)?;
            let wrows: Vec<Vec<f64>> = tables.iter().map(|(s, z, ..)| vec![*s, *z]).collect();
            let (fw, rw) = lstsq(&wrows, &tables.iter().map(|(.., q)| q.w).collect::<Vec<_>>())?;
            let l_fit = |s: f64, z: f64| {
                fl[0] * s * s / 2.0 + fl[1] * s * z + fl[2] * z * z / 2.0 + fl[3] - s * z * (u_fit(s, z) - fu[3])
            };
            let mut pde = [0.0f64; 3];
            for (s, z, t, q) in &tables {
                let (s, z) = (*s, *z);
                let d = PhiPartials::from_table(t);
                let (uf, lf, wf) = (u_fit(s, z), l_fit(s, z), fw[0] * s + fw[1] * z);
                let rr = r * r - s * s;
                let om = omega(t);
                let e1 = q.p1 - 2.0 * ((om + rr * d.ss) * uf + d.sz * lf);
                let e2 = q.p2 - 2.0 * (rr * d.sz * uf + d.zz * lf);
                let e3 = q.varphi - 2.0 * (wf * d.phi + (s * d.phi + rr * d.s) * uf + d.z * lf);
                for (m, e) in pde.iter_mut().zip([e1, e2, e3]) {
                    *m = m.max(e.abs());
                }
            }
            let g1 = if s_indep {
                let (_, _, t, _) = &tables[0];
                let [_, _, _, z] = t.point;
                let den = t.phi() - z * t.phi_z();
                Some(-t.phi_r() / (2.0 * r * den))
            } else {
                None
            };
            let mut f = [0.0; 10];
            f[..4].copy_from_slice(&fu);
            f[4..8].copy_from_slice(&fl);
            f[8..].copy_from_slice(&fw);
            Ok(FitCell { x0, r, f, fit_residual: ru.max(rl).max(rw), pde_residuals: pde, g1 })
        })
        .collect();
    let cells: Vec<FitCell> = cells.into_iter().collect::<Result<_>>()?;
    let fit_residual = cells.iter().fold(0.0f64, |m, c| m.max(c.fit_residual));
    let mut pde_residuals = [0.0f64; 3];
    for c in &cells {
        for (m, v) in pde_residuals.iter_mut().zip(c.pde_residuals) {
            *m = m.max(v);
        }
    }
    let g1_delta = s_indep.then(|| cells.iter().fold(0.0f64, |m, c| m.max((c.f[3] - c.g1.unwrap()).abs())));
    Ok(PolyFit { cells, fit_residual, pde_residuals, g1_delta, samples_per_cell: fs.len() * zs.len() })
}

/// `g₁`, `g₂` recovered at one `(x⁰, r)` from the probe `z`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GCell {
    pub x0: f64,
    pub r: f64,
    pub g1: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SIndependentCheck {
    pub residuals: ResidualReport,
    pub cells: Vec<GCell>,
    pub probe_z: f64,
}

/// `z` at which `g₁`, `g₂` are recovered.
pub const PROBE_Z: f64 = 1.0;

/// Recovers `g₁ = −φ_r/(2r(φ − zφ_z))` and `g₂ = φ_{x⁰}/(zφ_z)` at `z = 1` and reports how far
/// `−φ_r/r = 2(φ − zφ_z)g₁` and `φ_{x⁰} = zφ_z g₂` are from holding at the other grid `z`.
pub fn s_independent_berwald_check(spec: &MetricSpec, grid: &GridSpec, tol: f64) -> Result<SIndependentCheck> {
    require_s_independent(spec, grid)?;
    let zs = grid.z.values();
    let cells_xr: Vec<(f64, f64)> =
        grid.x0.values().into_iter().flat_map(|x0| grid.r.values().into_iter().map(move |r| (x0, r))).collect();
    let out: Vec<Result<(GCell, Vec<Vec<f64>>)>> = cells_xr
        .par_iter()
        .map(|&(x0, r)| {
            let t = spec.phi_sz2([x0, r, 0.0, PROBE_Z])?;
            let den1 = t.phi() - PROBE_Z * t.phi_z();
            let den2 = PROBE_Z * t.phi_z();
            if den1 == 0.0 {
                return Err(FinslerError::DegenerateDenominator("phi - z phi_z"));
            }
            let g1 = -t.phi_r() / (2.0 * r * den1);
            // zφ_z = 0 with φ_x0 = 0 leaves g₂ free; take 0
            let g2 = if den2 == 0.0 {
                if t.phi_x0() != 0.0 {
                    return Err(FinslerError::DegenerateDenominator("z phi_z"));
                }
                0.0
            } else {
                t.phi_x0() / den2
            };
            let mut rows = Vec::new();
            for &z in zs.iter().filter(|&&z| z != PROBE_Z) {
                let t = spec.phi_sz2([x0, r, 0.0, z])?;
                rows.push(vec![-t.phi_r() / r - 2.0 * (t.phi() - z * t.phi_z()) * g1, t.phi_x0() - z * t.phi_z() * g2]);
            }
            Ok((GCell { x0, r, g1, g2 }, rows))
        })
        .collect();
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for o in out {
        let (c, r) = o?;
        cells.push(c);
        rows.extend(r);
    }
    let names = ["-phi_r/r - 2(phi - z phi_z) g1", "phi_x0 - z phi_z g2"];
    Ok(SIndependentCheck { residuals: ResidualReport::new(&names, rows, tol), cells, probe_z: PROBE_Z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    InvalidMetric,
    Berwald,
    LandsbergNotBerwald,
    NonLandsberg,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::InvalidMetric => "INVALID_METRIC",
            Verdict::Berwald => "BERWALD",
            Verdict::LandsbergNotBerwald => "LANDSBERG_NOT_BERWALD",
            Verdict::NonLandsberg => "NON_LANDSBERG",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub tol: f64,
    pub validity: Option<ValidityReport>,
    pub berwald_max: Option<f64>,
    pub landsberg_max: Option<f64>,
    /// Max of the vanishing-Berwald conditions on `U`, `N`, `W`.
    pub berwald_conditions_max: Option<f64>,
    /// Max of the vanishing-Landsberg equations (`s`-independent `φ` only).
    pub landsberg_equations_max: Option<f64>,
    pub s_independent: bool,
    pub regularity: Option<ThetaProbe>,
    /// Regular, valid, `s`-independent and yet Landsberg but not Berwald.
    pub anomaly: bool,
    pub error: Option<String>,
}

/// Relative threshold on `|θ‴(0⁺) − θ‴(0⁻)|` below which the probe shows no jump.
pub const JUMP_TOL: f64 = 1e-3;

/// Verdict from validity, the Berwald and Landsberg grid maxima and, for `s`-independent
/// metrics, the regularity probe.
pub fn classify(spec: &MetricSpec, grid: &GridSpec, tol: f64) -> Classification {
    let mut out = Classification {
        verdict: Verdict::InvalidMetric,
        tol,
        validity: None,
        berwald_max: None,
        landsberg_max: None,
        berwald_conditions_max: None,
        landsberg_equations_max: None,
        s_independent: false,
        regularity: None,
        anomaly: false,
        error: None,
    };
    let validity = match validate(spec, grid) {
        Ok(v) => v,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let valid = validity.pass;
    out.validity = Some(validity);
    if !valid {
        return out;
    }
    let inputs = match grid_inputs(spec, grid) {
        Ok(i) => i,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let m = curvature_max(&inputs);
    out.berwald_max = Some(m.berwald_max);
    out.landsberg_max = Some(m.landsberg_max);
    out.berwald_conditions_max = Some(
        ResidualReport::new(&BERWALD_CONDITION_NAMES, inputs.iter().map(berwald_condition_row).collect(), tol).max(),
    );
    out.s_independent = max_phi_s(spec, grid).map(|v| v <= S_INDEPENDENCE_TOL).unwrap_or(false);
    if out.s_independent {
        out.landsberg_equations_max = Some(
            ResidualReport::new(&LANDSBERG_EQUATION_NAMES, inputs.iter().map(landsberg_equation_row).collect(), tol)
                .max(),
        );
    }
    out.verdict = if m.berwald_max <= tol {
        Verdict::Berwald
    } else if m.landsberg_max <= tol {
        Verdict::LandsbergNotBerwald
    } else {
        Verdict::NonLandsberg
    };
    if out.s_independent && out.verdict == Verdict::LandsbergNotBerwald {
        let mid = |a: crate::metric::Axis| (a.min + a.max) / 2.0;
        match theta_probe(spec, mid(grid.x0), mid(grid.r)) {
            Ok(p) => {
                let scale = 1.0f64.max(p.theta_ppp_plus.abs()).max(p.theta_ppp_minus.abs());
                out.anomaly = !(p.jump.abs() > JUMP_TOL * scale);
                out.regularity = Some(p);
            }
            Err(e) => {
                out.error = Some(e.to_string());
                out.anomaly = true;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Family, ParameterEnv};
    use crate::unicorn::{build_unicorn, UnicornParams};

    fn small() -> GridSpec {
        let mut g = GridSpec::default();
        g.x0.count = 3;
        g.r.count = 3;
        g
    }

    #[test]
    fn euclidean_is_berwald_everywhere() {
        let spec = MetricSpec::builtin(Family::Euclidean, 3).unwrap();
        let g = small();
        assert!(berwald_psi_residuals(&spec, &g, VANISH_TOL).unwrap().residuals.iter().all(|&v| v == 0.0));
        assert!(landsberg_pde_residuals(&spec, &g, VANISH_TOL).unwrap().max() == 0.0);
        let fit = berwald_poly_fit(&spec, &g).unwrap();
        assert!(fit.fit_residual <= 1e-10 && fit.cells.iter().all(|c| c.f.iter().all(|v| v.abs() < 1e-10)));
        let s = s_independent_berwald_check(&spec, &g, VANISH_TOL).unwrap();
        assert!(s.residuals.max() == 0.0 && s.cells.iter().all(|c| c.g1 == 0.0 && c.g2 == 0.0));
        assert_eq!(classify(&spec, &g, VANISH_TOL).verdict, Verdict::Berwald);
    }

    #[test]
    fn unicorn_verdicts() {
        let g = small();
        let moving = build_unicorn(&UnicornParams::derived("exp(x0)").unwrap(), &g).unwrap();
        let c = classify(&moving, &g, VANISH_TOL);
        assert_eq!(c.verdict, Verdict::LandsbergNotBerwald, "{c:?}");
        assert!(!c.anomaly);
        assert!(berwald_psi_residuals(&moving, &g, VANISH_TOL).unwrap().max() > 1e-3);
        assert!(landsberg_pde_residuals(&moving, &g, VANISH_TOL).unwrap().max() <= 1e-8);
        assert!(s_independent_berwald_check(&moving, &g, VANISH_TOL).unwrap().residuals.max() > 1e-3);

        let fixed = build_unicorn(&UnicornParams::derived("1").unwrap(), &g).unwrap();
        assert_eq!(classify(&fixed, &g, VANISH_TOL).verdict, Verdict::Berwald);
        assert!(berwald_psi_residuals(&fixed, &g, VANISH_TOL).unwrap().max() <= 1e-8);
        let fit = berwald_poly_fit(&fixed, &g).unwrap();
        assert!(fit.fit_residual <= 1e-8, "{}", fit.fit_residual);
        assert!(fit.g1_delta.unwrap() <= 1e-8);
        let s = s_independent_berwald_check(&fixed, &g, VANISH_TOL).unwrap();
        assert!(s.residuals.max() <= 1e-8);
        assert!(s.cells.iter().all(|c| c.g2.abs() <= 1e-12));
    }

    #[test]
    fn generic_metric_is_not_landsberg() {
        let g = small();
        let spec = MetricSpec::parse("generic", 3, "sqrt(z^2+1)+0.1*r*z", ParameterEnv::new()).unwrap();
        assert!(landsberg_pde_residuals(&spec, &g, VANISH_TOL).unwrap().max() > 1e-4);
        assert!(grid_curvature_max(&spec, &g).unwrap().landsberg_max > 1e-4);
        assert!(berwald_poly_fit(&spec, &g).unwrap().fit_residual > 1e-4);
        assert_eq!(classify(&spec, &g, VANISH_TOL).verdict, Verdict::NonLandsberg);
    }

    #[test]
    fn s_dependent_metric_rejected() {
        let spec = MetricSpec::parse("sdep", 3, "sqrt(z^2+1+s^2)", ParameterEnv::new()).unwrap();
        assert!(matches!(landsberg_pde_residuals(&spec, &small(), VANISH_TOL), Err(FinslerError::NotSIndependent(_))));
    }

    #[test]
    fn invalid_metric_short_circuits() {
        let spec = MetricSpec::parse("bad", 3, "sqrt(z^2+1)+1.5*z", ParameterEnv::new()).unwrap();
        let mut g = small();
        g.z = crate::metric::Axis::new(-2.0, 2.0, 5);
        assert_eq!(classify(&spec, &g, VANISH_TOL).verdict, Verdict::InvalidMetric);
    }
}
