//! Corpus-wide checks: identity suite, closed form vs. oracle sweeps, the unicorn reproduction,
//! the regularity probe, verdict concordance and the anomaly scan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::characterize::{
    berwald_poly_fit, berwald_psi_residuals, classify, grid_curvature_max, landsberg_pde_residuals, max_phi_s,
    s_independent_berwald_check, Verdict, VANISH_TOL,
};
use crate::curvature::{
    berwald_closed_from, berwald_oracle, contract_landsberg, f_and_fy, landsberg_closed_from, CurvatureInputs,
};
use crate::dsl::{parse, Family, ParameterEnv};
use crate::error::Result;
use crate::metric::{Axis, GridSpec, MetricSpec, SamplePoint};
use crate::psi::{default_sz_grid, verify_identities, verify_vector_identities, THETA_CORPUS};
use crate::spray::{agree, spray, spray_oracle};
use crate::unicorn::{build_unicorn, regularity_probe, UnicornParams};

/// Closed form vs. oracle tolerance (relative, with scale floored at `1e-4`).
pub const ORACLE_TOL: f64 = 1e-6;
/// Bound on identity residuals.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Bound on symmetry defects and `y`-contractions (after dividing by `max_abs + 1`).
pub const INVARIANT_TOL: f64 = 1e-9;

/// One named check with its measured value and bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"<="` or `">="`
    pub relation: &'static str,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), value, tolerance, relation: "<=", pass: value <= tolerance }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), value, tolerance, relation: ">=", pass: value >= tolerance }
    }

    /// A boolean outcome as a check on `0`/`1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

/// A group of checks for one property.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteResult {
    fn new(name: &str, checks: Vec<Check>) -> SuiteResult {
        let pass = checks.iter().all(|c| c.pass);
        SuiteResult { name: name.into(), checks, pass }
    }
}

fn fail_on_error(name: &str, e: impl std::fmt::Display) -> SuiteResult {
    SuiteResult::new(name, vec![Check::holds(format!("error: {e}"), false)])
}

/// Nine scalar and five vector Ψ-identities for every corpus expression.
pub fn psi_suite(grid: &GridSpec) -> SuiteResult {
    psi_suite_for(&THETA_CORPUS, grid)
}

/// Scalar identities on the default `(s, z)` grid and vector identities at every grid point.
pub fn psi_suite_for(corpus: &[&str], grid: &GridSpec) -> SuiteResult {
    let sz = default_sz_grid();
    let pts = grid.points();
    let rows: Vec<Result<(f64, f64)>> = corpus
        .par_iter()
        .map(|text| {
            let theta = parse(text)?;
            let env = ParameterEnv::new();
            let scalar = verify_identities(&theta, &env, &sz)?.max();
            let mut vector = 0.0f64;
            for &[x0, r, s, z] in &pts {
                let p = SamplePoint::canonical(3, x0, r, s, z, 1.0);
                vector = vector.max(verify_vector_identities(&theta, &env, &p)?.max());
            }
            Ok((scalar, vector))
        })
        .collect();
    let mut checks = Vec::new();
    for (text, row) in corpus.iter().zip(rows) {
        match row {
            Ok((s, v)) => {
                checks.push(Check::at_most(format!("scalar identities, {text}"), s, IDENTITY_TOL));
                checks.push(Check::at_most(format!("vector identities, {text}"), v, IDENTITY_TOL));
            }
            Err(e) => checks.push(Check::holds(format!("{text}: {e}"), false)),
        }
    }
    SuiteResult::new("psi identities", checks)
}

const DSL_TEMPLATES: [&str; 5] = [
    "sqrt(z^2+1+{a}*s^2+{b}*r^2)+{c}*z*exp({d}*x0)",
    "sqrt(z^2+1+{a}*s^2)*exp({b}*x0*s)+{c}*s*z",
    "(z^4+{a}*z^2+1+{b}*r^2*s^2)^0.25*exp({c}*x0)",
    "sqrt(z^2+1)+{a}*r*z+{b}*arctan({c}*s*z+{d})",
    "sqrt((1+{a}*x0^2)*z^2+1+{b}*r+{c}*s^2)+{d}*sin(x0)*z",
];

/// Five metrics from fixed templates with seeded random coefficients.
pub fn random_dsl_metrics(seed: u64, n: usize) -> Vec<MetricSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DSL_TEMPLATES
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut text = t.to_string();
            for (key, lo, hi) in [("{a}", 0.1, 0.5), ("{b}", -0.3, 0.3), ("{c}", -0.2, 0.2), ("{d}", -0.5, 0.5)] {
                let v: f64 = rng.gen_range(lo..hi);
                text = text.replace(key, &format!("({v:.6})"));
            }
            MetricSpec::parse(&format!("random-{i}"), n, &text, ParameterEnv::new()).expect("template parses")
        })
        .collect()
}

/// The derived unicorn instance (`g₁ = e^{2r}`, `g₂ = e^r/√2`, `g₃ = 1`) with the given `k`.
pub fn derived_unicorn(k: &str) -> MetricSpec {
    let mut spec = build_unicorn(&UnicornParams::derived(k).expect("k parses"), &GridSpec::default())
        .expect("derived instance is well posed on the default grid");
    spec.name = format!("unicorn-derived(k={k})");
    spec
}

/// Euclidean, Randers, built-in unicorn, the derived unicorn with `k = e^{x⁰}` and five random
/// DSL metrics.
pub fn oracle_corpus(seed: u64) -> Vec<MetricSpec> {
    let mut v = vec![
        MetricSpec::builtin(Family::Euclidean, 3).unwrap(),
        MetricSpec::builtin(Family::Randers { c: 0.5 }, 3).unwrap(),
        MetricSpec::builtin(Family::Unicorn { k: 1.0, alpha: 1.0, beta: 1.0 }, 3).unwrap(),
        derived_unicorn("exp(x0)"),
    ];
    v.extend(random_dsl_metrics(seed, 3));
    v
}

/// Random points in general position over the default grid box.
pub fn random_points(count: usize, n: usize, seed: u64) -> Vec<SamplePoint> {
    random_points_in(&GridSpec::default(), count, n, seed)
}

fn sample(rng: &mut ChaCha8Rng, a: Axis) -> f64 {
    if a.max > a.min {
        rng.gen_range(a.min..a.max)
    } else {
        a.min
    }
}

/// Reduced coordinates uniform in the box of `grid`, `|ȳ| ∈ [0.5, 2]`, random orientation of
/// the `(x̄, ȳ)` plane.
pub fn random_points_in(grid: &GridSpec, count: usize, n: usize, seed: u64) -> Vec<SamplePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x0 = sample(&mut rng, grid.x0);
            let r = sample(&mut rng, grid.r);
            let frac = sample(&mut rng, grid.s_frac);
            let z = sample(&mut rng, grid.z);
            let u = rng.gen_range(0.5..2.0);
            let mut e1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            normalize(&mut e1);
            let mut e2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let d: f64 = e1.iter().zip(&e2).map(|(a, b)| a * b).sum();
            e2.iter_mut().zip(&e1).for_each(|(b, a)| *b -= d * a);
            normalize(&mut e2);
            let c = (1.0 - frac * frac).sqrt();
            let xbar = e1.iter().map(|v| r * v).collect();
            let ybar = e1.iter().zip(&e2).map(|(a, b)| u * (frac * a + c * b)).collect();
            SamplePoint::new(x0, xbar, u * z, ybar).expect("valid random point")
        })
        .collect()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
struct Sweep {
    worst_ratio: f64,
    worst_delta: f64,
    symmetry: f64,
    contraction: f64,
    failures: usize,
    errors: usize,
}

impl Sweep {
    fn merge(mut self, o: Sweep) -> Sweep {
        self.worst_ratio = self.worst_ratio.max(o.worst_ratio);
        self.worst_delta = self.worst_delta.max(o.worst_delta);
        self.symmetry = self.symmetry.max(o.symmetry);
        self.contraction = self.contraction.max(o.contraction);
        self.failures += o.failures;
        self.errors += o.errors;
        self
    }

    fn from_delta(delta: f64, scale: f64, tol: f64) -> Sweep {
        Sweep {
            worst_ratio: delta / (tol * scale.max(1e-4)),
            worst_delta: delta,
            failures: usize::from(!agree(delta, scale, tol)),
            ..Sweep::default()
        }
    }
}

fn sweep_checks(name: &str, s: Sweep, invariants: bool) -> Vec<Check> {
    let mut v = vec![
        Check::at_most(format!("{name}: closed vs oracle disagreements"), s.failures as f64, 0.0),
        Check::at_most(format!("{name}: worst delta / allowed"), s.worst_ratio, 1.0),
        Check::at_most(format!("{name}: evaluation errors"), s.errors as f64, 0.0),
    ];
    if invariants {
        v.push(Check::at_most(format!("{name}: symmetry defect"), s.symmetry, INVARIANT_TOL));
        v.push(Check::at_most(format!("{name}: y-contraction"), s.contraction, INVARIANT_TOL));
    }
    v
}

fn per_metric<F>(specs: &[MetricSpec], pts: &[SamplePoint], f: F) -> Vec<(String, Sweep)>
where
    F: Fn(&MetricSpec, &SamplePoint) -> Result<Sweep> + Sync,
{
    specs
        .iter()
        .map(|spec| {
            let rows: Vec<Sweep> =
                pts.par_iter().map(|p| f(spec, p).unwrap_or(Sweep { errors: 1, ..Sweep::default() })).collect();
            (spec.name.clone(), rows.into_iter().fold(Sweep::default(), Sweep::merge))
        })
        .collect()
}

/// Spray closed form vs. raw-coordinate oracle.
pub fn spray_agreement(specs: &[MetricSpec], pts: &[SamplePoint], tol: f64) -> SuiteResult {
    let rows = per_metric(specs, pts, |spec, p| {
        let (a, b) = (spray(spec, p)?, spray_oracle(spec, p)?);
        let delta = a.g.iter().zip(&b.g).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        Ok(Sweep::from_delta(delta, b.max_abs(), tol))
    });
    SuiteResult::new("spray oracle", rows.into_iter().flat_map(|(n, s)| sweep_checks(&n, s, false)).collect())
}

/// Berwald closed form vs. third-derivative oracle, with symmetry and contraction invariants.
pub fn berwald_agreement(specs: &[MetricSpec], pts: &[SamplePoint], tol: f64) -> SuiteResult {
    let rows = per_metric(specs, pts, |spec, p| {
        let closed = berwald_closed_from(&CurvatureInputs::new(spec, p)?);
        let oracle = berwald_oracle(spec, p)?;
        let norm = oracle.max_abs() + 1.0;
        let y = p.y();
        let mut s = Sweep::from_delta(closed.max_diff(&oracle), oracle.max_abs(), tol);
        s.symmetry = closed.symmetry_defect().max(oracle.symmetry_defect()) / norm;
        s.contraction = closed.y_contraction(&y).max(oracle.y_contraction(&y)) / norm;
        Ok(s)
    });
    SuiteResult::new("berwald oracle", rows.into_iter().flat_map(|(n, s)| sweep_checks(&n, s, true)).collect())
}

/// Landsberg closed form vs. `½ F F_y B` contraction of the Berwald oracle.
pub fn landsberg_agreement(specs: &[MetricSpec], pts: &[SamplePoint], tol: f64) -> SuiteResult {
    let rows = per_metric(specs, pts, |spec, p| {
        let closed = landsberg_closed_from(&CurvatureInputs::new(spec, p)?);
        let (f, fy) = f_and_fy(spec, p)?;
        let oracle = contract_landsberg(&berwald_oracle(spec, p)?, f, &fy);
        let norm = oracle.max_abs() + 1.0;
        let y = p.y();
        let mut s = Sweep::from_delta(closed.max_diff(&oracle), oracle.max_abs(), tol);
        s.symmetry = closed.symmetry_defect().max(oracle.symmetry_defect()) / norm;
        s.contraction = closed.y_contraction(&y).max(oracle.y_contraction(&y)) / norm;
        Ok(s)
    });
    SuiteResult::new("landsberg oracle", rows.into_iter().flat_map(|(n, s)| sweep_checks(&n, s, true)).collect())
}

/// The derived instance: Landsberg but not Berwald for `k = e^{x⁰}`, Berwald for `k = 1`.
pub fn unicorn_reproduction(grid: &GridSpec) -> SuiteResult {
    let moving = derived_unicorn("exp(x0)");
    let fixed = derived_unicorn("1");
    let (m, f) = match (grid_curvature_max(&moving, grid), grid_curvature_max(&fixed, grid)) {
        (Ok(m), Ok(f)) => (m, f),
        (Err(e), _) | (_, Err(e)) => return fail_on_error("unicorn reproduction", e),
    };
    let cm = classify(&moving, grid, VANISH_TOL);
    let cf = classify(&fixed, grid, VANISH_TOL);
    SuiteResult::new(
        "unicorn reproduction",
        vec![
            Check::at_most("k = exp(x0): Landsberg grid max", m.landsberg_max, VANISH_TOL),
            Check::at_least("k = exp(x0): Berwald grid max", m.berwald_max, 1e-3),
            Check::holds(
                format!("k = exp(x0): classify = {}", cm.verdict.as_str()),
                cm.verdict == Verdict::LandsbergNotBerwald,
            ),
            Check::at_most("k = 1: Berwald grid max", f.berwald_max, VANISH_TOL),
            Check::holds(format!("k = 1: classify = {}", cf.verdict.as_str()), cf.verdict == Verdict::Berwald),
        ],
    )
}

/// One-sided third derivatives of `θ` at `0±` for `α = β = k = 1` against the limit formulas.
pub fn regularity(x0: f64, r: f64) -> SuiteResult {
    let params = UnicornParams::alpha_beta("1", "1", "1").expect("literals parse");
    match regularity_probe(&params, x0, r) {
        Ok(p) => SuiteResult::new(
            "regularity probe",
            vec![
                Check::at_most(
                    "theta'''(0+) relative error",
                    (p.theta_ppp_plus - p.predicted_plus).abs() / p.predicted_plus.abs(),
                    1e-3,
                ),
                Check::at_most(
                    "theta'''(0-) relative error",
                    (p.theta_ppp_minus - p.predicted_minus).abs() / p.predicted_minus.abs(),
                    1e-3,
                ),
                Check::at_most("theta(0) limit error", (p.theta0 - p.predicted_theta0).abs(), 1e-8),
            ],
        ),
        Err(e) => fail_on_error("regularity probe", e),
    }
}

/// Per-metric verdicts from every characterization path.
#[derive(Debug, Clone, Serialize)]
pub struct Concordance {
    pub metric: String,
    pub berwald_tensor: bool,
    pub berwald_conditions: bool,
    pub poly_fit: bool,
    pub s_independent_berwald: Option<bool>,
    pub landsberg_tensor: bool,
    pub landsberg_equations: Option<bool>,
}

impl Concordance {
    pub fn agrees(&self) -> bool {
        let b = self.berwald_tensor;
        b == self.berwald_conditions
            && b == self.poly_fit
            && self.s_independent_berwald.is_none_or(|v| v == b)
            && self.landsberg_equations.is_none_or(|v| v == self.landsberg_tensor)
    }
}

pub fn concordance_for(spec: &MetricSpec, grid: &GridSpec, tol: f64) -> Result<Concordance> {
    let tensors = grid_curvature_max(spec, grid)?;
    let conditions = berwald_psi_residuals(spec, grid, tol)?;
    let fit = berwald_poly_fit(spec, grid)?;
    let s_indep = max_phi_s(spec, grid)? <= 1e-12;
    let (thm, cor) = if s_indep {
        (
            Some(s_independent_berwald_check(spec, grid, tol)?.residuals.max() <= tol),
            Some(landsberg_pde_residuals(spec, grid, tol)?.max() <= tol),
        )
    } else {
        (None, None)
    };
    Ok(Concordance {
        metric: spec.name.clone(),
        berwald_tensor: tensors.berwald_max <= tol,
        berwald_conditions: conditions.max() <= tol,
        poly_fit: fit.fit_residual <= 10.0 * tol && fit.pde_residuals.iter().all(|&v| v <= 10.0 * tol),
        s_independent_berwald: thm,
        landsberg_tensor: tensors.landsberg_max <= tol,
        landsberg_equations: cor,
    })
}

/// Built-in families plus both derived unicorn instances.
pub fn concordance_corpus() -> Vec<MetricSpec> {
    vec![
        MetricSpec::builtin(Family::Euclidean, 3).unwrap(),
        MetricSpec::builtin(Family::Randers { c: 0.5 }, 3).unwrap(),
        MetricSpec::builtin(Family::Unicorn { k: 1.0, alpha: 1.0, beta: 1.0 }, 3).unwrap(),
        derived_unicorn("exp(x0)"),
        derived_unicorn("1"),
    ]
}

pub fn concordance(specs: &[MetricSpec], grid: &GridSpec) -> (SuiteResult, Vec<Concordance>) {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for spec in specs {
        match concordance_for(spec, grid, VANISH_TOL) {
            Ok(c) => {
                checks.push(Check::holds(format!("{}: verdicts agree", spec.name), c.agrees()));
                rows.push(c);
            }
            Err(e) => checks.push(Check::holds(format!("{}: {e}", spec.name), false)),
        }
    }
    (SuiteResult::new("characterization concordance", checks), rows)
}

/// `s`-independent metrics for the anomaly scan.
pub fn anomaly_corpus() -> Vec<MetricSpec> {
    let mut v = concordance_corpus();
    for (name, text) in [
        ("generic", "sqrt(z^2+1)+0.1*r*z"),
        ("x0-riemann", "sqrt(exp(2*x0)*z^2+1)"),
        ("r-quartic", "(z^4+(1+r^2)*z^2+1)^0.25"),
    ] {
        v.push(MetricSpec::parse(name, 3, text, ParameterEnv::new()).unwrap());
    }
    v
}

/// Flags any valid, regular, `s`-independent metric classified as Landsberg but not Berwald.
pub fn anomaly_scan(specs: &[MetricSpec], grid: &GridSpec) -> SuiteResult {
    let checks = specs
        .iter()
        .map(|spec| {
            let c = classify(spec, grid, VANISH_TOL);
            Check::holds(format!("{}: {} (anomaly = {})", spec.name, c.verdict.as_str(), c.anomaly), !c.anomaly)
        })
        .collect();
    SuiteResult::new("landsberg iff berwald for regular metrics", checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_points_have_requested_reduction() {
        for p in random_points(20, 3, 7) {
            let [_, r, s, z] = p.reduced();
            assert!((0.2..1.0).contains(&r) && s.abs() < 0.9 * r + 1e-12 && (0.1..2.0).contains(&z));
        }
    }

    #[test]
    fn random_metrics_are_reproducible() {
        let a: Vec<String> = random_dsl_metrics(3, 3).iter().map(|m| m.phi.to_string()).collect();
        let b: Vec<String> = random_dsl_metrics(3, 3).iter().map(|m| m.phi.to_string()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn small_oracle_sweeps_pass() {
        let specs = oracle_corpus(11);
        let pts = random_points(3, 3, 5);
        for r in [
            spray_agreement(&specs, &pts, ORACLE_TOL),
            berwald_agreement(&specs, &pts, ORACLE_TOL),
            landsberg_agreement(&specs, &pts, ORACLE_TOL),
        ] {
            assert!(r.pass, "{r:#?}");
        }
    }
}
