//! The non-Berwaldian Landsberg family, its coefficient conditions and the non-regularity probe.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::characterize::grid_curvature_max;
use crate::dsl::{self, parse, Expr, ParameterEnv};
use crate::error::{FinslerError, Result};
use crate::jets::fd::{fd_one_sided, Side};
use crate::jets::{Jet, JetSpace};
use crate::metric::{GridSpec, MetricSpec};

const CANONICAL: &str = "k*sqrt((z+alpha*beta)^2+alpha^2)*exp(beta*arctan((z+alpha*beta)/alpha))";
const INTRO: &str = "k*sqrt((g1*z^2+2*g2*z+2*g3)/g1)*exp(g2/sqrt(g1*g3-g2^2)*arctan((g1*z+g2)/sqrt(g1*g3-g2^2)))";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `k √(ζ²+α²) e^{β arctan(ζ/α)}`, `ζ = z + αβ`
    Canonical,
    /// `k √((g₁z² + 2g₂z + 2g₃)/g₁) e^{(g₂/√Δ) arctan((g₁z+g₂)/√Δ)}`
    Intro,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Canonical => "canonical-form",
            Variant::Intro => "intro-form",
        }
    }

    pub fn from_name(s: &str) -> Option<Variant> {
        match s {
            "canonical" | "canonical-form" => Some(Variant::Canonical),
            "intro" | "intro-form" => Some(Variant::Intro),
            _ => None,
        }
    }
}

/// How the shape of the family is given.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `g₁, g₂, g₃` in `(x⁰, r)`; `α = √Δ/g₁`, `β = g₂/√Δ`.
    G { g1: Expr, g2: Expr, g3: Expr },
    /// `α(x⁰, r)`, `β(x⁰)` directly; equivalent to `g₁ = 1`, `g₂ = αβ`, `g₃ = α²(1+β²)`.
    AlphaBeta { alpha: Expr, beta: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnicornParams {
    pub k: Expr,
    pub shape: Shape,
    pub variant: Variant,
    pub n: usize,
}

fn p(text: &str) -> Expr {
    parse(text).expect("built-in expression")
}

impl UnicornParams {
    /// `g₁ = e^{2r}`, `g₂ = e^r/√2`, `g₃ = 1` with the given `k`.
    pub fn derived(k: &str) -> Result<UnicornParams> {
        Ok(UnicornParams {
            k: parse(k)?,
            shape: Shape::G { g1: p("exp(2*r)"), g2: p("exp(r)/sqrt(2)"), g3: p("1") },
            variant: Variant::Canonical,
            n: 3,
        })
    }

    pub fn alpha_beta(alpha: &str, beta: &str, k: &str) -> Result<UnicornParams> {
        Ok(UnicornParams {
            k: parse(k)?,
            shape: Shape::AlphaBeta { alpha: parse(alpha)?, beta: parse(beta)? },
            variant: Variant::Canonical,
            n: 3,
        })
    }

    pub fn with_variant(mut self, variant: Variant) -> UnicornParams {
        self.variant = variant;
        self
    }

    /// `(g₁, g₂, g₃)` as expressions.
    pub fn g_exprs(&self) -> (Expr, Expr, Expr) {
        match &self.shape {
            Shape::G { g1, g2, g3 } => (g1.clone(), g2.clone(), g3.clone()),
            Shape::AlphaBeta { alpha, beta } => {
                let sub = |text: &str| {
                    p(text).substitute_exprs(&|name| match name {
                        "alpha" => Some(alpha.clone()),
                        "beta" => Some(beta.clone()),
                        _ => None,
                    })
                };
                (p("1"), sub("alpha*beta"), sub("alpha^2*(1+beta^2)"))
            }
        }
    }

    /// `(α, β)` as expressions.
    pub fn alpha_beta_exprs(&self) -> (Expr, Expr) {
        match &self.shape {
            Shape::AlphaBeta { alpha, beta } => (alpha.clone(), beta.clone()),
            Shape::G { .. } => {
                let lookup = self.g_lookup();
                (p("sqrt(g1*g3-g2^2)/g1").substitute_exprs(&lookup), p("g2/sqrt(g1*g3-g2^2)").substitute_exprs(&lookup))
            }
        }
    }

    fn g_lookup(&self) -> impl Fn(&str) -> Option<Expr> {
        let (g1, g2, g3) = self.g_exprs();
        move |name: &str| match name {
            "g1" => Some(g1.clone()),
            "g2" => Some(g2.clone()),
            "g3" => Some(g3.clone()),
            _ => None,
        }
    }

    fn phi_expr(&self, variant: Variant) -> Expr {
        match variant {
            Variant::Canonical => {
                let (alpha, beta) = self.alpha_beta_exprs();
                let k = self.k.clone();
                p(CANONICAL).substitute_exprs(&|name| match name {
                    "k" => Some(k.clone()),
                    "alpha" => Some(alpha.clone()),
                    "beta" => Some(beta.clone()),
                    _ => None,
                })
            }
            Variant::Intro => {
                let lookup = self.g_lookup();
                let k = self.k.clone();
                p(INTRO).substitute_exprs(&|name| if name == "k" { Some(k.clone()) } else { lookup(name) })
            }
        }
    }
}

fn eval_at(e: &Expr, x0: f64, r: f64) -> Result<f64> {
    Ok(dsl::eval_f64(e, [x0, r, 0.0, 0.0], &ParameterEnv::new())?)
}

fn x0_r_points(grid: &GridSpec) -> Vec<(f64, f64)> {
    let rs = grid.r.values();
    grid.x0.values().into_iter().flat_map(|x0| rs.iter().map(move |&r| (x0, r))).collect()
}

/// The metric of the chosen variant; `Δ > 0` and `g₂ ≠ 0` are checked on the `(x⁰, r)` grid.
pub fn build_unicorn(params: &UnicornParams, grid: &GridSpec) -> Result<MetricSpec> {
    let (g1, g2, g3) = params.g_exprs();
    let (alpha, _) = params.alpha_beta_exprs();
    for (x0, r) in x0_r_points(grid) {
        let (a, b, c) = (eval_at(&g1, x0, r)?, eval_at(&g2, x0, r)?, eval_at(&g3, x0, r)?);
        let delta = a * c - b * b;
        if !(delta > 0.0) {
            return Err(FinslerError::NegativeDelta(delta));
        }
        if matches!(params.shape, Shape::G { .. }) && b == 0.0 {
            return Err(FinslerError::ZeroG2);
        }
        if params.variant == Variant::Canonical && !(eval_at(&alpha, x0, r)? > 0.0) {
            return Err(FinslerError::DegenerateAlphaBeta);
        }
    }
    let name = format!("unicorn-{}", params.variant.name());
    MetricSpec::new(&name, params.n, params.phi_expr(params.variant), ParameterEnv::new())
}

pub const CONDITION_NAMES: [&str; 7] = [
    "(g2/sqrt(Delta))_r",
    "(g2^2/(g1 g3))_r",
    "(g2/sqrt(Delta))_x0",
    "(g3/g2)_x0 + 2 (k'/k)(g3/g2)",
    "(g3/g2)_x0 + (k'/k)(g3/g2)",
    "beta_r",
    "k_r",
];

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub names: Vec<String>,
    pub residuals: Vec<f64>,
    pub min_delta: f64,
    pub points: usize,
    /// Both `r`-conditions below `tol`.
    pub landsberg_conditions: bool,
    /// `(g₂/√Δ)_{x⁰}` and the `k′/k` condition (as displayed, factor 2) below `tol`.
    pub berwald_conditions_displayed: bool,
    /// Same with factor 1 in the `k′/k` term; this is the form the curvature tensors confirm.
    pub berwald_conditions_tensor: bool,
}

fn jet_of(e: &Expr, space: &std::sync::Arc<JetSpace>, x0: f64, r: f64) -> Result<Jet> {
    Ok(dsl::eval_jets(e, space, [x0, r, 0.0, 0.0], &ParameterEnv::new())?)
}

/// Residuals of the Landsberg conditions on `g`, the Berwald degeneracy conditions and
/// `β_r`, `k_r`, by first-order jets in `(x⁰, r)`.
pub fn check_conditions(params: &UnicornParams, grid: &GridSpec, tol: f64) -> Result<ConditionReport> {
    let space = JetSpace::new(&["x0", "r"], 1)?;
    let (g1, g2, g3) = params.g_exprs();
    let (_, beta) = params.alpha_beta_exprs();
    let pts = x0_r_points(grid);
    let rows: Vec<Result<([f64; 7], f64)>> = pts
        .par_iter()
        .map(|&(x0, r)| {
            let (a, b, c) = (jet_of(&g1, &space, x0, r)?, jet_of(&g2, &space, x0, r)?, jet_of(&g3, &space, x0, r)?);
            let k = jet_of(&params.k, &space, x0, r)?;
            let be = jet_of(&beta, &space, x0, r)?;
            let delta = &a * &c - &b * &b;
            if !(delta.value() > 0.0) {
                return Err(FinslerError::NegativeDelta(delta.value()));
            }
            if b.value() == 0.0 {
                return Err(FinslerError::ZeroG2);
            }
            let ratio = &b / &delta.sqrt()?;
            let sq = &(&b * &b) / &(&a * &c);
            let q = &c / &b;
            let d = |j: &Jet, v: usize| j.partial(&[u8::from(v == 0), u8::from(v == 1)]).unwrap();
            let kp = d(&k, 0) / k.value();
            Ok((
                [
                    d(&ratio, 1).abs(),
                    d(&sq, 1).abs(),
                    d(&ratio, 0).abs(),
                    (d(&q, 0) + 2.0 * kp * q.value()).abs(),
                    (d(&q, 0) + kp * q.value()).abs(),
                    d(&be, 1).abs(),
                    d(&k, 1).abs(),
                ],
                delta.value(),
            ))
        })
        .collect();
    let mut residuals = [0.0f64; 7];
    let mut min_delta = f64::INFINITY;
    for row in rows {
        let (res, delta) = row?;
        for (m, v) in residuals.iter_mut().zip(res) {
            *m = m.max(v);
        }
        min_delta = min_delta.min(delta);
    }
    Ok(ConditionReport {
        names: CONDITION_NAMES.iter().map(|s| s.to_string()).collect(),
        residuals: residuals.to_vec(),
        min_delta,
        points: pts.len(),
        landsberg_conditions: residuals[0] <= tol && residuals[1] <= tol,
        berwald_conditions_displayed: residuals[2] <= tol && residuals[3] <= tol,
        berwald_conditions_tensor: residuals[2] <= tol && residuals[4] <= tol,
    })
}

/// One-sided third derivatives of `θ(t) = |t| φ(x⁰, r, 1/|t|)` at `t = 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaProbe {
    pub theta_ppp_plus: f64,
    pub theta_ppp_minus: f64,
    pub jump: f64,
    /// `θ(t)` at `t = 1e-9`.
    pub theta_near_zero: f64,
}

/// Step for the one-sided stencils.
pub const PROBE_STEP: f64 = 1e-3;

/// Probes an `s`-independent metric (evaluated at `s = 0`) at `(x⁰, r)`.
pub fn theta_probe(spec: &MetricSpec, x0: f64, r: f64) -> Result<ThetaProbe> {
    let theta = |t: f64| {
        let a = t.abs();
        spec.phi_value([x0, r, 0.0, 1.0 / a]).map(|v| a * v).unwrap_or(f64::NAN)
    };
    let plus = fd_one_sided(theta, 0.0, 3, Side::Plus, PROBE_STEP)?;
    let minus = fd_one_sided(theta, 0.0, 3, Side::Minus, PROBE_STEP)?;
    Ok(ThetaProbe { theta_ppp_plus: plus, theta_ppp_minus: minus, jump: plus - minus, theta_near_zero: theta(1e-9) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegularityProbeResult {
    pub x0: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    pub theta_ppp_plus: f64,
    pub theta_ppp_minus: f64,
    pub predicted_plus: f64,
    pub predicted_minus: f64,
    pub jump: f64,
    pub predicted_jump: f64,
    pub theta0: f64,
    pub predicted_theta0: f64,
    /// Largest relative gap between the one-sided values and their predictions.
    pub rel_error: f64,
}

/// Regularity probe of the canonical form at `(x⁰, r)`.
pub fn regularity_probe(params: &UnicornParams, x0: f64, r: f64) -> Result<RegularityProbeResult> {
    let (ae, be) = params.alpha_beta_exprs();
    let (alpha, beta, k) = (eval_at(&ae, x0, r)?, eval_at(&be, x0, r)?, eval_at(&params.k, x0, r)?);
    if alpha == 0.0 {
        return Err(FinslerError::DegenerateAlphaBeta);
    }
    let spec = MetricSpec::new("unicorn-probe", params.n, params.phi_expr(Variant::Canonical), ParameterEnv::new())?;
    let probe = theta_probe(&spec, x0, r)?;
    let base = alpha * alpha * (1.0 + beta * beta) * k * (beta * FRAC_PI_2).exp();
    let predicted_plus = base * (-4.0 * alpha * beta);
    let predicted_minus = base * (4.0 * alpha * beta);
    let rel = |v: f64, w: f64| (v - w).abs() / w.abs().max(1e-12);
    let rel_error = if alpha * beta == 0.0 {
        probe.theta_ppp_plus.abs().max(probe.theta_ppp_minus.abs())
    } else {
        rel(probe.theta_ppp_plus, predicted_plus).max(rel(probe.theta_ppp_minus, predicted_minus))
    };
    Ok(RegularityProbeResult {
        x0,
        r,
        alpha,
        beta,
        k,
        theta_ppp_plus: probe.theta_ppp_plus,
        theta_ppp_minus: probe.theta_ppp_minus,
        predicted_plus,
        predicted_minus,
        jump: probe.jump,
        predicted_jump: predicted_plus - predicted_minus,
        theta0: probe.theta_near_zero,
        predicted_theta0: k * (beta * FRAC_PI_2).exp(),
        rel_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub variant: String,
    pub berwald_max: Option<f64>,
    pub landsberg_max: Option<f64>,
    pub landsberg_vanishes: bool,
    pub error: Option<String>,
}

/// Landsberg and Berwald grid maxima for both displayed forms of the family.
pub fn variant_consistency(params: &UnicornParams, grid: &GridSpec, tol: f64) -> Vec<VariantReport> {
    [Variant::Canonical, Variant::Intro]
        .into_iter()
        .map(|v| {
            let res =
                build_unicorn(&params.clone().with_variant(v), grid).and_then(|spec| grid_curvature_max(&spec, grid));
            match res {
                Ok(m) => VariantReport {
                    variant: v.name().into(),
                    berwald_max: Some(m.berwald_max),
                    landsberg_max: Some(m.landsberg_max),
                    landsberg_vanishes: m.landsberg_max <= tol,
                    error: None,
                },
                Err(e) => VariantReport {
                    variant: v.name().into(),
                    berwald_max: None,
                    landsberg_max: None,
                    landsberg_vanishes: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn canonical_substitution() {
        let u = UnicornParams::alpha_beta("1", "1", "1").unwrap();
        let spec = build_unicorn(&u, &GridSpec::default()).unwrap();
        let direct = parse("sqrt((z+1)^2+1)*exp(arctan(z+1))").unwrap();
        for z in [0.1, 0.7, 1.9] {
            let pt = [0.0, 0.5, 0.0, z];
            assert_relative_eq!(
                spec.phi_value(pt).unwrap(),
                dsl::eval_f64(&direct, pt, &ParameterEnv::new()).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn negative_delta() {
        let u = UnicornParams {
            k: p("1"),
            shape: Shape::G { g1: p("1"), g2: p("1"), g3: p("0.5") },
            variant: Variant::Canonical,
            n: 3,
        };
        assert_eq!(build_unicorn(&u, &GridSpec::default()), Err(FinslerError::NegativeDelta(-0.5)));
    }

    #[test]
    fn derived_instance_conditions() {
        let u = UnicornParams::derived("exp(x0)").unwrap();
        let rep = check_conditions(&u, &GridSpec::default(), 1e-7).unwrap();
        assert!(rep.residuals[0] <= 1e-12 && rep.residuals[1] <= 1e-12);
        // 2√2 e^{-r} at the smallest r
        assert_relative_eq!(rep.residuals[3], 2.0 * 2f64.sqrt() * (-0.2f64).exp(), epsilon = 1e-12);
        assert!(rep.landsberg_conditions && !rep.berwald_conditions_displayed);
    }

    #[test]
    fn constant_coefficients_satisfy_everything() {
        let u = UnicornParams {
            k: p("2"),
            shape: Shape::G { g1: p("1"), g2: p("0.5"), g3: p("2") },
            variant: Variant::Canonical,
            n: 3,
        };
        let rep = check_conditions(&u, &GridSpec::default(), 1e-7).unwrap();
        assert!(rep.residuals.iter().all(|&v| v == 0.0), "{rep:?}");
    }

    #[test]
    fn r_dependent_g2_breaks_landsberg_condition() {
        let u = UnicornParams {
            k: p("1"),
            shape: Shape::G { g1: p("1"), g2: p("r"), g3: p("2") },
            variant: Variant::Canonical,
            n: 3,
        };
        assert!(check_conditions(&u, &GridSpec::default(), 1e-7).unwrap().residuals[0] > 0.0);
    }

    #[test]
    fn probe_matches_limit_formulas() {
        let u = UnicornParams::alpha_beta("1", "1", "1").unwrap();
        let res = regularity_probe(&u, 0.0, 0.5).unwrap();
        assert_relative_eq!(res.predicted_plus, -8.0 * FRAC_PI_2.exp(), epsilon = 1e-12);
        assert!(res.rel_error < 1e-3, "{res:?}");
        assert!((res.theta0 - res.predicted_theta0).abs() < 1e-8);
    }

    #[test]
    fn probe_without_beta_is_smooth() {
        let u = UnicornParams::alpha_beta("1", "0", "1").unwrap();
        let res = regularity_probe(&u, 0.0, 0.5).unwrap();
        assert_eq!(res.predicted_jump, 0.0);
        assert!(res.jump.abs() < 1e-3, "{res:?}");
    }
}
