//! The `finsler` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the computation hits a
//! numerical error, 2 for usage, config and parse errors.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::characterize::{
    berwald_psi_residuals, classify, grid_curvature_max, landsberg_pde_residuals, max_phi_s, Verdict,
};
use crate::config::{Config, ConfigError};
use crate::dsl::parse;
use crate::metric::{validate, GridSpec, SamplePoint};
use crate::psi::THETA_CORPUS;
use crate::report::{to_value, Format, Report};
use crate::spray::{spray, spray_oracle, spray_quantities};
use crate::suite::{self, Check};
use crate::unicorn::{
    build_unicorn, check_conditions, regularity_probe, variant_consistency, Shape, UnicornParams, Variant,
};
use crate::FinslerError;

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Curvature checks for weakly orthogonally invariant Finsler metrics")]
pub struct Cli {
    /// Worker threads for grid evaluation
    #[arg(long, global = true, env = "FINSLER_THREADS")]
    pub threads: Option<usize>,
    /// Output format: text, json or csv
    #[arg(long, global = true, default_value = "text")]
    pub format: Format,
    /// Vanishing tolerance (overrides the config value)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Include wall time in the report
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive definiteness on the grid: phi/Omega/Lambda criterion against Hessian eigenvalues
    Validate { config: PathBuf },
    /// Spray coefficients at one point, closed form against the coordinate oracle
    Spray {
        config: PathBuf,
        /// Reduced point x0,r,s,z
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        point: Vec<f64>,
        /// |y-bar|
        #[arg(long, default_value_t = 1.0)]
        u: f64,
    },
    /// Berwald curvature on the grid plus an oracle sweep
    Berwald {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        oracle_points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Landsberg curvature on the grid plus an oracle sweep
    Landsberg {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        oracle_points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// BERWALD, LANDSBERG_NOT_BERWALD, NON_LANDSBERG or INVALID_METRIC
    Classify {
        config: PathBuf,
        /// Fail unless the verdict equals this
        #[arg(long)]
        expect: Option<String>,
    },
    /// Psi identities for the given theta expressions (default: built-in corpus)
    PsiTest {
        #[arg(long)]
        theta: Vec<String>,
    },
    /// The non-Berwaldian Landsberg family: conditions, curvature, regularity
    Unicorn {
        #[arg(long, allow_hyphen_values = true)]
        g1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        g2: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        g3: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        k: String,
        /// canonical or intro
        #[arg(long, default_value = "canonical")]
        variant: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Probe location (default: grid midpoint)
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Identity suite, oracle agreements, the derived instance, concordance and anomaly scan
    Selftest {
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Config(ConfigError),
    Math(FinslerError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        CliError::Config(e)
    }
}

impl From<FinslerError> for CliError {
    fn from(e: FinslerError) -> CliError {
        CliError::Math(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Math(e) => match e {
                FinslerError::Dsl(_)
                | FinslerError::InvalidDimension(_)
                | FinslerError::NegativeDelta(_)
                | FinslerError::ZeroG2
                | FinslerError::DegenerateAlphaBeta => 2,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            i32::from(!report.pass)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let threads = cli.threads.unwrap_or(0);
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    let start = Instant::now();
    let mut report = pool.install(|| dispatch(cli))?;
    if cli.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

fn load(cli: &Cli, path: &PathBuf) -> Result<Config, CliError> {
    let mut c = Config::load(path)?;
    if let Some(t) = cli.tol {
        c.tolerances.vanish_tol = t;
    }
    Ok(c)
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Validate { config } => cmd_validate(&load(cli, config)?),
        Command::Spray { config, point, u } => cmd_spray(&load(cli, config)?, point, *u),
        Command::Berwald { config, oracle_points, seed } => {
            cmd_curvature(&load(cli, config)?, *oracle_points, *seed, true)
        }
        Command::Landsberg { config, oracle_points, seed } => {
            cmd_curvature(&load(cli, config)?, *oracle_points, *seed, false)
        }
        Command::Classify { config, expect } => cmd_classify(&load(cli, config)?, expect.as_deref()),
        Command::PsiTest { theta } => cmd_psi(theta),
        Command::Unicorn { g1, g2, g3, alpha, beta, k, variant, n, x0, r } => {
            let variant = Variant::from_name(variant)
                .ok_or_else(|| CliError::Usage(format!("unknown variant '{variant}' (canonical or intro)")))?;
            let shape = match (g1, g2, g3, alpha, beta) {
                (Some(a), Some(b), Some(c), None, None) => Shape::G {
                    g1: parse(a).map_err(FinslerError::from)?,
                    g2: parse(b).map_err(FinslerError::from)?,
                    g3: parse(c).map_err(FinslerError::from)?,
                },
                (None, None, None, Some(a), Some(b)) => Shape::AlphaBeta {
                    alpha: parse(a).map_err(FinslerError::from)?,
                    beta: parse(b).map_err(FinslerError::from)?,
                },
                (None, None, None, None, None) => UnicornParams::derived("1")?.shape,
                _ => return Err(CliError::Usage("give either all of --g1 --g2 --g3 or both --alpha --beta".into())),
            };
            let params = UnicornParams { k: parse(k).map_err(FinslerError::from)?, shape, variant, n: *n };
            cmd_unicorn(&params, cli.tol.unwrap_or(crate::characterize::VANISH_TOL), *x0, *r)
        }
        Command::Selftest { points, seed } => Ok(cmd_selftest(*points, *seed)),
    }
}

fn cmd_validate(c: &Config) -> Result<Report, CliError> {
    let v = validate(&c.metric, &c.grid)?;
    let mut rep = Report::new("validate", c.echo.clone());
    rep.check(Check::at_most("criterion failures", v.criterion_failures as f64, 0.0));
    rep.check(Check::at_most("criterion vs Hessian disagreements", v.disagreements as f64, 0.0));
    rep.check(Check::at_most("evaluation errors", v.errors as f64, 0.0));
    rep.verdict = Some(if v.pass { "VALID" } else { "INVALID" }.into());
    Ok(rep.details(v))
}

fn cmd_spray(c: &Config, point: &[f64], u: f64) -> Result<Report, CliError> {
    let [x0, r, s, z] = <[f64; 4]>::try_from(point).map_err(|_| CliError::Usage("--point needs x0,r,s,z".into()))?;
    if !(r > 0.0 && s.abs() < r && u > 0.0) {
        return Err(CliError::Usage("--point needs r > 0, |s| < r and --u > 0".into()));
    }
    let p = SamplePoint::canonical(c.metric.n, x0, r, s, z, u);
    let closed = spray(&c.metric, &p)?;
    let oracle = spray_oracle(&c.metric, &p)?;
    let q = spray_quantities(&c.metric.phi_table(&p)?)?;
    let delta = closed.g.iter().zip(&oracle.g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let mut rep = Report::new("spray", c.echo.clone());
    rep.check(Check::at_most(
        "closed vs oracle (max abs delta)",
        delta,
        c.tolerances.oracle_tol * oracle.max_abs().max(1e-4),
    ));
    Ok(rep.details(json!({
        "point": {"x0": x0, "r": r, "s": s, "z": z, "u": u},
        "closed": closed.g,
        "oracle": oracle.g,
        "quantities": to_value(q),
    })))
}

fn cmd_curvature(c: &Config, oracle_points: usize, seed: u64, berwald: bool) -> Result<Report, CliError> {
    let spec = &c.metric;
    let tol = c.tolerances.vanish_tol;
    let m = grid_curvature_max(spec, &c.grid)?;
    let pts = suite::random_points_in(&c.grid, oracle_points, spec.n, seed);
    let specs = std::slice::from_ref(spec);
    let (name, sweep, max) = if berwald {
        ("berwald", suite::berwald_agreement(specs, &pts, c.tolerances.oracle_tol), m.berwald_max)
    } else {
        ("landsberg", suite::landsberg_agreement(specs, &pts, c.tolerances.oracle_tol), m.landsberg_max)
    };
    let mut rep = Report::new(name, c.echo.clone());
    rep.suite(&sweep);
    let residuals = if berwald {
        Some(berwald_psi_residuals(spec, &c.grid, tol)?)
    } else if max_phi_s(spec, &c.grid)? <= 1e-12 {
        Some(landsberg_pde_residuals(spec, &c.grid, tol)?)
    } else {
        None
    };
    if let Some(res) = &residuals {
        rep.check(Check::holds("component conditions agree with the tensor", res.vanishes == (max <= tol)));
    }
    rep.verdict = Some(if max <= tol { "VANISHES" } else { "NONZERO" }.into());
    Ok(rep.details(json!({
        "grid_max": max,
        "grid_points": m.points,
        "tol": tol,
        "oracle_points": oracle_points,
        "component_residuals": residuals.map(to_value),
    })))
}

fn cmd_classify(c: &Config, expect: Option<&str>) -> Result<Report, CliError> {
    let verdicts = [Verdict::InvalidMetric, Verdict::Berwald, Verdict::LandsbergNotBerwald, Verdict::NonLandsberg];
    let expected = match expect {
        Some(e) => Some(
            verdicts
                .into_iter()
                .find(|v| v.as_str().eq_ignore_ascii_case(e))
                .ok_or_else(|| CliError::Usage(format!("unknown verdict '{e}'")))?,
        ),
        None => None,
    };
    let cl = classify(&c.metric, &c.grid, c.tolerances.vanish_tol);
    let mut rep = Report::new("classify", c.echo.clone());
    rep.check(Check::holds("evaluation completed", cl.error.is_none()));
    rep.check(Check::holds("no regular Landsberg-not-Berwald anomaly", !cl.anomaly));
    if let Some(e) = expected {
        rep.check(Check::holds(format!("verdict is {}", e.as_str()), cl.verdict == e));
    }
    rep.verdict = Some(cl.verdict.as_str().into());
    Ok(rep.details(cl))
}

fn cmd_psi(theta: &[String]) -> Result<Report, CliError> {
    let corpus: Vec<&str> =
        if theta.is_empty() { THETA_CORPUS.to_vec() } else { theta.iter().map(String::as_str).collect() };
    for t in &corpus {
        parse(t).map_err(FinslerError::from)?;
    }
    let res = suite::psi_suite_for(&corpus, &GridSpec::default());
    let mut rep = Report::new("psi-test", json!({ "theta": corpus }));
    rep.checks = res.checks;
    rep.pass = res.pass;
    Ok(rep)
}

fn cmd_unicorn(params: &UnicornParams, tol: f64, x0: Option<f64>, r: Option<f64>) -> Result<Report, CliError> {
    let grid = GridSpec::default();
    let spec = build_unicorn(params, &grid)?;
    let (ae, be) = params.alpha_beta_exprs();
    let (g1, g2, g3) = params.g_exprs();
    let echo = json!({
        "variant": params.variant.name(),
        "n": params.n,
        "k": params.k.to_string(),
        "g1": g1.to_string(), "g2": g2.to_string(), "g3": g3.to_string(),
        "alpha": ae.to_string(), "beta": be.to_string(),
        "phi": spec.phi.to_string(),
        "grid": grid,
        "tol": tol,
    });
    let mid = |a: crate::metric::Axis| (a.min + a.max) / 2.0;
    let (px0, pr) = (x0.unwrap_or(mid(grid.x0)), r.unwrap_or(mid(grid.r)));
    let conditions = check_conditions(params, &grid, tol);
    let curvature = grid_curvature_max(&spec, &grid)?;
    let cl = classify(&spec, &grid, tol);
    let probe = regularity_probe(params, px0, pr);
    let variants = variant_consistency(params, &grid, tol);

    let mut rep = Report::new("unicorn", echo);
    rep.check(Check::at_most("Landsberg grid max", curvature.landsberg_max, tol));
    if let Ok(cond) = &conditions {
        rep.check(Check::holds(
            "Landsberg conditions agree with the tensor",
            cond.landsberg_conditions == (curvature.landsberg_max <= tol),
        ));
        rep.check(Check::holds(
            "Berwald conditions agree with the tensor",
            cond.berwald_conditions_tensor == (curvature.berwald_max <= tol),
        ));
    }
    if params.variant == Variant::Canonical {
        match &probe {
            Ok(p) => rep.check(Check::at_most("theta''' one-sided limits, relative error", p.rel_error, 1e-3)),
            Err(e) => rep.check(Check::holds(format!("regularity probe: {e}"), false)),
        }
    }
    rep.verdict = Some(cl.verdict.as_str().into());
    Ok(rep.details(json!({
        "berwald_max": curvature.berwald_max,
        "landsberg_max": curvature.landsberg_max,
        "conditions": match conditions { Ok(c) => to_value(c), Err(e) => json!({"error": e.to_string()}) },
        "classification": to_value(&cl),
        "regularity": match probe { Ok(p) => to_value(p), Err(e) => json!({"error": e.to_string()}) },
        "variants": to_value(variants),
    })))
}

/// Runs every corpus-wide check with fixed seeds.
pub fn selftest_report(points: usize, seed: u64) -> Report {
    cmd_selftest(points, seed)
}

fn cmd_selftest(points: usize, seed: u64) -> Report {
    let grid = GridSpec::default();
    let specs = suite::oracle_corpus(seed);
    let pts = suite::random_points(points, 3, seed.wrapping_add(1));
    let mut rep = Report::new(
        "selftest",
        json!({
            "points": points,
            "seed": seed,
            "metrics": specs.iter().map(|s| json!({"name": s.name, "phi": s.phi.to_string()})).collect::<Vec<_>>(),
        }),
    );
    rep.suite(&suite::psi_suite(&grid));
    rep.suite(&suite::spray_agreement(&specs, &pts, suite::ORACLE_TOL));
    rep.suite(&suite::berwald_agreement(&specs, &pts, suite::ORACLE_TOL));
    rep.suite(&suite::landsberg_agreement(&specs, &pts, suite::ORACLE_TOL));
    rep.suite(&suite::unicorn_reproduction(&grid));
    rep.suite(&suite::regularity(0.0, 0.6));
    let (conc, rows) = suite::concordance(&suite::concordance_corpus(), &grid);
    rep.suite(&conc);
    let anomalies = suite::anomaly_scan(&suite::anomaly_corpus(), &grid);
    rep.suite(&anomalies);
    rep.verdict = Some(
        if rep.pass {
            "HEALTHY"
        } else if anomalies.pass {
            "FAILED"
        } else {
            "ANOMALY"
        }
        .into(),
    );
    rep.details(json!({ "concordance": rows }))
}
