use std::process::Command;
use std::time::{Duration, Instant};

use finsler_core::metric::GridSpec;
use finsler_core::suite::{self, SuiteResult, ORACLE_TOL};

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn from_suite(id: usize, title: &'static str, r: &SuiteResult, elapsed: Duration, budget: Option<f64>) -> Line {
    let secs = elapsed.as_secs_f64();
    let in_time = budget.is_none_or(|b| secs <= b);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let detail = match budget {
        Some(b) => format!("{} checks, {} failed, {secs:.2}s (budget {b}s)", r.checks.len(), failed.len()),
        None => format!("{} checks, {} failed, {secs:.2}s", r.checks.len(), failed.len()),
    };
    let detail = if failed.is_empty() { detail } else { format!("{detail}; first failure: {}", failed[0]) };
    Line { id, title, pass: r.pass && in_time, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn selftest_json(threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(["selftest", "--format", "json", "--threads", threads])
        .env_remove("FINSLER_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("selftest --threads {threads} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn main() {
    let grid = GridSpec::default();
    let specs = suite::oracle_corpus(2024);
    let pts = suite::random_points(100, 3, 2025);
    let mut lines = Vec::new();

    let (r, t) = timed(|| suite::psi_suite(&grid));
    lines.push(from_suite(1, "psi identity suite", &r, t, Some(5.0)));

    let (r, t) = timed(|| suite::spray_agreement(&specs, &pts, ORACLE_TOL));
    lines.push(from_suite(2, "spray oracle", &r, t, Some(30.0)));

    let (r, t) = timed(|| suite::berwald_agreement(&specs, &pts, ORACLE_TOL));
    lines.push(from_suite(3, "berwald oracle", &r, t, Some(60.0)));

    let (r, t) = timed(|| suite::landsberg_agreement(&specs, &pts, ORACLE_TOL));
    lines.push(from_suite(4, "landsberg oracle", &r, t, None));

    let (r, t) = timed(|| suite::unicorn_reproduction(&grid));
    lines.push(from_suite(5, "unicorn reproduction", &r, t, None));

    let (r, t) = timed(|| suite::regularity(0.0, 0.6));
    lines.push(from_suite(6, "regularity probe", &r, t, None));

    let ((r, _), t) = timed(|| suite::concordance(&suite::concordance_corpus(), &grid));
    lines.push(from_suite(7, "characterization concordance", &r, t, None));

    let (r, t) = timed(|| suite::anomaly_scan(&suite::anomaly_corpus(), &grid));
    lines.push(from_suite(8, "landsberg iff berwald consistency", &r, t, None));

    let (res, t) = timed(|| selftest_json("1").and_then(|a| selftest_json("8").map(|b| (a, b))));
    let (pass, detail) = match res {
        Ok((a, b)) => {
            (a == b, format!("{} vs {} bytes, identical = {}, {:.2}s", a.len(), b.len(), a == b, t.as_secs_f64()))
        }
        Err(e) => (false, e),
    };
    lines.push(Line { id: 9, title: "selftest determinism across thread counts", pass, detail });

    for l in &lines {
        println!("{} criterion {}: {} ({})", if l.pass { "PASS" } else { "FAIL" }, l.id, l.title, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
