//! Loading a config file and rendering a classification report as JSON.

use finsler_core::characterize::classify;
use finsler_core::config::Config;
use finsler_core::report::{Format, Report};
use finsler_core::suite::Check;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/randers.cfg").into());
    let cfg = Config::load(&path)?;
    let cl = classify(&cfg.metric, &cfg.grid, cfg.tolerances.vanish_tol);
    let mut rep = Report::new("classify", cfg.echo.clone());
    rep.check(Check::holds("no anomaly", !cl.anomaly));
    rep.verdict = Some(cl.verdict.as_str().into());
    print!("{}", rep.render(Format::Json));
    Ok(())
}
