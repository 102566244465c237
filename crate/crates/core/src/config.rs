//! Metric configuration files.
//!
//! ```toml
//! [metric]
//! name = "randers"
//! n = 3
//! family = "randers"          # or: phi = "sqrt(z^2+1)+c*z"
//!
//! [params]
//! c = 0.5
//!
//! [grid]                      # optional; defaults shown
//! x0_min = -1.0
//! x0_max = 1.0
//! x0_count = 5                # likewise r_*, s_frac_*, z_*
//!
//! [tolerances]                # optional
//! vanish_tol = 1e-7
//! oracle_tol = 1e-6
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characterize::VANISH_TOL;
use crate::dsl::{Family, ParameterEnv};
use crate::metric::{Axis, GridSpec, MetricSpec};
use crate::suite::ORACLE_TOL;
use crate::FinslerError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config '{path}': {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("config error: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Metric(#[from] FinslerError),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    name: String,
    n: usize,
    family: Option<String>,
    phi: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x0_min: Option<f64>,
    x0_max: Option<f64>,
    x0_count: Option<usize>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    r_count: Option<usize>,
    s_frac_min: Option<f64>,
    s_frac_max: Option<f64>,
    s_frac_count: Option<usize>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    z_count: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    vanish_tol: Option<f64>,
    oracle_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    metric: RawMetric,
    #[serde(default)]
    params: std::collections::BTreeMap<String, f64>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    tolerances: RawTolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub vanish_tol: f64,
    pub oracle_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances { vanish_tol: VANISH_TOL, oracle_tol: ORACLE_TOL }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub metric: MetricSpec,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    /// Echo of the parsed file (normalized) for reports.
    pub echo: serde_json::Value,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
        let mut params = ParameterEnv::new();
        for (k, &v) in &raw.params {
            params.insert(k, v).map_err(FinslerError::from)?;
        }
        let m = &raw.metric;
        let metric = match (&m.family, &m.phi) {
            (Some(f), None) => {
                let family = Family::from_name(f, &params).map_err(FinslerError::from)?;
                let mut spec = MetricSpec::builtin(family, m.n)?;
                spec.name = m.name.clone();
                spec
            }
            (None, Some(phi)) => MetricSpec::parse(&m.name, m.n, phi, params)?,
            _ => return Err(ConfigError::Invalid("[metric] needs exactly one of `family` or `phi`".into())),
        };
        let grid = grid_from(&raw.grid)?;
        let d = Tolerances::default();
        let tolerances = Tolerances {
            vanish_tol: raw.tolerances.vanish_tol.unwrap_or(d.vanish_tol),
            oracle_tol: raw.tolerances.oracle_tol.unwrap_or(d.oracle_tol),
        };
        for (name, v) in [("vanish_tol", tolerances.vanish_tol), ("oracle_tol", tolerances.oracle_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} must be positive")));
            }
        }
        let echo = serde_json::json!({
            "metric": serde_json::to_value(&raw.metric).expect("serializes"),
            "params": raw.params,
            "grid": grid,
            "tolerances": tolerances,
        });
        Ok(Config { metric, grid, tolerances, echo })
    }
}

fn grid_from(g: &RawGrid) -> Result<GridSpec, ConfigError> {
    let d = GridSpec::default();
    let axis = |name: &str, def: Axis, min: Option<f64>, max: Option<f64>, count: Option<usize>| {
        let a = Axis::new(min.unwrap_or(def.min), max.unwrap_or(def.max), count.unwrap_or(def.count));
        if a.count < 2 {
            return Err(ConfigError::Invalid(format!("grid {name}_count must be at least 2")));
        }
        if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
            return Err(ConfigError::Invalid(format!("grid {name}_min < {name}_max is required")));
        }
        Ok(a)
    };
    let grid = GridSpec {
        x0: axis("x0", d.x0, g.x0_min, g.x0_max, g.x0_count)?,
        r: axis("r", d.r, g.r_min, g.r_max, g.r_count)?,
        s_frac: axis("s_frac", d.s_frac, g.s_frac_min, g.s_frac_max, g.s_frac_count)?,
        z: axis("z", d.z, g.z_min, g.z_max, g.z_count)?,
    };
    if grid.r.min <= 0.0 {
        return Err(ConfigError::Invalid("grid r_min must be positive".into()));
    }
    if grid.s_frac.min <= -1.0 || grid.s_frac.max >= 1.0 {
        return Err(ConfigError::Invalid("grid s_frac must lie strictly inside (-1, 1)".into()));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_config() {
        let c = Config::parse("[metric]\nname = \"r\"\nn = 3\nfamily = \"randers\"\n[params]\nc = 0.25\n").unwrap();
        assert_eq!(c.metric.name, "r");
        assert_eq!(c.grid, GridSpec::default());
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn phi_config_with_grid() {
        let c = Config::parse(
            "[metric]\nname = \"e\"\nn = 4\nphi = \"sqrt(z^2+a)\"\n[params]\na = 1\n[grid]\nz_count = 3\n[tolerances]\nvanish_tol = 1e-6\n",
        )
        .unwrap();
        assert_eq!(c.grid.z.count, 3);
        assert_eq!(c.tolerances.vanish_tol, 1e-6);
        assert_eq!(c.metric.n, 4);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "[metric]\nname = \"e\"\nn = 3\n",
            "[metric]\nname = \"e\"\nn = 3\nphi = \"sqrt(z^2+1)\"\nfamily = \"euclidean\"\n",
            "[metric]\nname = \"e\"\nn = 3\nphi = \"sqrt(z^2+1)\"\n[grid]\nx0_count = 1\n",
            "[metric]\nname = \"e\"\nn = 3\nphi = \"sqrt(z^2+q)\"\n",
            "[metric]\nname = \"e\"\nn = 3\nphi = \"sqrt(z^2+\"\n",
            "[metric]\nname = \"e\"\nn = 9\nphi = \"z\"\n",
            "[metric]\nn = 3\nphi = \"z\"\n",
            "[metric]\nname = \"e\"\nn = 3\nphi = \"z\"\nextra = 1\n",
        ] {
            assert!(Config::parse(text).is_err(), "{text}");
        }
    }
}
