//! Command reports and their text, JSON and CSV renderings.
//!
//! JSON uses shortest round-trip float formatting and a fixed key order, so equal inputs give
//! byte-identical output. Non-finite values serialize as `null`.

use serde::Serialize;
use serde_json::Value;

use crate::suite::{Check, SuiteResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected text, json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub spec: Value,
    pub checks: Vec<Check>,
    pub details: Value,
    pub verdict: Option<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(command: &str, spec: Value) -> Report {
        Report {
            command: command.to_string(),
            spec,
            checks: Vec::new(),
            details: Value::Null,
            verdict: None,
            pass: true,
            wall_time_s: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    /// Appends the checks of a suite, prefixing names with the suite name.
    pub fn suite(&mut self, s: &SuiteResult) {
        for c in &s.checks {
            self.check(Check { name: format!("{}: {}", s.name, c.name), ..c.clone() });
        }
    }

    pub fn details(mut self, details: impl Serialize) -> Report {
        self.details = to_value(details);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["command", "check", "value", "relation", "tolerance", "pass"]).expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                self.command.as_str(),
                c.name.as_str(),
                &format!("{:e}", c.value),
                c.relation,
                &format!("{:e}", c.tolerance),
                if c.pass { "true" } else { "false" },
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    fn text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        if let Some(v) = &self.verdict {
            out += &format!("verdict: {v}\n");
        }
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        for c in &self.checks {
            out += &format!(
                "  [{}] {:<width$}  {:>12.4e} {} {:.1e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.relation,
                c.tolerance,
            );
        }
        if !self.details.is_null() {
            out += "details:\n";
            let pretty = serde_json::to_string_pretty(&self.details).expect("details serialize");
            for line in pretty.lines() {
                out += &format!("  {line}\n");
            }
        }
        if let Some(t) = self.wall_time_s {
            out += &format!("wall time: {t:.3} s\n");
        }
        out += if self.pass { "overall: PASS\n" } else { "overall: FAIL\n" };
        out
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_stable_and_fails_propagate() {
        let mut r = Report::new("demo", serde_json::json!({"b": 1, "a": 0.1}));
        r.check(Check::at_most("x", 0.5, 1.0));
        assert!(r.pass);
        r.check(Check::at_most("y", 2.0, 1.0));
        assert!(!r.pass);
        let a = r.render(Format::Json);
        assert_eq!(a, r.clone().render(Format::Json));
        assert!(a.find("\"a\"").unwrap() < a.find("\"b\"").unwrap());
        assert!(!a.contains("wall_time_s"));
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let mut r = Report::new("demo", Value::Null);
        r.check(Check::at_most("with, comma", 0.5, 1.0));
        r.check(Check::holds("flag", false));
        let text = r.render(Format::Csv);
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("\"with, comma\""));
    }
}
