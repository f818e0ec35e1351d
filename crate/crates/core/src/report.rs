//! Machine-readable verification reports: every measured number is
//! reported as a (value, tolerance, pass) row, and a run passes exactly
//! when all of its rows pass.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One verification row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// |value| ≤ tolerance.
    pub fn residual(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value.abs() <= tolerance,
        }
    }

    /// |value − expected| ≤ tolerance, reported as the deviation.
    pub fn matches(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    /// Boolean condition (value 1 = holds), tolerance 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 0.0,
            pass: ok,
        }
    }
}

/// A full run report; serializes to a single JSON object with a `checks`
/// array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed: None,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One line per check.
    pub fn render_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "[{}] {}: value={:.6e} tolerance={:.1e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            ));
        }
        out
    }
}

/// RFC 4180 field escaping: fields containing commas, quotes or line
/// breaks are quoted, with inner quotes doubled.
pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Serializes rows of string fields as an RFC 4180 CSV document with a
/// header row and optional leading comment lines ("# key=value").
pub fn csv_document(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(
        &header
            .iter()
            .map(|h| csv_escape(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|f| csv_escape(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_aggregates_pass() {
        let mut r = Report::new("demo");
        r.push(Check::residual("a", 1e-12, 1e-10));
        assert!(r.pass);
        r.push(Check::matches("b", 3.0, 3.5, 0.1));
        assert!(!r.pass);
        assert_eq!(r.first_failure().unwrap().name, "b");
        let s = r.to_json_string();
        assert!(s.contains("\"checks\""));
        assert!(s.contains("\"tolerance\""));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
        let doc = csv_document(
            &["seed=42".into()],
            &["x", "note"],
            &[vec!["1".into(), "a,b".into()]],
        );
        assert_eq!(doc, "# seed=42\nx,note\n1,\"a,b\"\n");
    }
}
