//! Versioned run reports with per-check epistemic status.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Exact over the field the statement lives in.
    Proved,
    /// Exact at each of `points` specializations of `q`.
    VerifiedAtKPoints,
    Failed,
    Skipped,
}

impl Status {
    pub fn label(self, points: Option<usize>) -> String {
        match (self, points) {
            (Status::Proved, _) => "proved".into(),
            (Status::VerifiedAtKPoints, Some(k)) => format!("verified at {k} points"),
            (Status::VerifiedAtKPoints, None) => "verified".into(),
            (Status::Failed, _) => "FAILED".into(),
            (Status::Skipped, _) => "skipped".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Where a failure was observed, or why a check was skipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub timing_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub source: String,
    pub field: String,
    pub seed: u64,
    pub rank_bound: usize,
    pub samples: usize,
}

/// Values computed at one specialization (or symbolically, with `q = "q"`).
#[derive(Clone, Debug, Serialize)]
pub struct PointValues {
    pub q: String,
    #[serde(flatten)]
    pub values: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    /// Values of `q` the checks ran at, in the scalar grammar.
    pub specializations: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub values: Vec<PointValues>,
    pub timing_ms: u64,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Failed).count()
    }

    pub fn skipped(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Skipped).count()
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed() > 0 {
            1
        } else {
            0
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with every `timing_ms` field removed, for comparing runs.
    pub fn to_json_without_timings(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_timings(&mut v);
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "{} {}  {}  {}  field={}  seed={}", self.tool, self.version, self.command, c.source, c.field, c.seed);
        let _ = writeln!(out, "q: {}", self.specializations.join(", "));
        let width = self.checks.iter().map(|r| r.status.label(r.points).len()).max().unwrap_or(0);
        for r in &self.checks {
            let _ = writeln!(out, "  {:width$}  {}", r.status.label(r.points), r.name);
            if let Some(w) = &r.witness {
                let _ = writeln!(out, "  {:width$}    {}", "", w);
            }
        }
        for pv in &self.values {
            if pv.values.is_empty() {
                continue;
            }
            let _ = writeln!(out, "values at q = {}:", pv.q);
            for (k, v) in &pv.values {
                let _ = writeln!(out, "  {k} = {}", render_value(v));
            }
        }
        let _ = writeln!(out, "{} checks, {} failed, {} skipped", self.checks.len(), self.failed(), self.skipped());
        out
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timing_ms");
            for x in map.values_mut() {
                strip_timings(x);
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            schema: SCHEMA_VERSION,
            tool: "hecke-lab".into(),
            version: "0".into(),
            command: "validate".into(),
            config: ConfigEcho { source: "builtin:std:2".into(), field: "symbolic".into(), seed: 1, rank_bound: 8, samples: 10 },
            specializations: vec!["q".into()],
            checks: vec![
                CheckRecord { name: "a".into(), status: Status::Proved, points: None, witness: None, timing_ms: 3 },
                CheckRecord { name: "b".into(), status: Status::Skipped, points: None, witness: Some("cap".into()), timing_ms: 0 },
            ],
            values: vec![],
            timing_ms: 7,
        }
    }

    #[test]
    fn exit_code_tracks_failures() {
        let mut r = sample();
        assert_eq!(r.exit_code(), 0);
        r.checks[0].status = Status::Failed;
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn timings_are_stripped() {
        let r = sample();
        let s = r.to_json_without_timings();
        assert!(!s.contains("timing_ms"));
        assert!(r.to_json().contains("\"schema\": 1"));
        assert!(r.to_json().contains("\"verified-at-k-points\"") || r.to_json().contains("\"proved\""));
    }

    #[test]
    fn status_serialization() {
        assert_eq!(serde_json::to_string(&Status::VerifiedAtKPoints).unwrap(), "\"verified-at-k-points\"");
        assert_eq!(Status::VerifiedAtKPoints.label(Some(5)), "verified at 5 points");
    }
}
