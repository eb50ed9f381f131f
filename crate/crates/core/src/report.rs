//! Check records and suite reports. Structured output is deterministic:
//! records are sorted by id and carry no timing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// A statement relied on but outside what can be computed here.
    CitedNotVerified,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::CitedNotVerified => "CITED, NOT VERIFIED",
        }
    }
}

/// Outcome of one check. A failure carries the inputs needed to replay it.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    pub trials: usize,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
}

#[derive(Serialize)]
struct Line<'a> {
    suite: &'a str,
    #[serde(flatten)]
    check: &'a CheckRecord,
}

#[derive(Serialize)]
struct Header<'a> {
    suite: &'a str,
    config: &'a BTreeMap<String, String>,
    passed: bool,
    checks: usize,
}

impl SuiteReport {
    pub fn new(suite: &str, config: BTreeMap<String, String>, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        SuiteReport { suite: suite.to_string(), config, checks }
    }

    /// No check failed. Cited statements do not count as failures.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// Human-readable report, including timings.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "suite {} : {verdict}", self.suite).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "  config {k} = {v}").unwrap();
        }
        for c in &self.checks {
            writeln!(out, "  [{}] {} ({} trials, {} ms) {}", c.status.label(), c.id, c.trials, c.elapsed_ms, c.detail)
                .unwrap();
            if let Some(ce) = &c.counterexample {
                writeln!(out, "      counterexample: {ce}").unwrap();
            }
        }
        out
    }

    /// A header line followed by one self-contained JSON record per check.
    pub fn to_json_lines(&self) -> String {
        let mut out = serde_json::to_string(&Header {
            suite: &self.suite,
            config: &self.config,
            passed: self.passed(),
            checks: self.checks.len(),
        })
        .unwrap();
        out.push('\n');
        for c in &self.checks {
            out.push_str(&serde_json::to_string(&Line { suite: &self.suite, check: c }).unwrap());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, status: Status, ms: u128) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            anchor: "a".into(),
            status,
            trials: 1,
            detail: String::new(),
            counterexample: None,
            elapsed_ms: ms,
        }
    }

    #[test]
    fn sorted_and_timing_free() {
        let a = SuiteReport::new("s", BTreeMap::new(), vec![rec("b", Status::Pass, 5), rec("a", Status::Pass, 9)]);
        let b = SuiteReport::new("s", BTreeMap::new(), vec![rec("a", Status::Pass, 1), rec("b", Status::Pass, 2)]);
        assert_eq!(a.checks[0].id, "a");
        assert_eq!(a.to_json_lines(), b.to_json_lines());
        assert!(!a.to_json_lines().contains("elapsed"));
    }

    #[test]
    fn cited_is_not_failure() {
        let r = SuiteReport::new("s", BTreeMap::new(), vec![rec("c", Status::CitedNotVerified, 0)]);
        assert!(r.passed());
        assert!(r.to_text().contains("CITED, NOT VERIFIED"));
        let f = SuiteReport::new("s", BTreeMap::new(), vec![rec("c", Status::Fail, 0)]);
        assert!(!f.passed());
    }
}
