//! Verification blocks attached to every command.
//!
//! Checks are grouped by name. The report keeps, for every group, the entry
//! furthest from passing, plus every failing entry up to [`MAX_FAILURES`].

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::num;

pub const MAX_FAILURES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|actual - expected| <= tolerance`
    Close,
    /// `actual <= expected`
    AtMost,
    /// `actual >= expected`
    AtLeast,
    /// A predicate; `expected` and `actual` are descriptive.
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub relation: Relation,
    pub expected: Value,
    pub actual: Value,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub count: usize,
    pub failed: usize,
    /// Entry with the largest violation (or smallest margin).
    pub worst: CheckEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub summary: Vec<CheckSummary>,
    pub failures: Vec<CheckEntry>,
    pub failures_truncated: bool,
}

#[derive(Clone, Debug)]
struct Group {
    summary: CheckSummary,
    /// Signed distance past the limit; larger is worse.
    worst_excess: f64,
}

/// Ordered collection of check results.
#[derive(Clone, Debug, Default)]
pub struct Checker {
    groups: Vec<Group>,
    failures: Vec<CheckEntry>,
    truncated: bool,
}

impl Checker {
    pub fn new() -> Self {
        Self::default()
    }

    /// `|actual - expected| <= tol`; non-finite values fail.
    pub fn close(&mut self, check: &str, ctx: Option<String>, expected: f64, actual: f64, tol: f64) -> bool {
        let dev = (actual - expected).abs();
        let passed = dev.is_finite() && dev <= tol;
        let excess = if dev.is_finite() { dev - tol } else { f64::INFINITY };
        self.push(
            CheckEntry {
                check: check.into(),
                context: ctx,
                relation: Relation::Close,
                expected: num(expected),
                actual: num(actual),
                tolerance: Some(tol),
                passed,
            },
            excess,
        )
    }

    pub fn at_most(&mut self, check: &str, ctx: Option<String>, actual: f64, limit: f64) -> bool {
        let passed = actual <= limit;
        let excess = if actual.is_nan() { f64::INFINITY } else { actual - limit };
        self.push(
            CheckEntry {
                check: check.into(),
                context: ctx,
                relation: Relation::AtMost,
                expected: num(limit),
                actual: num(actual),
                tolerance: None,
                passed,
            },
            excess,
        )
    }

    pub fn at_least(&mut self, check: &str, ctx: Option<String>, actual: f64, limit: f64) -> bool {
        let passed = actual >= limit;
        let excess = if actual.is_nan() { f64::INFINITY } else { limit - actual };
        self.push(
            CheckEntry {
                check: check.into(),
                context: ctx,
                relation: Relation::AtLeast,
                expected: num(limit),
                actual: num(actual),
                tolerance: None,
                passed,
            },
            excess,
        )
    }

    pub fn holds(
        &mut self,
        check: &str,
        ctx: Option<String>,
        passed: bool,
        expected: impl Into<Value>,
        actual: impl Into<Value>,
    ) -> bool {
        let excess = if passed { 0.0 } else { f64::INFINITY };
        self.push(
            CheckEntry {
                check: check.into(),
                context: ctx,
                relation: Relation::Holds,
                expected: expected.into(),
                actual: actual.into(),
                tolerance: None,
                passed,
            },
            excess,
        )
    }

    /// Records a computation that could not complete.
    pub fn error(&mut self, check: &str, ctx: Option<String>, message: impl Into<String>) -> bool {
        self.holds(check, ctx, false, "completed", message.into())
    }

    /// Appends `other` after the entries already held.
    pub fn merge(&mut self, other: Checker) {
        for g in other.groups {
            self.absorb(g);
        }
        for f in other.failures {
            self.record_failure(f);
        }
        self.truncated |= other.truncated;
    }

    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.summary.failed == 0)
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.summary.count).sum()
    }

    pub fn report(&self) -> CheckReport {
        CheckReport {
            passed: self.passed(),
            total: self.total(),
            failed: self.groups.iter().map(|g| g.summary.failed).sum(),
            summary: self.groups.iter().map(|g| g.summary.clone()).collect(),
            failures: self.failures.clone(),
            failures_truncated: self.truncated,
        }
    }

    fn push(&mut self, entry: CheckEntry, excess: f64) -> bool {
        let passed = entry.passed;
        if !passed {
            self.record_failure(entry.clone());
        }
        self.absorb(Group {
            summary: CheckSummary {
                check: entry.check.clone(),
                count: 1,
                failed: usize::from(!passed),
                worst: entry,
            },
            worst_excess: excess,
        });
        passed
    }

    fn absorb(&mut self, g: Group) {
        match self.groups.iter_mut().find(|x| x.summary.check == g.summary.check) {
            Some(x) => {
                x.summary.count += g.summary.count;
                x.summary.failed += g.summary.failed;
                if rank(&g) > rank(x) {
                    x.summary.worst = g.summary.worst;
                    x.worst_excess = g.worst_excess;
                }
            }
            None => self.groups.push(g),
        }
    }

    fn record_failure(&mut self, entry: CheckEntry) {
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(entry);
        } else {
            self.truncated = true;
        }
    }
}

/// Failing entries outrank passing ones; ties keep the earlier entry.
fn rank(g: &Group) -> (bool, f64) {
    (!g.summary.worst.passed, g.worst_excess)
}
