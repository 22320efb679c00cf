//! Acceptance checks for `esl-core`.
//!
//! Every check carries its tolerance; `tighten` divides each tolerance (and
//! shrinks each accepted interval about its centre) so a run with a large
//! factor must fail.

use std::fmt;
use std::time::{Duration, Instant};

mod checks;
pub mod oracle;

/// Outcome of one check that ran to completion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub measured: String,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub id: &'static str,
    /// Criterion with its tolerance, as printed in reports.
    pub criterion: &'static str,
    run: fn(f64) -> esl_core::Result<Verdict>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub id: &'static str,
    pub criterion: &'static str,
    pub outcome: Result<Verdict, String>,
    pub elapsed: Duration,
}

impl Check {
    pub fn run(&self, tighten: f64) -> Report {
        let start = Instant::now();
        let outcome = (self.run)(tighten).map_err(|e| e.to_string());
        Report { id: self.id, criterion: self.criterion, outcome, elapsed: start.elapsed() }
    }
}

impl Report {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(v) if v.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let detail = match &self.outcome {
            Ok(v) => v.measured.clone(),
            Err(e) => format!("error: {e}"),
        };
        write!(f, "{status} {:<22} {:>7.2}s  {}  [{}]", self.id, self.elapsed.as_secs_f64(), detail, self.criterion)
    }
}

pub fn checks() -> &'static [Check] {
    checks::ALL
}

pub fn find(id: &str) -> Option<&'static Check> {
    checks().iter().find(|c| c.id == id)
}

/// Runs every check in order, calling `each` as reports arrive.
pub fn run_all(tighten: f64, mut each: impl FnMut(&Report)) -> Vec<Report> {
    checks()
        .iter()
        .map(|c| {
            let r = c.run(tighten);
            each(&r);
            r
        })
        .collect()
}
