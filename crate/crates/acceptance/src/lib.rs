//! Bookkeeping for the acceptance run: one outcome line per check.

use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub pass: bool,
    pub details: Vec<String>,
}

impl Outcome {
    pub fn new(name: &'static str) -> Self {
        Self { name, pass: true, details: Vec::new() }
    }

    /// Records one measured quantity against a relative tolerance.
    pub fn relative(&mut self, what: &str, measured: f64, target: f64, tol: f64) {
        let gap = ((measured - target) / target).abs();
        let ok = gap <= tol;
        self.pass &= ok;
        self.details.push(format!("{what}={measured:.6} target={target:.6} gap={gap:.4} tol={tol}{}", mark(ok)));
    }

    pub fn absolute(&mut self, what: &str, measured: f64, target: f64, tol: f64) {
        let ok = (measured - target).abs() <= tol;
        self.pass &= ok;
        self.details.push(format!("{what}={measured:.6} target={target}±{tol}{}", mark(ok)));
    }

    pub fn at_most(&mut self, what: &str, measured: f64, bound: f64) {
        let ok = measured <= bound;
        self.pass &= ok;
        self.details.push(format!("{what}={measured:.3e} bound={bound:e}{}", mark(ok)));
    }

    pub fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        let ok = elapsed <= limit;
        self.pass &= ok;
        self.details.push(format!("runtime={:.2}s limit={}s{}", elapsed.as_secs_f64(), limit.as_secs(), mark(ok)));
    }

    pub fn check(&mut self, what: &str, ok: bool) {
        self.pass &= ok;
        self.details.push(format!("{what}{}", mark(ok)));
    }

    /// Recorded but never decides the outcome.
    pub fn note(&mut self, what: &str, value: f64) {
        self.details.push(format!("{what}={value:.6} (diagnostic)"));
    }

    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        format!("{status} {}: {}", self.name, self.details.join("; "))
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        ""
    } else {
        " <-- out of tolerance"
    }
}

/// Runs `f` and returns its result with the wall time.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}
