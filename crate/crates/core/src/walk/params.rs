use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance used when checking that `p + q + r = 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Step probabilities of an elephant random walk.
///
/// After choosing a remembered step `X_K`, the walker repeats it with
/// probability `p`, reverses it with probability `q` and stays put with
/// probability `r`. The first step is `+1` with probability `s` when `r = 0`;
/// delayed walks (`r > 0`) draw the first step from `(+1, 0, -1)` with
/// probabilities `(p, r, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    p: f64,
    q: f64,
    r: f64,
    s: f64,
}

impl WalkParams {
    /// Classic (non-delayed) walk: `q = 1 - p`, `r = 0`, `s = p`.
    pub fn new(p: f64) -> Result<Self> {
        Self::delayed(p, 1.0 - p, 0.0)
    }

    /// Walk with staying probability `r`; `s` defaults to `p`.
    pub fn delayed(p: f64, q: f64, r: f64) -> Result<Self> {
        let params = Self { p, q, r, s: p };
        params.validate()?;
        Ok(params)
    }

    /// Resolves a triple where any one of `q` and `r` may be missing.
    ///
    /// `q` defaults to `1 - p - r` and `r` to `1 - p - q`; with both absent the
    /// walk is non-delayed.
    pub fn resolve(p: f64, q: Option<f64>, r: Option<f64>, s: Option<f64>) -> Result<Self> {
        let (q, r) = match (q, r) {
            (Some(q), Some(r)) => (q, r),
            (Some(q), None) => (q, clean(1.0 - p - q)),
            (None, Some(r)) => (clean(1.0 - p - r), r),
            (None, None) => (1.0 - p, 0.0),
        };
        let params = Self::delayed(p, q, r)?;
        match s {
            Some(s) => params.with_first_step(s),
            None => Ok(params),
        }
    }

    /// Overrides the probability that the first step is `+1` (non-delayed walks).
    pub fn with_first_step(mut self, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParams(format!(
                "first-step probability s={s} must satisfy 0<=s<=1"
            )));
        }
        self.s = s;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let Self { p, q, r, .. } = *self;
        if !(p.is_finite() && q.is_finite() && r.is_finite()) {
            return Err(Error::InvalidParams("probabilities must be finite".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParams(format!("p={p} violates 0<p<1")));
        }
        if q < 0.0 {
            return Err(Error::InvalidParams(format!("q={q} violates q>=0")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidParams(format!("r={r} violates 0<=r<1")));
        }
        if (p + q + r - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidParams(format!(
                "p+q+r={} violates p+q+r=1",
                p + q + r
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn is_delayed(&self) -> bool {
        self.r > 0.0
    }

    /// `p - q`, the factor relating the conditional mean of the next step to
    /// the mean of the remembered steps (equals `2p - 1` when `r = 0`).
    pub fn drift(&self) -> f64 {
        self.p - self.q
    }

    /// `p + q = 1 - r`: probability that a nonzero remembered step is not
    /// replaced by a stay.
    pub fn activity(&self) -> f64 {
        self.p + self.q
    }

    /// `E X_1`.
    pub fn first_step_mean(&self) -> f64 {
        if self.is_delayed() {
            self.p - self.q
        } else {
            2.0 * self.s - 1.0
        }
    }

    /// `P(X_1 != 0)`.
    pub fn first_step_activity(&self) -> f64 {
        1.0 - self.r
    }
}

// Snap round-off residue such as 1 - 0.7 - 0.3 = 5.5e-17 to zero.
fn clean(x: f64) -> f64 {
    if x.abs() < SUM_TOLERANCE {
        0.0
    } else {
        x
    }
}
