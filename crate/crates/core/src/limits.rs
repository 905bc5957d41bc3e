//! Regime classification, normalisations and limit targets.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::exact::{gamma, ln_gamma};
use crate::walk::WalkParams;
use crate::{Error, Result};

const CRITICAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Diffusive,
    Critical,
    Superdiffusive,
}

/// Normalising factor applied to `S_n` (or `N*_n`) at time `n` with memory `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scaling {
    /// `√m / n`
    SqrtM,
    /// `√(m / ln m) / n`
    SqrtMOverLogM,
    /// `m^exponent / n`; the superdiffusive case uses `exponent = 1 - (p - q)`,
    /// the nonzero count uses `exponent = r`.
    Power { exponent: f64 },
    /// `1 / √n`
    SqrtN,
}

impl Scaling {
    pub fn factor(&self, n: u64, m: u64) -> f64 {
        let (n, m) = (n as f64, m as f64);
        match *self {
            Scaling::SqrtM => m.sqrt() / n,
            Scaling::SqrtMOverLogM => (m / m.max(2.0).ln()).sqrt() / n,
            Scaling::Power { exponent } => m.powf(exponent) / n,
            Scaling::SqrtN => 1.0 / n.sqrt(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Scaling::SqrtM => "sqrt(m)/n".into(),
            Scaling::SqrtMOverLogM => "sqrt(m/log m)/n".into(),
            Scaling::Power { exponent } => format!("m^{exponent}/n"),
            Scaling::SqrtN => "1/sqrt(n)".into(),
        }
    }
}

/// Regime, normalisation and limit parameters for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `a = p - q` (`2p - 1` for non-delayed walks).
    pub drift: f64,
    pub scaling: Scaling,
    /// Limit of `m/n`; zero for the slowly growing memory.
    pub alpha: f64,
    pub limit_mean: Option<f64>,
    pub limit_var: Option<f64>,
    /// Mass of the limit law at zero.
    pub atom: f64,
    pub cdf_available: bool,
    /// Name of the limit statement being targeted.
    pub target: String,
    pub note: Option<String>,
}

/// Classifies `params` by the drift `a = p - q`: diffusive for `a < 1/2`,
/// critical at `a = 1/2`, superdiffusive above.
pub fn classify_regime(params: &WalkParams) -> RegimeReport {
    let a = params.drift();
    let regime = if (a - 0.5).abs() <= CRITICAL_TOLERANCE {
        Regime::Critical
    } else if a < 0.5 {
        Regime::Diffusive
    } else {
        Regime::Superdiffusive
    };
    let scaling = match regime {
        Regime::Diffusive => Scaling::SqrtM,
        Regime::Critical => Scaling::SqrtMOverLogM,
        Regime::Superdiffusive => Scaling::Power { exponent: 1.0 - a },
    };
    let delayed = params.is_delayed();
    let target = match (regime, delayed) {
        (Regime::Diffusive, false) => "diffusive normal limit",
        (Regime::Critical, false) => "critical normal limit",
        (Regime::Superdiffusive, false) => "superdiffusive limit (2p-1)L",
        (Regime::Diffusive, true) => "delayed diffusive mixture limit",
        (Regime::Critical, true) => "delayed critical mixture limit",
        (Regime::Superdiffusive, true) => "delayed superdiffusive limit (p-q)L",
    };
    let note = (a == 0.0 && !delayed).then(|| {
        "p = 1/2: sqrt(m) S_n / n -> 0 in probability; S_n / sqrt(n) -> N(0,1) instead".to_string()
    });
    RegimeReport {
        regime,
        drift: a,
        scaling,
        alpha: 0.0,
        limit_mean: None,
        limit_var: None,
        atom: params.r(),
        cdf_available: regime != Regime::Superdiffusive,
        target: target.into(),
        note,
    }
}

/// Mean and variance of the almost-sure limit `L` of `S_m / m^a` for the
/// full-memory walk in the superdiffusive regime (`a = p - q > 1/2`).
pub fn superdiffusive_l_moments(params: &WalkParams) -> Result<(f64, f64)> {
    let a = params.drift();
    if a <= 0.5 {
        return Err(Error::Domain(format!("L is defined only for p-q > 1/2 (got {a})")));
    }
    let b = params.activity();
    let mean = a / gamma(1.0 + a)?;
    let second = b * b / ((2.0 * a - 1.0) * gamma(2.0 * a)?);
    Ok((mean, second - mean * mean))
}

/// Fills in the limit mean and variance of the scaled statistic.
///
/// `alpha = 0` selects the slowly growing memory (`m/n -> 0`); `alpha ∈ (0, 1]`
/// selects `m/n -> alpha`, available for non-delayed walks only.
pub fn limit_moments(params: &WalkParams, alpha: f64) -> Result<RegimeReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha={alpha} must lie in [0, 1]")));
    }
    if alpha > 0.0 && params.is_delayed() {
        return Err(Error::Unsupported(
            "no limit moments are available for delayed walks with m/n -> alpha > 0".into(),
        ));
    }
    let mut report = classify_regime(params);
    let a = report.drift;
    let b = params.activity();
    let (mean, var) = if alpha == 0.0 {
        match report.regime {
            Regime::Diffusive => (0.0, a * a * b * b / (1.0 - 2.0 * a)),
            Regime::Critical => (0.0, 0.25 * b * b),
            Regime::Superdiffusive => {
                let (el, vl) = superdiffusive_l_moments(params)?;
                (a * el, a * a * vl)
            }
        }
    } else {
        // factor = (2p-1)(1-alpha) + alpha
        let factor = a * (1.0 - alpha) + alpha;
        report.alpha = alpha;
        report.cdf_available = false;
        report.target = format!("{} with m/n -> {alpha}", regime_word(report.regime));
        match report.regime {
            Regime::Diffusive => (0.0, factor * factor / (3.0 - 4.0 * params.p()) + alpha * (1.0 - alpha)),
            Regime::Critical => (0.0, 0.25 * (1.0 - alpha).powi(2) + alpha),
            Regime::Superdiffusive => {
                let (el, vl) = superdiffusive_l_moments(params)?;
                (el * factor, vl * factor * factor)
            }
        }
    };
    report.limit_mean = Some(mean);
    report.limit_var = Some(var);
    Ok(report)
}

fn regime_word(r: Regime) -> &'static str {
    match r {
        Regime::Diffusive => "diffusive moments",
        Regime::Critical => "critical moments",
        Regime::Superdiffusive => "superdiffusive moments",
    }
}

/// CDF handle with an optional atom at zero.
pub trait Cdf {
    /// `F(x) = P(X <= x)`
    fn cdf(&self, x: f64) -> f64;

    /// `F(x-) = P(X < x)`
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    /// Points where `F` jumps.
    fn atoms(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `(1 - atom) · N(0, variance) + atom · δ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCdf {
    pub variance: f64,
    pub atom: f64,
}

impl LimitCdf {
    pub fn normal(variance: f64) -> Self {
        Self { variance, atom: 0.0 }
    }

    pub fn mixture(variance: f64, atom: f64) -> Self {
        Self { variance, atom }
    }

    fn continuous(&self, x: f64) -> f64 {
        if self.variance > 0.0 {
            0.5 * erfc(-x / (2.0 * self.variance).sqrt())
        } else if x >= 0.0 {
            1.0
        } else {
            0.0
        }
    }

    fn has_jump(&self) -> bool {
        self.atom > 0.0 || self.variance <= 0.0
    }
}

impl Cdf for LimitCdf {
    fn cdf(&self, x: f64) -> f64 {
        let step = if x >= 0.0 { 1.0 } else { 0.0 };
        (1.0 - self.atom) * self.continuous(x) + self.atom * step
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x == 0.0 && self.has_jump() {
            let cont = if self.variance > 0.0 { 0.5 } else { 0.0 };
            (1.0 - self.atom) * cont
        } else {
            self.cdf(x)
        }
    }

    fn atoms(&self) -> Vec<f64> {
        if self.has_jump() {
            vec![0.0]
        } else {
            Vec::new()
        }
    }
}

/// Limit CDF of the scaled statistic.
///
/// Non-delayed diffusive/critical: `N(0, limit_var)`. Delayed: the mixture
/// `(p+q)·N(0, σ²) + r·δ_0` whose total variance is `limit_var`, i.e.
/// `σ² = limit_var / (p + q)`.
pub fn limit_cdf(report: &RegimeReport) -> Result<LimitCdf> {
    if report.alpha > 0.0 {
        return Err(Error::CdfUnavailable(
            "no limit distribution is known when m/n -> alpha > 0".into(),
        ));
    }
    if !report.cdf_available || report.regime == Regime::Superdiffusive {
        return Err(Error::CdfUnavailable(
            "the superdiffusive limit L has no known distribution; use moments".into(),
        ));
    }
    let var = report
        .limit_var
        .ok_or_else(|| Error::Contract("limit_cdf needs a report from limit_moments".into()))?;
    let component = if report.atom > 0.0 { var / (1.0 - report.atom) } else { var };
    Ok(LimitCdf::mixture(component, report.atom))
}

/// `(1 - r) / Γ(1 - r)`: limit of `E(N*_n m^r / n)`.
pub fn zeros_limit_mean(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r={r} must satisfy 0<r<1")));
    }
    Ok((1.0 - r) * (-ln_gamma(1.0 - r)?).exp())
}

/// Asymptotic variance of `S_n / √n` when the walker remembers its last `m` steps:
/// `(m - 1 + 2p) / (2(1-p)(2(1-p)m + 2p - 1))`.
pub fn window_variance_fixed_last_m(p: f64, m: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p={p} violates 0<p<1")));
    }
    if m == 0 {
        return Err(Error::Domain("window size must be >= 1".into()));
    }
    let m = m as f64;
    let one_minus = 1.0 - p;
    Ok((m - 1.0 + 2.0 * p) / (2.0 * one_minus * (2.0 * one_minus * m + 2.0 * p - 1.0)))
}

/// Conjectured limit `1 / (4(1-p)²)` of the window variance as the window grows.
pub fn window_variance_conjectured_limit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p={p} violates 0<p<1")));
    }
    Ok(1.0 / (4.0 * (1.0 - p) * (1.0 - p)))
}
