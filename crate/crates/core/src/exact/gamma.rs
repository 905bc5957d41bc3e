//! Log-Gamma ratios accurate for large, nearly equal arguments.
//!
//! `ln Γ(a) - ln Γ(b)` is never formed as a difference of two large
//! log-Gammas. Both arguments are shifted up with `Γ(x+1) = xΓ(x)` until the
//! smaller one reaches [`STIRLING_MIN`], and the Stirling series is then
//! differenced term by term with `a = b + d`:
//!
//! ```text
//! (a-½)ln a - (b-½)ln b = (b-½)·ln1p(d/b) + d·ln a
//! ```

use crate::{Error, Result};

const STIRLING_MIN: f64 = 16.0;

// B_{2k} / (2k (2k-1)), k = 1..8
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `ln Γ(x) - [(x-½) ln x - x + ½ ln 2π]` for `x >= STIRLING_MIN`.
fn stirling_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn check(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("log-Gamma argument {x} must be positive and finite")))
    }
}

/// `ln(Γ(a) / Γ(b))` for `a, b > 0`.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    check(a)?;
    check(b)?;
    if a == b {
        return Ok(0.0);
    }
    let lo = a.min(b);
    let shift = if lo < STIRLING_MIN { (STIRLING_MIN - lo).ceil() } else { 0.0 };

    // ln Γ(x) = ln Γ(x + k) - Σ_{i<k} ln(x + i)
    let d = a - b;
    let mut correction = 0.0;
    let mut i = 0.0;
    while i < shift {
        correction += (d / (b + i)).ln_1p();
        i += 1.0;
    }
    let (x, y) = (a + shift, b + shift);
    let main = (y - 0.5) * (d / y).ln_1p() + d * x.ln() - d;
    Ok(main + (stirling_tail(x) - stirling_tail(y)) - correction)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    log_gamma_ratio(x, 1.0)
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(ln_gamma(x)?.exp())
}
