use serde::{Deserialize, Serialize};

use super::gamma::{ln_gamma, log_gamma_ratio};
use crate::walk::{MemorySchedule, WalkParams};
use crate::{Error, Result};

/// Exact first and second moments of `S_n` and mean of `N*_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: u64,
    pub m: u64,
    pub mean_sn: f64,
    pub second_sn: f64,
    pub mean_nstar: f64,
}

impl MomentReport {
    pub fn variance_sn(&self) -> f64 {
        self.second_sn - self.mean_sn * self.mean_sn
    }

    /// Mean and variance of `factor · S_n`.
    pub fn scaled(&self, factor: f64) -> (f64, f64) {
        (self.mean_sn * factor, self.variance_sn() * factor * factor)
    }
}

/// `(E S_m, E S_m²)` for the full-memory walk with `s = p`.
pub fn exact_moments_full(p: f64, m: u64) -> Result<(f64, f64)> {
    let report = full_memory_moments(&WalkParams::new(p)?, m)?;
    Ok((report.mean_sn, report.second_sn))
}

/// Exact moments of the full-memory walk at time `m`.
///
/// With drift `a = p - q` and activity `b = p + q`:
///
/// * `E S_m = E X_1 · Γ(m + a) / (Γ(m) Γ(1 + a))`
/// * `E S_{k+1}² = E S_k² (1 + 2a/k) + b E N*_k / k`
/// * `E N*_{k+1} = E N*_k (1 + b/k)`, so `E N*_m = Γ(m + 1 - r) / (Γ(1 - r) Γ(m))`
///
/// For `r = 0` these reduce to `E S_{k+1}² = E S_k² (1 + 2(2p-1)/k) + 1`.
pub fn full_memory_moments(params: &WalkParams, m: u64) -> Result<MomentReport> {
    if m == 0 {
        return Err(Error::Contract("moments requested at time 0".into()));
    }
    let a = params.drift();
    let b = params.activity();
    let mf = m as f64;

    let mean_sn = params.first_step_mean() * (log_gamma_ratio(mf + a, mf)? - ln_gamma(1.0 + a)?).exp();

    let mut second = params.first_step_activity();
    let mut nonzero = params.first_step_activity();
    for k in 1..m {
        let kf = k as f64;
        second = second * (1.0 + 2.0 * a / kf) + b * nonzero / kf;
        nonzero *= 1.0 + b / kf;
    }

    let mean_nstar = if params.is_delayed() {
        let r = params.r();
        (log_gamma_ratio(mf + 1.0 - r, mf)? - ln_gamma(1.0 - r)?).exp()
    } else {
        mf
    };

    Ok(MomentReport { n: m, m, mean_sn, second_sn: second, mean_nstar })
}

/// Exact moments at time `n` of the two-epoch walk: full memory up to time
/// `m`, memory frozen at `{1..m}` for steps `m+1..n`.
///
/// Given the first `m` steps, the later steps are i.i.d. with mean
/// `a S_m/m` and second moment `b N*_m/m`, hence with `d = n - m`
///
/// ```text
/// E S_n  = E S_m (m + a d) / m
/// E S_n² = E S_m²/m² · (m² + 2amd + a² d(d-1)) + d b E N*_m / m
/// ```
pub fn two_epoch_moments(params: &WalkParams, m: u64, n: u64) -> Result<MomentReport> {
    if m == 0 || m > n {
        return Err(Error::Contract(format!("two-epoch moments need 1 <= m <= n (m={m}, n={n})")));
    }
    let head = full_memory_moments(params, m)?;
    let a = params.drift();
    let b = params.activity();
    let mf = m as f64;
    let d = (n - m) as f64;

    let mean_sn = head.mean_sn * (mf + a * d) / mf;
    let second_sn = head.second_sn / (mf * mf) * (mf * mf + 2.0 * a * mf * d + a * a * d * (d - 1.0))
        + d * b * head.mean_nstar / mf;
    let mean_nstar = head.mean_nstar * (1.0 + b * d / mf);
    Ok(MomentReport { n, m, mean_sn, second_sn, mean_nstar })
}

/// Two-epoch moments at horizon `n` with `m = m_n` taken from an
/// initial-block schedule (`Full` gives `m = n`).
pub fn exact_moments_increasing(
    params: &WalkParams,
    schedule: &MemorySchedule,
    n: u64,
) -> Result<MomentReport> {
    if n == 0 {
        return Err(Error::Contract("moments requested at time 0".into()));
    }
    if !schedule.is_initial_block() {
        return Err(Error::Contract(format!(
            "closed-form moments need a memory of the form {{1..m}}, got {schedule}"
        )));
    }
    two_epoch_moments(params, schedule.memory_size(n), n)
}

/// `E N*_n = Γ(m+1-r) / (Γ(1-r) Γ(m+1)) · (n(1-r) + mr)` for the two-epoch walk.
pub fn exact_mean_nonzeros(params: &WalkParams, m: u64, n: u64) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::Contract(format!("need 1 <= m <= n (m={m}, n={n})")));
    }
    if !params.is_delayed() {
        return Ok(n as f64);
    }
    let r = params.r();
    let (mf, nf) = (m as f64, n as f64);
    let ratio = (log_gamma_ratio(mf + 1.0 - r, mf + 1.0)? - ln_gamma(1.0 - r)?).exp();
    Ok(ratio * (nf * (1.0 - r) + mf * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate::enumerate_pmf;
    use crate::walk::Growth;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn first_time_step() {
        for p in [0.2, 0.5, 0.75, 0.9] {
            let (m1, s1) = exact_moments_full(p, 1).unwrap();
            assert!(close(m1, 2.0 * p - 1.0, 1e-14));
            assert_eq!(s1, 1.0);
        }
    }

    #[test]
    fn gamma_mean_at_two() {
        // 0.5 · Γ(2.5) / (Γ(2) Γ(1.5)) = 0.5 · 1.5
        let (m2, _) = exact_moments_full(0.75, 2).unwrap();
        assert!(close(m2, 0.75, 1e-14));
    }

    #[test]
    fn full_memory_matches_enumeration() {
        for p in [0.3, 0.5, 0.6, 0.7, 0.75, 0.9] {
            let w = WalkParams::new(p).unwrap();
            for m in 1..=12 {
                let pmf = enumerate_pmf(w, MemorySchedule::Full, m).unwrap();
                let (mean, second) = exact_moments_full(p, m).unwrap();
                assert!(close(mean, pmf.mean(), 1e-10), "p={p} m={m}");
                assert!(close(second, pmf.second_moment(), 1e-10), "p={p} m={m}");
            }
        }
    }

    #[test]
    fn delayed_full_memory_matches_enumeration() {
        let w = WalkParams::delayed(0.5, 0.2, 0.3).unwrap();
        for m in 1..=9 {
            let pmf = enumerate_pmf(w, MemorySchedule::Full, m).unwrap();
            let r = full_memory_moments(&w, m).unwrap();
            assert!(close(r.mean_sn, pmf.mean(), 1e-12), "m={m}");
            assert!(close(r.second_sn, pmf.second_moment(), 1e-12), "m={m}");
            assert!(close(r.mean_nstar, pmf.mean_nonzeros(), 1e-12), "m={m}");
        }
    }

    #[test]
    fn two_epoch_matches_frozen_enumeration() {
        for (p, q, r) in [(0.7, 0.3, 0.0), (0.9, 0.1, 0.0), (0.5, 0.2, 0.3), (0.75, 0.05, 0.2)] {
            let w = WalkParams::delayed(p, q, r).unwrap();
            let n = if r > 0.0 { 9 } else { 10 };
            for m in [1, 2, 3, 5] {
                let frozen = MemorySchedule::first_fixed(m).unwrap();
                let pmf = enumerate_pmf(w, frozen, n).unwrap();
                let rep = two_epoch_moments(&w, m, n).unwrap();
                assert!(close(rep.mean_sn, pmf.mean(), 1e-10), "{p},{q},{r} m={m}");
                assert!(close(rep.second_sn, pmf.second_moment(), 1e-10), "{p},{q},{r} m={m}");
                assert!(close(rep.mean_nstar, pmf.mean_nonzeros(), 1e-10), "{p},{q},{r} m={m}");
                assert!(close(exact_mean_nonzeros(&w, m, n).unwrap(), rep.mean_nstar, 1e-12));
            }
        }
    }

    #[test]
    fn m_equal_n_reduces_to_full_memory() {
        let w = WalkParams::new(0.65).unwrap();
        for n in [1, 5, 40, 1000] {
            let a = two_epoch_moments(&w, n, n).unwrap();
            let b = full_memory_moments(&w, n).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn increasing_schedule_contract() {
        let w = WalkParams::new(0.6).unwrap();
        let g = Growth::default();
        let rep = exact_moments_increasing(&w, &MemorySchedule::first_increasing(g), 10_000).unwrap();
        assert_eq!(rep.m, 100);
        let last = MemorySchedule::last_fixed(3).unwrap();
        assert!(matches!(exact_moments_increasing(&w, &last, 100), Err(Error::Contract(_))));
        let recent = MemorySchedule::first_increasing_plus_recent(g, 1).unwrap();
        assert!(exact_moments_increasing(&w, &recent, 100).is_err());
    }

    #[test]
    fn nonzero_mean_examples() {
        let w = WalkParams::delayed(0.3, 0.2, 0.5).unwrap();
        assert!(close(exact_mean_nonzeros(&w, 1, 1).unwrap(), 0.5, 1e-14));
        assert!(close(exact_mean_nonzeros(&w, 2, 2).unwrap(), 0.75, 1e-14));
        let classic = WalkParams::new(0.6).unwrap();
        assert_eq!(exact_mean_nonzeros(&classic, 3, 17).unwrap(), 17.0);
        assert!(exact_mean_nonzeros(&w, 0, 3).is_err());
        assert!(exact_mean_nonzeros(&w, 4, 3).is_err());
    }

    #[test]
    fn one_step_mean_identity_on_enumerated_laws() {
        // E S_{n+1} - E S_n = (2p-1) E S_{m_n} / m_n for a growing first block.
        let g = Growth::default();
        let s = MemorySchedule::first_increasing(g);
        for p in [0.3, 0.8] {
            let w = WalkParams::new(p).unwrap();
            let means: Vec<f64> =
                (1..=12).map(|n| enumerate_pmf(w, s, n).unwrap().mean()).collect();
            for n in 1..12u64 {
                let m = g.memory_size(n);
                let lhs = means[n as usize] - means[n as usize - 1];
                let rhs = (2.0 * p - 1.0) * means[m as usize - 1] / m as f64;
                assert!((lhs - rhs).abs() < 1e-12, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn symmetric_walk_is_diffusive_exactly() {
        let w = WalkParams::new(0.5).unwrap();
        let rep = two_epoch_moments(&w, 100, 10_000).unwrap();
        assert!(rep.mean_sn.abs() < 1e-15);
        assert!(close(rep.second_sn, 10_000.0, 1e-12));
    }

    #[test]
    fn delayed_reduces_to_classic_at_r_zero() {
        let a = WalkParams::new(0.7).unwrap();
        let b = WalkParams::delayed(0.7, 0.3, 0.0).unwrap();
        let (x, y) = (two_epoch_moments(&a, 30, 500).unwrap(), two_epoch_moments(&b, 30, 500).unwrap());
        assert!(close(x.mean_sn, y.mean_sn, 1e-13));
        assert!(close(x.second_sn, y.second_sn, 1e-13));
        assert_eq!(x.mean_nstar, y.mean_nstar);
    }

    proptest::proptest! {
        #[test]
        fn moment_report_invariants(p in 0.05f64..0.95, r in 0.0f64..0.8, m in 1u64..400, extra in 0u64..4000) {
            let q = 1.0 - p - r;
            proptest::prop_assume!(q >= 0.0);
            let w = WalkParams::delayed(p, q, r).unwrap();
            let rep = two_epoch_moments(&w, m, m + extra).unwrap();
            proptest::prop_assert!(rep.variance_sn() >= -1e-9 * rep.second_sn.max(1.0));
            proptest::prop_assert!(rep.mean_nstar >= 0.0 && rep.mean_nstar <= (m + extra) as f64 * (1.0 + 1e-12));
        }
    }
}
