use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::walk::{
    binary_plus_probability, first_step_law, memory_view, step_distribution, MemorySchedule,
    PathHistory, PrefixHistory, WalkParams,
};
use crate::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Horizon caps for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationLimits {
    /// Cap for non-delayed walks (2^n paths).
    pub binary: u64,
    /// Cap for delayed walks (3^n paths).
    pub ternary: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self { binary: 16, ternary: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfPoint {
    pub s: i64,
    pub nstar: u64,
    pub mass: f64,
}

/// Exact joint law of `(S_n, N*_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPmf {
    pub n: u64,
    pub params: WalkParams,
    pub schedule: MemorySchedule,
    /// Support points sorted by `(s, nstar)`.
    pub points: Vec<PmfPoint>,
}

impl ExactPmf {
    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.mass).collect::<CompensatedSum>().value()
    }

    /// `E S_n`
    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.s as f64 * p.mass).collect::<CompensatedSum>().value()
    }

    /// `E S_n²`
    pub fn second_moment(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.s * p.s) as f64 * p.mass)
            .collect::<CompensatedSum>()
            .value()
    }

    /// `E N*_n`
    pub fn mean_nonzeros(&self) -> f64 {
        self.points.iter().map(|p| p.nstar as f64 * p.mass).collect::<CompensatedSum>().value()
    }

    /// Marginal law of `S_n`, sorted by value.
    pub fn position_marginal(&self) -> Vec<(i64, f64)> {
        let mut acc: BTreeMap<i64, CompensatedSum> = BTreeMap::new();
        for p in &self.points {
            acc.entry(p.s).or_default().add(p.mass);
        }
        acc.into_iter().map(|(s, m)| (s, m.value())).collect()
    }

    /// CSV with a `#` header line naming the parameters, schedule and horizon.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let w = &self.params;
        let _ = writeln!(
            out,
            "# p={} q={} r={} s={} schedule={} n={}",
            w.p(),
            w.q(),
            w.r(),
            w.s(),
            self.schedule,
            self.n
        );
        out.push_str("s,nstar,mass\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{:.17e}", p.s, p.nstar, p.mass);
        }
        out
    }
}

struct Enumerator<'a, F> {
    schedule: &'a MemorySchedule,
    horizon: u64,
    law: F,
    history: PathHistory,
    masses: BTreeMap<(i64, u64), CompensatedSum>,
}

impl<F> Enumerator<'_, F>
where
    F: Fn(&PathHistory, &MemorySchedule) -> Result<[(i8, f64); 3]>,
{
    fn descend(&mut self, weight: f64) -> Result<()> {
        if self.history.len() == self.horizon {
            let cur = self.history.current();
            self.masses.entry((cur.sum, cur.nonzero)).or_default().add(weight);
            return Ok(());
        }
        for (x, w) in (self.law)(&self.history, self.schedule)? {
            if w <= 0.0 {
                continue;
            }
            self.history.push(x);
            self.descend(weight * w)?;
            self.history.pop();
        }
        Ok(())
    }
}

fn run_enumeration<F>(
    params: WalkParams,
    schedule: MemorySchedule,
    n: u64,
    law: F,
) -> Result<ExactPmf>
where
    F: Fn(&PathHistory, &MemorySchedule) -> Result<[(i8, f64); 3]>,
{
    let mut e = Enumerator {
        schedule: &schedule,
        horizon: n,
        law,
        history: PathHistory::new(),
        masses: BTreeMap::new(),
    };
    e.descend(1.0)?;
    let points = e
        .masses
        .into_iter()
        .map(|((s, nstar), m)| PmfPoint { s, nstar, mass: m.value() })
        .collect();
    Ok(ExactPmf { n, params, schedule, points })
}

fn check_horizon(params: &WalkParams, n: u64, limits: EnumerationLimits) -> Result<()> {
    if n == 0 {
        return Err(Error::Contract("enumeration horizon must be at least 1".into()));
    }
    let cap = if params.is_delayed() { limits.ternary } else { limits.binary };
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    Ok(())
}

/// Exact law of `(S_n, N*_n)` by summing the probabilities of all paths of length `n`.
pub fn enumerate_pmf(params: WalkParams, schedule: MemorySchedule, n: u64) -> Result<ExactPmf> {
    enumerate_pmf_with_limits(params, schedule, n, EnumerationLimits::default())
}

pub fn enumerate_pmf_with_limits(
    params: WalkParams,
    schedule: MemorySchedule,
    n: u64,
    limits: EnumerationLimits,
) -> Result<ExactPmf> {
    check_horizon(&params, n, limits)?;
    run_enumeration(params, schedule, n, |h, s| {
        let law = if h.is_empty() {
            first_step_law(&params)
        } else {
            step_distribution(&params, &memory_view(h, s, h.len())?)?
        };
        Ok([(1, law.plus), (0, law.zero), (-1, law.minus)])
    })
}

/// Enumeration of a non-delayed walk through the binary form
/// `P(+1) = (1 + (2p-1)·sum/size)/2`, independent of the ternary step law.
pub fn enumerate_pmf_binary(params: WalkParams, schedule: MemorySchedule, n: u64) -> Result<ExactPmf> {
    if params.is_delayed() {
        return Err(Error::Contract("binary enumeration requires r = 0".into()));
    }
    check_horizon(&params, n, EnumerationLimits::default())?;
    let p = params.p();
    let s = params.s();
    run_enumeration(params, schedule, n, |h, sched| {
        let plus = if h.is_empty() {
            s
        } else {
            binary_plus_probability(p, &memory_view(h, sched, h.len())?)
        };
        Ok([(1, plus), (0, 0.0), (-1, 1.0 - plus)])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::Growth;

    fn mass_at(pmf: &ExactPmf, s: i64) -> f64 {
        pmf.position_marginal().into_iter().find(|&(v, _)| v == s).map_or(0.0, |(_, m)| m)
    }

    #[test]
    fn one_and_two_steps() {
        let w = WalkParams::new(0.7).unwrap();
        let one = enumerate_pmf(w, MemorySchedule::Full, 1).unwrap();
        assert!((mass_at(&one, 1) - 0.7).abs() < 1e-15);
        assert!((mass_at(&one, -1) - 0.3).abs() < 1e-15);

        let two = enumerate_pmf(w, MemorySchedule::Full, 2).unwrap();
        assert!((mass_at(&two, 2) - 0.49).abs() < 1e-15);
        // (+,-) and (-,+): 0.7·0.3 + 0.3·0.3
        assert!((mass_at(&two, 0) - 0.30).abs() < 1e-15);
        assert!((mass_at(&two, -2) - 0.21).abs() < 1e-15);
    }

    #[test]
    fn delayed_first_step() {
        let w = WalkParams::delayed(0.5, 0.2, 0.3).unwrap();
        let one = enumerate_pmf(w, MemorySchedule::Full, 1).unwrap();
        assert_eq!(one.points.len(), 3);
        assert!((mass_at(&one, 1) - 0.5).abs() < 1e-15);
        assert!((mass_at(&one, 0) - 0.3).abs() < 1e-15);
        assert!((mass_at(&one, -1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn all_plus_path_mass() {
        // s · p^{n-1}: the all-(+1) path always repeats a +1.
        let w = WalkParams::new(0.7).unwrap();
        let pmf = enumerate_pmf(w, MemorySchedule::Full, 3).unwrap();
        assert!((mass_at(&pmf, 3) - 0.343).abs() < 1e-15);
    }

    #[test]
    fn caps_are_enforced() {
        let w = WalkParams::new(0.6).unwrap();
        assert_eq!(
            enumerate_pmf(w, MemorySchedule::Full, 17).unwrap_err(),
            Error::EnumerationCap { n: 17, cap: 16 }
        );
        let d = WalkParams::delayed(0.5, 0.2, 0.3).unwrap();
        assert!(matches!(enumerate_pmf(d, MemorySchedule::Full, 11), Err(Error::EnumerationCap { .. })));
        let wide = EnumerationLimits { binary: 18, ternary: 11 };
        assert!(enumerate_pmf_with_limits(d, MemorySchedule::Full, 11, wide).is_ok());
        assert!(enumerate_pmf(w, MemorySchedule::Full, 0).is_err());
    }

    #[test]
    fn delayed_invariants() {
        let w = WalkParams::delayed(0.5, 0.2, 0.3).unwrap();
        let pmf = enumerate_pmf(w, MemorySchedule::first_increasing(Growth::default()), 8).unwrap();
        assert!((pmf.total_mass() - 1.0).abs() < 1e-12);
        assert!(pmf.points.iter().all(|p| p.mass >= 0.0 && p.s.unsigned_abs() <= p.nstar));
        // The all-zero path has mass r exactly.
        let zero = pmf.points.iter().find(|p| p.nstar == 0).unwrap();
        assert!((zero.mass - 0.3).abs() < 1e-15);
    }

    #[test]
    fn binary_and_ternary_routes_agree() {
        let g = Growth::default();
        let schedules = [
            MemorySchedule::Full,
            MemorySchedule::first_increasing(g),
            MemorySchedule::first_increasing_plus_recent(g, 1).unwrap(),
            MemorySchedule::last_fixed(3).unwrap(),
        ];
        for p in [0.3, 0.7, 0.9] {
            let w = WalkParams::new(p).unwrap();
            for s in schedules {
                let a = enumerate_pmf(w, s, 12).unwrap();
                let b = enumerate_pmf_binary(w, s, 12).unwrap();
                assert_eq!(a.points.len(), b.points.len());
                for (x, y) in a.points.iter().zip(&b.points) {
                    assert_eq!((x.s, x.nstar), (y.s, y.nstar));
                    assert!((x.mass - y.mass).abs() < 1e-14, "p={p} {s}: {x:?} vs {y:?}");
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let w = WalkParams::new(0.7).unwrap();
        let csv = enumerate_pmf(w, MemorySchedule::Full, 2).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# p=0.7"));
        assert!(lines[0].contains("schedule=full") && lines[0].ends_with("n=2"));
        assert_eq!(lines[1], "s,nstar,mass");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("-2,2,"));
    }
}
