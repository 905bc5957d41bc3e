use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Growth rule `g(n)` for a memory block whose size increases with time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Growth {
    /// `c * n^beta`, `0 < beta <= 1`.
    Power { c: f64, beta: f64 },
    /// `c * ln n`.
    Log { c: f64 },
}

impl Default for Growth {
    fn default() -> Self {
        Growth::Power { c: 1.0, beta: 0.5 }
    }
}

impl Growth {
    pub fn power(c: f64, beta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidSchedule(format!("growth constant c={c} must be > 0")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidSchedule(format!("beta={beta} violates 0<beta<=1")));
        }
        Ok(Growth::Power { c, beta })
    }

    pub fn log(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidSchedule(format!("growth constant c={c} must be > 0")));
        }
        Ok(Growth::Log { c })
    }

    /// Unclipped value `g(n)`.
    pub fn raw(&self, n: u64) -> f64 {
        let x = n as f64;
        match *self {
            Growth::Power { c, beta: 0.5 } => c * x.sqrt(),
            Growth::Power { c, beta: 1.0 } => c * x,
            Growth::Power { c, beta } => c * x.powf(beta),
            Growth::Log { c } => c * x.ln(),
        }
    }

    /// `m_n = min(n, max(1, floor(g(n))))`.
    pub fn memory_size(&self, n: u64) -> u64 {
        // Integer values of g(n) must not floor to g(n)-1 after pow round-off.
        let g = self.raw(n);
        let g = (g * (1.0 + 4.0 * f64::EPSILON)).floor();
        let g = if g.is_finite() && g >= 1.0 { g as u64 } else { 1 };
        g.clamp(1, n.max(1))
    }
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Power { c, beta } => write!(f, "{c}*n^{beta}"),
            Growth::Log { c } => write!(f, "{c}*ln(n)"),
        }
    }
}

/// Size of a memory block: a fixed count or a growth rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSize {
    Fixed(u64),
    Growing(Growth),
}

impl BlockSize {
    /// Block size at time `n`, clipped to `1..=n`.
    pub fn at(&self, n: u64) -> u64 {
        match self {
            BlockSize::Fixed(m) => (*m).clamp(1, n.max(1)),
            BlockSize::Growing(g) => g.memory_size(n),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BlockSize::Fixed(0) => Err(Error::InvalidSchedule("memory size must be >= 1".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BlockSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockSize::Fixed(m) => write!(f, "{m}"),
            BlockSize::Growing(g) => write!(f, "{g}"),
        }
    }
}

/// Which past indices the walker remembers at time `n`.
///
/// | variant | memory set `M_n` |
/// |---|---|
/// | `Full` | `{1..n}` |
/// | `First(b)` | `{1..b_n}` |
/// | `FirstPlusRecent(b, k)` | `{1..b_n} ∪ {n-k_n+1..n}` |
/// | `Last(w)` | `{n-w_n+1..n}` |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum MemorySchedule {
    Full,
    First { first: BlockSize },
    FirstPlusRecent { first: BlockSize, recent: BlockSize },
    Last { window: BlockSize },
}

/// Inclusive, 1-based index interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: u64,
    pub hi: u64,
}

impl IndexRange {
    pub fn len(&self) -> u64 {
        self.hi + 1 - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

impl MemorySchedule {
    pub fn full() -> Self {
        MemorySchedule::Full
    }

    pub fn first_fixed(m: u64) -> Result<Self> {
        Self::checked(MemorySchedule::First { first: BlockSize::Fixed(m) })
    }

    pub fn first_increasing(growth: Growth) -> Self {
        MemorySchedule::First { first: BlockSize::Growing(growth) }
    }

    pub fn first_increasing_plus_recent(growth: Growth, k: u64) -> Result<Self> {
        Self::checked(MemorySchedule::FirstPlusRecent {
            first: BlockSize::Growing(growth),
            recent: BlockSize::Fixed(k),
        })
    }

    /// Recent block of size `k_n` given by its own growth rule (probe only).
    pub fn first_increasing_plus_growing_recent(growth: Growth, recent: Growth) -> Self {
        MemorySchedule::FirstPlusRecent {
            first: BlockSize::Growing(growth),
            recent: BlockSize::Growing(recent),
        }
    }

    pub fn last_fixed(m: u64) -> Result<Self> {
        Self::checked(MemorySchedule::Last { window: BlockSize::Fixed(m) })
    }

    pub fn last_increasing(growth: Growth) -> Self {
        MemorySchedule::Last { window: BlockSize::Growing(growth) }
    }

    fn checked(s: Self) -> Result<Self> {
        match &s {
            MemorySchedule::Full => {}
            MemorySchedule::First { first } => first.validate()?,
            MemorySchedule::FirstPlusRecent { first, recent } => {
                first.validate()?;
                recent.validate()?;
            }
            MemorySchedule::Last { window } => window.validate()?,
        }
        Ok(s)
    }

    /// Short variant name used in reports.
    pub fn variant_name(&self) -> &'static str {
        match self {
            MemorySchedule::Full => "full",
            MemorySchedule::First { first: BlockSize::Fixed(_) } => "first-fixed",
            MemorySchedule::First { .. } => "first-increasing",
            MemorySchedule::FirstPlusRecent { .. } => "first-increasing-plus-recent",
            MemorySchedule::Last { window: BlockSize::Fixed(_) } => "last-fixed",
            MemorySchedule::Last { .. } => "last-increasing",
        }
    }

    /// True for schedules whose memory is an initial block `{1..m}`.
    pub fn is_initial_block(&self) -> bool {
        matches!(self, MemorySchedule::Full | MemorySchedule::First { .. })
    }

    /// The characteristic memory size `m_n` reported alongside statistics:
    /// the first block for `First*`, the window for `Last*`, `n` for `Full`.
    pub fn memory_size(&self, n: u64) -> u64 {
        match self {
            MemorySchedule::Full => n,
            MemorySchedule::First { first } | MemorySchedule::FirstPlusRecent { first, .. } => {
                first.at(n)
            }
            MemorySchedule::Last { window } => window.at(n),
        }
    }

    /// The remembered index set at time `n >= 1` as at most two disjoint intervals.
    pub fn ranges(&self, n: u64) -> (IndexRange, Option<IndexRange>) {
        debug_assert!(n >= 1);
        match self {
            MemorySchedule::Full => (IndexRange { lo: 1, hi: n }, None),
            MemorySchedule::First { first } => (IndexRange { lo: 1, hi: first.at(n) }, None),
            MemorySchedule::FirstPlusRecent { first, recent } => {
                let m = first.at(n);
                let k = recent.at(n);
                let lo = (m + 1).max(n + 1 - k);
                let head = IndexRange { lo: 1, hi: m };
                if lo <= n {
                    (head, Some(IndexRange { lo, hi: n }))
                } else {
                    (head, None)
                }
            }
            MemorySchedule::Last { window } => {
                let w = window.at(n);
                (IndexRange { lo: n + 1 - w, hi: n }, None)
            }
        }
    }

    /// Number of leading prefix entries a simulation up to `n_max` must keep.
    pub fn head_capacity(&self, n_max: u64) -> u64 {
        match self {
            MemorySchedule::First { first } | MemorySchedule::FirstPlusRecent { first, .. } => {
                first.at(n_max.max(1))
            }
            MemorySchedule::Full | MemorySchedule::Last { .. } => 0,
        }
    }

    /// Number of trailing steps a simulation up to `n_max` must keep.
    pub fn tail_capacity(&self, n_max: u64) -> u64 {
        let n = n_max.max(1);
        match self {
            // Block sizes are nondecreasing in n.
            MemorySchedule::FirstPlusRecent { recent, .. } => recent.at(n),
            MemorySchedule::Last { window } => window.at(n),
            MemorySchedule::Full | MemorySchedule::First { .. } => 0,
        }
    }

    /// The triangular-array version of this schedule at horizon `n`: every
    /// growing first block is frozen at its size `m_n`. The resulting walk has
    /// full memory up to time `m_n` and remembers `{1..m_n}` afterwards.
    pub fn frozen_at(&self, n: u64) -> Self {
        match *self {
            MemorySchedule::First { first } => MemorySchedule::First {
                first: BlockSize::Fixed(first.at(n)),
            },
            MemorySchedule::FirstPlusRecent { first, recent } => MemorySchedule::FirstPlusRecent {
                first: BlockSize::Fixed(first.at(n)),
                recent,
            },
            other => other,
        }
    }
}

impl fmt::Display for MemorySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemorySchedule::Full => write!(f, "full"),
            MemorySchedule::First { first } => write!(f, "{}({first})", self.variant_name()),
            MemorySchedule::FirstPlusRecent { first, recent } => {
                write!(f, "{}({first},k={recent})", self.variant_name())
            }
            MemorySchedule::Last { window } => write!(f, "{}({window})", self.variant_name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_growth_clipping() {
        let g = Growth::default();
        assert_eq!(g.memory_size(1), 1);
        assert_eq!(g.memory_size(3), 1);
        assert_eq!(g.memory_size(4), 2);
        assert_eq!(g.memory_size(9), 3);
        assert_eq!(g.memory_size(10_000), 100);
        assert_eq!(g.memory_size(1_000_000), 1000);
        assert_eq!(g.memory_size(100_000_000), 10_000);
    }

    #[test]
    fn power_growth_floors_exact_powers() {
        let g = Growth::power(1.0, 0.6).unwrap();
        // 10^6^0.6 = 10^3.6 = 3981.07...
        assert_eq!(g.memory_size(1_000_000), 3981);
        let half = Growth::power(0.5, 1.0).unwrap();
        assert_eq!(half.memory_size(100_000), 50_000);
        assert_eq!(half.memory_size(1), 1);
    }

    #[test]
    fn log_growth_starts_at_one() {
        let g = Growth::log(1.0).unwrap();
        assert_eq!(g.memory_size(1), 1);
        assert_eq!(g.memory_size(2), 1);
        assert_eq!(g.memory_size(100), 4);
    }

    #[test]
    fn growth_validation() {
        assert!(Growth::power(1.0, 0.0).is_err());
        assert!(Growth::power(1.0, 1.5).is_err());
        assert!(Growth::power(0.0, 0.5).is_err());
        assert!(Growth::log(-1.0).is_err());
        assert!(MemorySchedule::first_fixed(0).is_err());
        assert!(MemorySchedule::last_fixed(0).is_err());
    }

    #[test]
    fn ranges_per_variant() {
        let g = Growth::default();
        let s = MemorySchedule::first_increasing_plus_recent(g, 1).unwrap();
        let (a, b) = s.ranges(9);
        assert_eq!(a, IndexRange { lo: 1, hi: 3 });
        assert_eq!(b, Some(IndexRange { lo: 9, hi: 9 }));
        // At n=1 the recent index coincides with the first block.
        assert_eq!(s.ranges(1), (IndexRange { lo: 1, hi: 1 }, None));

        let s = MemorySchedule::last_fixed(2).unwrap();
        assert_eq!(s.ranges(5).0, IndexRange { lo: 4, hi: 5 });
        assert_eq!(s.ranges(1).0, IndexRange { lo: 1, hi: 1 });

        let s = MemorySchedule::first_fixed(3).unwrap();
        assert_eq!(s.ranges(2).0, IndexRange { lo: 1, hi: 2 });
        assert_eq!(s.ranges(20).0, IndexRange { lo: 1, hi: 3 });
    }

    #[test]
    fn frozen_schedule() {
        let s = MemorySchedule::first_increasing(Growth::default()).frozen_at(10_000);
        assert_eq!(s, MemorySchedule::first_fixed(100).unwrap());
        assert_eq!(MemorySchedule::Full.frozen_at(7), MemorySchedule::Full);
    }

    #[test]
    fn capacities() {
        let s = MemorySchedule::first_increasing_plus_recent(Growth::default(), 2).unwrap();
        assert_eq!(s.head_capacity(10_000), 100);
        assert_eq!(s.tail_capacity(10_000), 2);
        let s = MemorySchedule::last_increasing(Growth::default());
        assert_eq!(s.tail_capacity(400), 20);
    }

    proptest::proptest! {
        #[test]
        fn memory_size_is_monotone_and_bounded(c in 0.05f64..4.0, beta in 0.05f64..=1.0, n in 1u64..200_000) {
            let g = Growth::power(c, beta).unwrap();
            let a = g.memory_size(n);
            let b = g.memory_size(n + 1);
            proptest::prop_assert!(1 <= a && a <= n);
            proptest::prop_assert!(a <= b);
        }
    }
}
