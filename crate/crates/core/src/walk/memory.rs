use serde::{Deserialize, Serialize};

use super::schedule::{IndexRange, MemorySchedule};
use crate::{Error, Result};

/// Prefix statistics of `X_1..X_i`: the position `S_i` and the nonzero count `N*_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Prefix {
    pub sum: i64,
    pub nonzero: u64,
}

impl Prefix {
    fn push(self, step: i8) -> Self {
        Prefix {
            sum: self.sum + step as i64,
            nonzero: self.nonzero + (step != 0) as u64,
        }
    }
}

/// Read access to prefix sums of a step sequence.
pub trait PrefixHistory {
    /// Number of recorded steps.
    fn len(&self) -> u64;

    /// Prefix statistics after `i` steps, `0 <= i <= len()`.
    fn prefix(&self, i: u64) -> Prefix;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Complete prefix table of a path; used by enumeration and tests.
#[derive(Debug, Clone)]
pub struct PathHistory {
    prefixes: Vec<Prefix>,
}

impl Default for PathHistory {
    fn default() -> Self {
        Self::new()
    }
}

impl PathHistory {
    pub fn new() -> Self {
        Self { prefixes: vec![Prefix::default()] }
    }

    pub fn from_steps(steps: &[i8]) -> Self {
        let mut h = Self::new();
        for &x in steps {
            h.push(x);
        }
        h
    }

    pub fn push(&mut self, step: i8) {
        debug_assert!((-1..=1).contains(&step));
        let last = *self.prefixes.last().expect("prefix table is never empty");
        self.prefixes.push(last.push(step));
    }

    pub fn pop(&mut self) {
        if self.prefixes.len() > 1 {
            self.prefixes.pop();
        }
    }

    pub fn current(&self) -> Prefix {
        *self.prefixes.last().expect("prefix table is never empty")
    }
}

impl PrefixHistory for PathHistory {
    fn len(&self) -> u64 {
        (self.prefixes.len() - 1) as u64
    }

    fn prefix(&self, i: u64) -> Prefix {
        self.prefixes[i as usize]
    }
}

/// Bounded prefix store for simulation.
///
/// Keeps prefix entries `0..=head` (the first block a `First*` schedule can
/// ever reach) and a ring of the last `tail + 1` entries (recent / window
/// blocks), so a step costs O(1) time and the memory footprint does not grow
/// with the horizon.
#[derive(Debug, Clone)]
pub struct StepStore {
    head: Vec<Prefix>,
    head_cap: u64,
    ring: Vec<Prefix>,
    mask: u64,
    len: u64,
    current: Prefix,
}

impl StepStore {
    pub fn new(head_cap: u64, tail_cap: u64) -> Self {
        let ring_len = (tail_cap + 1).next_power_of_two();
        let mut store = Self {
            head: Vec::with_capacity(head_cap as usize + 1),
            head_cap,
            ring: vec![Prefix::default(); ring_len as usize],
            mask: ring_len - 1,
            len: 0,
            current: Prefix::default(),
        };
        store.head.push(Prefix::default());
        store
    }

    /// Store sized for `schedule` up to horizon `n_max`.
    pub fn for_schedule(schedule: &MemorySchedule, n_max: u64) -> Self {
        Self::new(schedule.head_capacity(n_max), schedule.tail_capacity(n_max))
    }

    pub fn clear(&mut self) {
        self.head.truncate(1);
        self.len = 0;
        self.current = Prefix::default();
        self.ring[0] = Prefix::default();
    }

    #[inline]
    pub fn push(&mut self, step: i8) {
        self.current = self.current.push(step);
        self.len += 1;
        if self.len <= self.head_cap {
            self.head.push(self.current);
        }
        self.ring[(self.len & self.mask) as usize] = self.current;
    }

    #[inline]
    pub fn current(&self) -> Prefix {
        self.current
    }
}

impl PrefixHistory for StepStore {
    #[inline]
    fn len(&self) -> u64 {
        self.len
    }

    #[inline]
    fn prefix(&self, i: u64) -> Prefix {
        if i == self.len {
            self.current
        } else if i <= self.head_cap {
            self.head[i as usize]
        } else {
            debug_assert!(self.len - i <= self.mask, "prefix {i} evicted from the ring");
            self.ring[(i & self.mask) as usize]
        }
    }
}

/// Sufficient statistics of the remembered steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryView {
    /// `|M_n|`
    pub size: u64,
    /// Sum of the remembered steps.
    pub sum: i64,
    /// Number of remembered nonzero steps.
    pub nonzero: u64,
}

impl MemoryView {
    pub fn new(size: u64, sum: i64, nonzero: u64) -> Result<Self> {
        let v = Self { size, sum, nonzero };
        if !v.is_consistent() {
            return Err(Error::Contract(format!(
                "inconsistent memory view (size={size}, sum={sum}, nonzero={nonzero})"
            )));
        }
        Ok(v)
    }

    /// `|sum| <= nonzero <= size` and `sum ≡ nonzero (mod 2)`.
    pub fn is_consistent(&self) -> bool {
        self.sum.unsigned_abs() <= self.nonzero
            && self.nonzero <= self.size
            && (self.sum - self.nonzero as i64).rem_euclid(2) == 0
    }

    /// Remembered `+1` steps.
    pub fn plus(&self) -> u64 {
        ((self.nonzero as i64 + self.sum) / 2) as u64
    }

    /// Remembered `-1` steps.
    pub fn minus(&self) -> u64 {
        ((self.nonzero as i64 - self.sum) / 2) as u64
    }

    pub fn zeros(&self) -> u64 {
        self.size - self.nonzero
    }
}

#[inline]
fn range_stats<H: PrefixHistory + ?Sized>(history: &H, range: IndexRange) -> (u64, i64, u64) {
    let hi = history.prefix(range.hi);
    let lo = history.prefix(range.lo - 1);
    (range.len(), hi.sum - lo.sum, hi.nonzero - lo.nonzero)
}

/// Statistics of the memory set `M_n` of `schedule` at time `n`.
#[inline]
pub fn memory_view<H: PrefixHistory + ?Sized>(
    history: &H,
    schedule: &MemorySchedule,
    n: u64,
) -> Result<MemoryView> {
    if n == 0 {
        return Err(Error::Contract("memory view requested at n=0".into()));
    }
    if n > history.len() {
        return Err(Error::Contract(format!(
            "memory view at n={n} but only {} steps recorded",
            history.len()
        )));
    }
    Ok(memory_view_unchecked(history, schedule, n))
}

#[inline]
pub(crate) fn memory_view_unchecked<H: PrefixHistory + ?Sized>(
    history: &H,
    schedule: &MemorySchedule,
    n: u64,
) -> MemoryView {
    let (a, b) = schedule.ranges(n);
    let (mut size, mut sum, mut nonzero) = range_stats(history, a);
    if let Some(b) = b {
        let (s2, sum2, nz2) = range_stats(history, b);
        size += s2;
        sum += sum2;
        nonzero += nz2;
    }
    MemoryView { size, sum, nonzero }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::schedule::Growth;

    #[test]
    fn first_increasing_all_ones() {
        let h = PathHistory::from_steps(&[1; 9]);
        let s = MemorySchedule::first_increasing(Growth::default());
        let v = memory_view(&h, &s, 9).unwrap();
        assert_eq!(v, MemoryView { size: 3, sum: 3, nonzero: 3 });
    }

    #[test]
    fn plus_recent_cardinality() {
        let h = PathHistory::from_steps(&[1, -1, 1, 1, -1, -1, 1, 1, -1]);
        let s = MemorySchedule::first_increasing_plus_recent(Growth::default(), 1).unwrap();
        let v = memory_view(&h, &s, 9).unwrap();
        assert_eq!(v.size, 4);
        // indices {1,2,3,9}: 1 - 1 + 1 - 1
        assert_eq!(v.sum, 0);
    }

    #[test]
    fn last_two_window() {
        let h = PathHistory::from_steps(&[1, -1, 1, 1, -1]);
        let s = MemorySchedule::last_fixed(2).unwrap();
        let v = memory_view(&h, &s, 5).unwrap();
        assert_eq!(v, MemoryView { size: 2, sum: 0, nonzero: 2 });
    }

    #[test]
    fn zero_time_is_a_contract_violation() {
        let h = PathHistory::from_steps(&[1]);
        let err = memory_view(&h, &MemorySchedule::Full, 0).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(memory_view(&h, &MemorySchedule::Full, 2).is_err());
    }

    #[test]
    fn view_consistency_checks() {
        assert!(MemoryView::new(3, 1, 1).is_ok());
        assert!(MemoryView::new(3, 2, 1).is_err());
        assert!(MemoryView::new(3, 1, 2).is_err());
        assert!(MemoryView::new(2, 0, 3).is_err());
        let v = MemoryView::new(5, -1, 3).unwrap();
        assert_eq!((v.plus(), v.minus(), v.zeros()), (1, 2, 2));
    }

    fn steps_strategy() -> impl proptest::strategy::Strategy<Value = Vec<i8>> {
        proptest::collection::vec(proptest::sample::select(vec![-1i8, 0, 1]), 1..300)
    }

    fn schedules() -> Vec<MemorySchedule> {
        let g = Growth::default();
        vec![
            MemorySchedule::Full,
            MemorySchedule::first_fixed(5).unwrap(),
            MemorySchedule::first_increasing(g),
            MemorySchedule::first_increasing_plus_recent(g, 3).unwrap(),
            MemorySchedule::first_increasing_plus_growing_recent(g, Growth::power(1.0, 0.25).unwrap()),
            MemorySchedule::last_fixed(7).unwrap(),
            MemorySchedule::last_increasing(Growth::power(2.0, 0.5).unwrap()),
        ]
    }

    proptest::proptest! {
        // The bounded store must agree with the full prefix table and with a
        // direct sum over the explicit index set at every time.
        #[test]
        fn store_matches_full_history(steps in steps_strategy()) {
            let n_max = steps.len() as u64;
            for schedule in schedules() {
                let full = PathHistory::from_steps(&steps);
                let mut store = StepStore::for_schedule(&schedule, n_max);
                for (i, &x) in steps.iter().enumerate() {
                    store.push(x);
                    let n = i as u64 + 1;
                    let a = memory_view(&store, &schedule, n).unwrap();
                    let b = memory_view(&full, &schedule, n).unwrap();
                    proptest::prop_assert_eq!(a, b);

                    let (r1, r2) = schedule.ranges(n);
                    let mut idx: Vec<u64> = (r1.lo..=r1.hi).collect();
                    if let Some(r2) = r2 { idx.extend(r2.lo..=r2.hi); }
                    let sum: i64 = idx.iter().map(|&k| steps[k as usize - 1] as i64).sum();
                    let nz = idx.iter().filter(|&&k| steps[k as usize - 1] != 0).count() as u64;
                    proptest::prop_assert_eq!(a, MemoryView { size: idx.len() as u64, sum, nonzero: nz });
                    proptest::prop_assert!(a.is_consistent());
                }
            }
        }
    }
}
