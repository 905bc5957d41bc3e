use rand::Rng;
use serde::{Deserialize, Serialize};

use super::memory::{memory_view_unchecked, PrefixHistory, StepStore};
use super::params::WalkParams;
use super::schedule::MemorySchedule;
use super::step::{first_step_law, step_law_unchecked};
use crate::{Error, Result};

/// Position and nonzero count at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    /// `S_n`
    pub position: i64,
    /// `N*_n`
    pub nonzero: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub checkpoints: Vec<Checkpoint>,
    pub params: WalkParams,
    pub schedule: MemorySchedule,
}

/// Incremental single-walk state, reusable across runs.
#[derive(Debug, Clone)]
pub struct Walker {
    params: WalkParams,
    schedule: MemorySchedule,
    store: StepStore,
}

impl Walker {
    /// Walker able to run up to `n_max` steps.
    pub fn new(params: WalkParams, schedule: MemorySchedule, n_max: u64) -> Self {
        Self {
            params,
            schedule,
            store: StepStore::for_schedule(&schedule, n_max),
        }
    }

    pub fn reset(&mut self) {
        self.store.clear();
    }

    pub fn time(&self) -> u64 {
        self.store.len()
    }

    pub fn position(&self) -> i64 {
        self.store.current().sum
    }

    pub fn nonzero(&self) -> u64 {
        self.store.current().nonzero
    }

    /// A delayed walk whose first step was 0 only ever remembers zeros.
    pub fn is_absorbed(&self) -> bool {
        self.store.len() > 0 && self.store.current().nonzero == 0
    }

    /// Performs one step and returns it.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> i8 {
        let n = self.store.len();
        let law = if n == 0 {
            first_step_law(&self.params)
        } else {
            let view = memory_view_unchecked(&self.store, &self.schedule, n);
            step_law_unchecked(&self.params, &view)
        };
        let x = law.sample(rng.random::<f64>());
        self.store.push(x);
        x
    }

    /// Advances to time `target`. Absorbed walks jump ahead without drawing.
    pub fn advance_to<R: Rng + ?Sized>(&mut self, target: u64, rng: &mut R) {
        while self.store.len() < target {
            if self.is_absorbed() {
                while self.store.len() < target {
                    self.store.push(0);
                }
                return;
            }
            self.step(rng);
        }
    }
}

pub(crate) fn validate_grid(n_max: u64, checkpoints: &[u64]) -> Result<()> {
    if n_max == 0 {
        return Err(Error::Contract("horizon must be at least 1".into()));
    }
    if n_max > i64::MAX as u64 {
        return Err(Error::Contract("horizon exceeds the 64-bit position range".into()));
    }
    if let Some(&bad) = checkpoints.iter().find(|&&c| c == 0 || c > n_max) {
        return Err(Error::Contract(format!("checkpoint {bad} outside 1..={n_max}")));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("checkpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// Simulates one walk up to `n_max`, recording `(n, S_n, N*_n)` at each checkpoint.
pub fn simulate_path<R: Rng + ?Sized>(
    params: WalkParams,
    schedule: MemorySchedule,
    n_max: u64,
    checkpoints: &[u64],
    rng: &mut R,
) -> Result<Trajectory> {
    validate_grid(n_max, checkpoints)?;
    let mut walker = Walker::new(params, schedule, n_max);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        walker.advance_to(c, rng);
        out.push(Checkpoint { n: c, position: walker.position(), nonzero: walker.nonzero() });
    }
    walker.advance_to(n_max, rng);
    Ok(Trajectory { checkpoints: out, params, schedule })
}
