//! Parallel Monte Carlo ensembles with deterministic per-run streams.
//!
//! Run `i` draws from `ChaCha8Rng::seed_from_u64(master_seed)` on stream `i`.
//! Runs are grouped in fixed blocks; partial sums are exact integers, so the
//! summary does not depend on the number of workers.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::exact_moments_increasing;
use crate::limits::{limit_moments, Cdf, LimitCdf, Scaling};
use crate::walk::{validate_grid, BlockSize, Growth, MemorySchedule, WalkParams, Walker};
use crate::{Error, Result};

const BLOCK: u64 = 64;

/// Default cap on the number of simulated steps per ensemble.
pub const DEFAULT_STEP_BUDGET: u128 = 20_000_000_000;

/// How a growing memory block is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryMode {
    /// One walk per run; the block grows with time as the schedule says.
    #[default]
    Growing,
    /// One walk per run and checkpoint `n`, with memory frozen at `m_n`
    /// (full memory up to `m_n`, then `{1..m_n}` only).
    Triangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub runs: u64,
    pub n_grid: Vec<u64>,
    pub master_seed: u64,
    /// Normalisation applied to `S_n`.
    pub scaling: Scaling,
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    pub step_budget: u128,
    pub mode: MemoryMode,
    /// Target for the KS distance at the final checkpoint.
    pub ks_target: Option<LimitCdf>,
}

impl EnsembleConfig {
    pub fn new(runs: u64, n_grid: Vec<u64>, master_seed: u64, scaling: Scaling) -> Self {
        Self {
            runs,
            n_grid,
            master_seed,
            scaling,
            threads: 0,
            step_budget: DEFAULT_STEP_BUDGET,
            mode: MemoryMode::Growing,
            ks_target: None,
        }
    }

    pub fn n_max(&self) -> u64 {
        self.n_grid.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Contract("runs must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Contract("checkpoint grid is empty".into()));
        }
        validate_grid(self.n_max(), &self.n_grid)
    }

    /// Number of steps the ensemble will simulate.
    pub fn steps_required(&self) -> u128 {
        let per_run: u128 = match self.mode {
            MemoryMode::Growing => self.n_max() as u128,
            MemoryMode::Triangular => self.n_grid.iter().map(|&n| n as u128).sum(),
        };
        per_run * self.runs as u128
    }
}

/// Geometric grid `base·2^k` up to and including `n_max`.
pub fn geometric_grid(base: u64, n_max: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut n = base.max(1);
    while n < n_max {
        grid.push(n);
        n = n.saturating_mul(2);
    }
    grid.push(n_max);
    grid
}

/// Exact power sums of an integer sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PowerSums {
    s1: i128,
    s2: i128,
    s3: i128,
}

impl PowerSums {
    #[inline]
    fn add(&mut self, x: i64) {
        let x = x as i128;
        self.s1 += x;
        self.s2 += x * x;
        self.s3 += x * x * x;
    }

    fn merge(&mut self, o: &PowerSums) {
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
    }

    fn moments(&self, count: u64, scale: f64) -> Moments {
        let c = count as i128;
        let mean_raw = self.s1 as f64 / count as f64;
        // c·Σx² - (Σx)² is exact and nonnegative.
        let spread = (c * self.s2 - self.s1 * self.s1) as f64;
        let variance = if count > 1 {
            spread / (count as f64 * (count - 1) as f64)
        } else {
            0.0
        };
        let third_raw = match third_central_numerator(c, self) {
            Some(num) => num as f64 / (count as f64).powi(3),
            None => {
                let n = count as f64;
                let (m1, m2, m3) = (self.s1 as f64 / n, self.s2 as f64 / n, self.s3 as f64 / n);
                m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1
            }
        };
        let pop_var = spread / (count as f64 * count as f64);
        let skewness = if pop_var > 0.0 { third_raw / pop_var.powf(1.5) } else { 0.0 };
        Moments {
            scale,
            mean: mean_raw * scale,
            variance: variance * scale * scale,
            third_central: third_raw * scale.powi(3),
            skewness,
        }
    }
}

/// `c²·Σx³ - 3c·Σx·Σx² + 2(Σx)³`, or `None` on overflow.
fn third_central_numerator(c: i128, s: &PowerSums) -> Option<i128> {
    let a = c.checked_mul(c)?.checked_mul(s.s3)?;
    let b = c.checked_mul(s.s1)?.checked_mul(s.s2)?.checked_mul(3)?;
    let d = s.s1.checked_mul(s.s1)?.checked_mul(s.s1)?.checked_mul(2)?;
    a.checked_sub(b)?.checked_add(d)
}

/// Sample moments of a scaled statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub scale: f64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub third_central: f64,
    pub skewness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub n: u64,
    pub m: u64,
    /// Moments of `S_n` times the configured scaling.
    pub position: Moments,
    /// Moments of `N*_n · m^r / n` (delayed walks only).
    pub nonzeros: Option<Moments>,
    /// Fraction of runs with `N*_n = 0`.
    pub degenerate_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub params: WalkParams,
    pub schedule: MemorySchedule,
    pub runs: u64,
    pub master_seed: u64,
    pub mode: MemoryMode,
    pub scaling: Scaling,
    pub checkpoints: Vec<CheckpointSummary>,
    /// Sorted unscaled positions at the final checkpoint.
    pub final_positions: Vec<i64>,
    /// KS distance of the final scaled sample to the configured target.
    pub ks: Option<f64>,
}

impl EnsembleSummary {
    pub fn last(&self) -> &CheckpointSummary {
        self.checkpoints.last().expect("summaries have at least one checkpoint")
    }

    /// Sorted scaled sample at the final checkpoint.
    pub fn ecdf(&self) -> Vec<f64> {
        let scale = self.last().position.scale;
        self.final_positions.iter().map(|&s| s as f64 * scale).collect()
    }

    /// Empirical law of `S_n` at the final checkpoint.
    pub fn position_pmf(&self) -> Vec<(i64, f64)> {
        let total = self.final_positions.len() as f64;
        let mut out: Vec<(i64, f64)> = Vec::new();
        for &s in &self.final_positions {
            match out.last_mut() {
                Some((v, c)) if *v == s => *c += 1.0,
                _ => out.push((s, 1.0)),
            }
        }
        for e in &mut out {
            e.1 /= total;
        }
        out
    }

    /// One row per checkpoint and statistic.
    pub fn rows(&self) -> Vec<ReportRow> {
        let last = self.checkpoints.len() - 1;
        let mut rows = Vec::new();
        for (i, c) in self.checkpoints.iter().enumerate() {
            let ks = if i == last { self.ks } else { None };
            rows.push(ReportRow::from_moments("position", c, &c.position, ks));
            if let Some(z) = &c.nonzeros {
                rows.push(ReportRow::from_moments("nonzeros", c, z, None));
            }
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows())
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "params": self.params,
            "schedule": self.schedule.to_string(),
            "runs": self.runs,
            "master_seed": self.master_seed,
            "mode": self.mode,
            "scaling": self.scaling.label(),
            "rows": self.rows(),
        })
        .to_string()
    }
}

/// One report line: a statistic at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub statistic: String,
    pub n: u64,
    pub m_n: u64,
    pub scaled_mean: f64,
    pub scaled_var: f64,
    pub skew: Option<f64>,
    pub ks: Option<f64>,
    pub atom_fraction: Option<f64>,
}

impl ReportRow {
    fn from_moments(statistic: &str, c: &CheckpointSummary, m: &Moments, ks: Option<f64>) -> Self {
        Self {
            statistic: statistic.into(),
            n: c.n,
            m_n: c.m,
            scaled_mean: m.mean,
            scaled_var: m.variance,
            skew: Some(m.skewness),
            ks,
            atom_fraction: Some(c.degenerate_fraction),
        }
    }
}

pub const CSV_HEADER: &str = "statistic,n,m_n,scaled_mean,scaled_var,skew,ks,atom_fraction";

pub(crate) fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// CSV with fixed 13-digit scientific formatting; missing values are empty.
pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.statistic,
            r.n,
            r.m_n,
            fmt_num(r.scaled_mean),
            fmt_num(r.scaled_var),
            fmt_opt(r.skew),
            fmt_opt(r.ks),
            fmt_opt(r.atom_fraction)
        );
    }
    out
}

#[derive(Debug, Clone, Default)]
struct Partial {
    positions: Vec<PowerSums>,
    nonzeros: Vec<PowerSums>,
    degenerate: Vec<u64>,
    final_positions: Vec<i64>,
}

impl Partial {
    fn new(k: usize, block: usize) -> Self {
        Self {
            positions: vec![PowerSums::default(); k],
            nonzeros: vec![PowerSums::default(); k],
            degenerate: vec![0; k],
            final_positions: Vec::with_capacity(block),
        }
    }

    #[inline]
    fn record(&mut self, k: usize, position: i64, nonzero: u64) {
        self.positions[k].add(position);
        self.nonzeros[k].add(nonzero as i64);
        if nonzero == 0 {
            self.degenerate[k] += 1;
        }
        if k + 1 == self.positions.len() {
            self.final_positions.push(position);
        }
    }

    fn merge(&mut self, o: Partial) {
        for (a, b) in self.positions.iter_mut().zip(&o.positions) {
            a.merge(b);
        }
        for (a, b) in self.nonzeros.iter_mut().zip(&o.nonzeros) {
            a.merge(b);
        }
        for (a, b) in self.degenerate.iter_mut().zip(&o.degenerate) {
            *a += b;
        }
        self.final_positions.extend(o.final_positions);
    }
}

fn run_block(params: WalkParams, schedule: MemorySchedule, config: &EnsembleConfig, block: u64) -> Partial {
    let lo = block * BLOCK;
    let hi = (lo + BLOCK).min(config.runs);
    let grid = &config.n_grid;
    let mut part = Partial::new(grid.len(), (hi - lo) as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    match config.mode {
        MemoryMode::Growing => {
            let mut walker = Walker::new(params, schedule, config.n_max());
            for run in lo..hi {
                rng.set_stream(run);
                rng.set_word_pos(0);
                walker.reset();
                for (k, &n) in grid.iter().enumerate() {
                    walker.advance_to(n, &mut rng);
                    part.record(k, walker.position(), walker.nonzero());
                }
            }
        }
        MemoryMode::Triangular => {
            let mut walkers: Vec<Walker> = grid
                .iter()
                .map(|&n| Walker::new(params, schedule.frozen_at(n), n))
                .collect();
            for run in lo..hi {
                rng.set_stream(run);
                rng.set_word_pos(0);
                for (k, (w, &n)) in walkers.iter_mut().zip(grid).enumerate() {
                    w.reset();
                    w.advance_to(n, &mut rng);
                    part.record(k, w.position(), w.nonzero());
                }
            }
        }
    }
    part
}

/// Simulates `config.runs` independent walks and summarises them at each checkpoint.
pub fn run_ensemble(params: WalkParams, schedule: MemorySchedule, config: &EnsembleConfig) -> Result<EnsembleSummary> {
    config.validate()?;
    let requested = config.steps_required();
    if requested > config.step_budget {
        return Err(Error::Budget { requested, limit: config.step_budget });
    }
    let blocks = config.runs.div_ceil(BLOCK);
    let work = || -> Vec<Partial> {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(params, schedule, config, b))
            .collect()
    };
    let partials = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Contract(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };

    let mut total = Partial::new(config.n_grid.len(), config.runs as usize);
    for p in partials {
        total.merge(p);
    }
    total.final_positions.sort_unstable();

    let r = params.r();
    let checkpoints = config
        .n_grid
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let m = schedule.memory_size(n);
            let position = total.positions[k].moments(config.runs, config.scaling.factor(n, m));
            let nonzeros = (r > 0.0).then(|| {
                let zscale = Scaling::Power { exponent: r }.factor(n, m);
                total.nonzeros[k].moments(config.runs, zscale)
            });
            CheckpointSummary {
                n,
                m,
                position,
                nonzeros,
                degenerate_fraction: total.degenerate[k] as f64 / config.runs as f64,
            }
        })
        .collect::<Vec<_>>();

    let mut summary = EnsembleSummary {
        params,
        schedule,
        runs: config.runs,
        master_seed: config.master_seed,
        mode: config.mode,
        scaling: config.scaling,
        checkpoints,
        final_positions: total.final_positions,
        ks: None,
    };
    if let Some(target) = &config.ks_target {
        summary.ks = Some(ks_statistic(&summary.ecdf(), target)?);
    }
    Ok(summary)
}

/// Kolmogorov-Smirnov distance `sup |F̂ - F|` between a sorted sample and `target`.
///
/// Both one-sided gaps are evaluated at every sample jump and at every atom of
/// the target; between those points both functions are monotone and `F̂` is flat.
pub fn ks_statistic(sorted: &[f64], target: &dyn Cdf) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Contract("KS statistic needs a nonempty sample".into()));
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Contract("KS sample must be sorted".into()));
    }
    let total = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / total;
        let upto = j as f64 / total;
        d = d.max((upto - target.cdf(x)).abs()).max((below - target.cdf_left(x)).abs());
        i = j;
    }
    for a in target.atoms() {
        let below = sorted.partition_point(|&v| v < a) as f64 / total;
        let upto = sorted.partition_point(|&v| v <= a) as f64 / total;
        d = d.max((upto - target.cdf(a)).abs()).max((below - target.cdf_left(a)).abs());
    }
    Ok(d)
}

/// One row of a moment convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub m: u64,
    pub scaled_mean: f64,
    pub scaled_var: f64,
    pub target_mean: f64,
    pub target_var: f64,
    /// `|scaled_var / target_var - 1|`, or `|scaled_mean / target_mean - 1|`
    /// when the target mean is nonzero.
    pub gap: Option<f64>,
    /// Whether the row comes from exact formulas rather than simulation.
    pub exact: bool,
}

/// `α` such that `m_n / n -> α` for the schedule, zero for sublinear growth.
pub fn schedule_alpha(schedule: &MemorySchedule) -> f64 {
    match schedule {
        MemorySchedule::Full => 1.0,
        MemorySchedule::First { first: BlockSize::Growing(Growth::Power { c, beta }) }
        | MemorySchedule::FirstPlusRecent { first: BlockSize::Growing(Growth::Power { c, beta }), .. }
            if *beta == 1.0 =>
        {
            c.min(1.0)
        }
        _ => 0.0,
    }
}

/// Scaled moments along `n_grid` next to their limit targets.
///
/// Initial-block schedules use the exact two-epoch formulas; other schedules
/// need `fallback` and are simulated.
pub fn moment_convergence_table(
    params: &WalkParams,
    schedule: &MemorySchedule,
    n_grid: &[u64],
    fallback: Option<&EnsembleConfig>,
) -> Result<Vec<ConvergenceRow>> {
    let alpha = schedule_alpha(schedule);
    let report = limit_moments(params, if alpha >= 1.0 { 0.0 } else { alpha })?;
    let scaling = report.scaling;
    let target_mean = report.limit_mean.unwrap_or(0.0);
    let target_var = report.limit_var.unwrap_or(0.0);
    let gap = |mean: f64, var: f64| -> Option<f64> {
        if target_mean != 0.0 {
            Some((mean / target_mean - 1.0).abs())
        } else if target_var != 0.0 {
            Some((var / target_var - 1.0).abs())
        } else {
            None
        }
    };

    if schedule.is_initial_block() {
        return n_grid
            .iter()
            .map(|&n| {
                let exact = exact_moments_increasing(params, schedule, n)?;
                let f = scaling.factor(n, exact.m);
                let (mean, var) = (exact.mean_sn * f, exact.variance_sn() * f * f);
                Ok(ConvergenceRow {
                    n,
                    m: exact.m,
                    scaled_mean: mean,
                    scaled_var: var,
                    target_mean,
                    target_var,
                    gap: gap(mean, var),
                    exact: true,
                })
            })
            .collect();
    }

    let base = fallback.ok_or_else(|| {
        Error::Unsupported(format!("no exact moments for schedule {schedule}; an ensemble configuration is required"))
    })?;
    let mut config = base.clone();
    config.n_grid = n_grid.to_vec();
    config.scaling = scaling;
    let summary = run_ensemble(*params, *schedule, &config)?;
    Ok(summary
        .checkpoints
        .iter()
        .map(|c| ConvergenceRow {
            n: c.n,
            m: c.m,
            scaled_mean: c.position.mean,
            scaled_var: c.position.variance,
            target_mean,
            target_var,
            gap: gap(c.position.mean, c.position.variance),
            exact: false,
        })
        .collect())
}
