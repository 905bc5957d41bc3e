use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};

use erw_lab::ensemble::{geometric_grid, EnsembleConfig, MemoryMode};
use erw_lab::experiment::{default_mode, default_schedule, ExperimentKind, ExperimentSpec};
use erw_lab::limits::classify_regime;
use erw_lab::walk::{Growth, MemorySchedule, WalkParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Elephant random walk experiments with exact oracles and Monte Carlo ensembles.
///
/// Every flag can also be given in a flat `key=value` config file
/// (`--config FILE`); flags on the command line win.
#[derive(Debug, Default, Parser)]
#[command(name = "erwlab", version)]
pub struct Cli {
    /// oracle-compare, moments, clt-check, delayed, zeros, alpha-regime,
    /// recent-augmented or conjecture-probe
    pub command: Option<String>,
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Probability of repeating the remembered step.
    #[arg(long)]
    pub p: Option<f64>,
    /// Probability of reversing it.
    #[arg(long)]
    pub q: Option<f64>,
    /// Probability of staying put.
    #[arg(long)]
    pub r: Option<f64>,
    /// Probability that the first step is +1 (non-delayed walks).
    #[arg(long)]
    pub s: Option<f64>,

    /// full, first-fixed, first-increasing, first-increasing-plus-recent,
    /// last-fixed or last-increasing
    #[arg(long)]
    pub schedule: Option<String>,
    /// Growth exponent of the memory block: m_n = floor(c n^beta).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Limit of m_n/n for the alpha-regime experiment.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fixed block or window size.
    #[arg(long)]
    pub m: Option<u64>,
    /// Number of recent steps added to the memory.
    #[arg(long)]
    pub k: Option<u64>,

    /// Horizon.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// growing or triangular (memory frozen at m_n for each checkpoint).
    #[arg(long)]
    pub mode: Option<String>,
    /// Maximum number of simulated steps.
    #[arg(long)]
    pub budget: Option<u128>,

    /// Report file; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Overrides the primary verdict tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

const KEYS: [&str; 21] = [
    "experiment", "p", "q", "r", "s", "schedule", "beta", "c", "alpha", "m", "k", "n", "runs",
    "seed", "threads", "mode", "budget", "out", "format", "tolerance", "config",
];

/// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().trim_start_matches("--").to_string();
        if !KEYS.contains(&key.as_str()) || key == "config" {
            bail!("config line {}: unknown key '{key}'", i + 1);
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

struct Merged<'a> {
    file: &'a HashMap<String, String>,
}

impl Merged<'_> {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key '{key}': cannot parse '{v}': {e}")),
            None => Ok(None),
        }
    }
}

/// Fully resolved command.
#[derive(Debug)]
pub struct Resolved {
    pub spec: ExperimentSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn default_n(kind: ExperimentKind) -> u64 {
    match kind {
        ExperimentKind::OracleCompare => 12,
        ExperimentKind::Moments => 1_000_000,
        ExperimentKind::AlphaRegime | ExperimentKind::ConjectureProbe => 100_000,
        _ => 10_000,
    }
}

fn default_runs(kind: ExperimentKind) -> u64 {
    match kind {
        ExperimentKind::OracleCompare => 1_000_000,
        ExperimentKind::Moments => 1,
        ExperimentKind::CltCheck | ExperimentKind::RecentAugmented => 20_000,
        _ => 10_000,
    }
}

fn checkpoints(kind: ExperimentKind, n: u64) -> Vec<u64> {
    match kind {
        ExperimentKind::OracleCompare => vec![n],
        ExperimentKind::Moments => {
            let mut grid: Vec<u64> = std::iter::successors(Some(10u64), |x| x.checked_mul(10))
                .take_while(|&x| x < n)
                .collect();
            grid.push(n);
            grid
        }
        _ => geometric_grid((n / 8).max(1), n),
    }
}

fn parse_schedule(
    name: &str,
    growth: Growth,
    m: Option<u64>,
    k: Option<u64>,
) -> Result<MemorySchedule> {
    let need_m = || m.ok_or_else(|| anyhow!("schedule {name} needs --m"));
    Ok(match name {
        "full" => MemorySchedule::full(),
        "first-fixed" => MemorySchedule::first_fixed(need_m()?)?,
        "first-increasing" => MemorySchedule::first_increasing(growth),
        "first-increasing-plus-recent" => {
            MemorySchedule::first_increasing_plus_recent(growth, k.unwrap_or(1))?
        }
        "last-fixed" => MemorySchedule::last_fixed(need_m()?)?,
        "last-increasing" => MemorySchedule::last_increasing(growth),
        other => bail!("unknown schedule '{other}'"),
    })
}

fn parse_mode(name: &str) -> Result<MemoryMode> {
    match name {
        "growing" => Ok(MemoryMode::Growing),
        "triangular" => Ok(MemoryMode::Triangular),
        other => bail!("unknown mode '{other}' (expected growing or triangular)"),
    }
}

impl Cli {
    /// Merges flags over the config file and validates the result.
    pub fn resolve(self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                parse_config(&text)?
            }
            None => HashMap::new(),
        };
        let c = Merged { file: &file };

        if let (Some(a), Some(b)) = (&self.command, &self.experiment) {
            if a != b {
                bail!("experiment given twice: '{a}' and '{b}'");
            }
        }
        let name = c
            .get(self.command.clone().or(self.experiment.clone()), "experiment")?
            .ok_or_else(|| anyhow!("no experiment given"))?;
        let kind = ExperimentKind::parse(&name)?;

        let r: Option<f64> = c.get(self.r, "r")?;
        let q: Option<f64> = c.get(self.q, "q")?;
        let p = match c.get(self.p, "p")? {
            Some(p) => p,
            None => match (r, q) {
                (Some(r), None) if r > 0.0 => (1.0 - r) / 2.0,
                (r, Some(q)) => 1.0 - q - r.unwrap_or(0.0),
                _ if kind == ExperimentKind::OracleCompare => 0.7,
                _ => 0.6,
            },
        };
        let s: Option<f64> = c.get(self.s, "s")?;
        let params = WalkParams::resolve(p, q, r, s)?;

        let beta = c.get(self.beta, "beta")?.unwrap_or(0.5);
        let coef = c.get(self.c, "c")?.unwrap_or(1.0);
        let growth = Growth::power(coef, beta)?;
        let alpha: Option<f64> = c.get(self.alpha, "alpha")?;
        let m: Option<u64> = c.get(self.m, "m")?;
        let k: Option<u64> = c.get(self.k, "k")?;
        let schedule = match c.get(self.schedule.clone(), "schedule")? {
            Some(name) => parse_schedule(&name, growth, m, k)?,
            None => match (kind, m) {
                (ExperimentKind::Moments, Some(m)) => MemorySchedule::first_fixed(m)?,
                (ExperimentKind::ConjectureProbe, Some(m)) => MemorySchedule::last_fixed(m)?,
                (ExperimentKind::RecentAugmented, _) => {
                    MemorySchedule::first_increasing_plus_recent(growth, k.unwrap_or(1))?
                }
                _ => default_schedule(kind, growth, alpha)?,
            },
        };

        let n = c.get(self.n, "n")?.unwrap_or(default_n(kind));
        let runs = c.get(self.runs, "runs")?.unwrap_or(default_runs(kind));
        let seed = c.get(self.seed, "seed")?.unwrap_or(1);
        let scaling = classify_regime(&params).scaling;
        let mut ensemble = EnsembleConfig::new(runs, checkpoints(kind, n), seed, scaling);
        ensemble.threads = c.get(self.threads, "threads")?.unwrap_or(0);
        ensemble.mode = match c.get(self.mode.clone(), "mode")? {
            Some(mode) => parse_mode(&mode)?,
            None => default_mode(kind),
        };
        if let Some(b) = c.get(self.budget, "budget")? {
            ensemble.step_budget = b;
        }

        let spec = ExperimentSpec {
            kind,
            params,
            schedule,
            alpha,
            ensemble,
            tolerance: c.get(self.tolerance, "tolerance")?,
        };
        spec.validate()?;

        let format = match c.get::<String>(None, "format")? {
            _ if self.format.is_some() => self.format.unwrap_or(Format::Csv),
            Some(f) => Format::from_str(&f, true).map_err(|e| anyhow!("config key 'format': {e}"))?,
            None => Format::Csv,
        };
        let out = c.get(self.out, "out")?;
        Ok(Resolved { spec, out, format })
    }
}
