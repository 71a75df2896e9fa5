//! Sweeps of coupled runs over particle counts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{fit_rate, median, wasserstein1_vs_density, RateFit};
use crate::coupling::{run_replicate, CoupledConfig, CoupledSetup, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::stochastics::SeedSpec;

pub const MIN_REPS: usize = 30;

/// A ladder of particle counts sharing every other coupled-run parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    /// Parameters at each `N`; its own `n` is overridden.
    pub base: CoupledConfig,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::config("N_list", "must not be empty"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("N_list", "must be strictly increasing"));
        }
        if self.reps < MIN_REPS {
            return Err(Error::config("reps", format!("need at least {MIN_REPS} replicates")));
        }
        for &n in &self.n_list {
            self.at(n).validate()?;
        }
        Ok(())
    }

    pub fn at(&self, n: usize) -> CoupledConfig {
        CoupledConfig { n, ..self.base.clone() }
    }
}

/// Aggregates over the replicates of one particle count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub threshold: f64,
    pub lambda: f64,
    /// Fraction of replicates with `sup_t |X - Y|_∞ >= N^{-α}`.
    pub exceedance_fraction: f64,
    pub median_sup_dev: f64,
    pub mean_j_t: f64,
    /// `W_1` between the pooled `X_T` sample and `ρ^ε_T`.
    pub w1_final: f64,
    pub out_of_domain: usize,
    pub wall_time: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "N,eps,threshold,lambda,exceedance_fraction,median_sup_dev,mean_J_T,W1_final,out_of_domain";

    /// One CSV line; `wall_time` is left out so reruns are byte-identical.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.n,
            self.eps,
            self.threshold,
            self.lambda,
            self.exceedance_fraction,
            self.median_sup_dev,
            self.mean_j_t,
            self.w1_final,
            self.out_of_domain
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateOutcome {
    Fit(RateFit),
    Unavailable(String),
}

impl RateOutcome {
    fn from_points(points: &[(f64, f64)]) -> Self {
        match fit_rate(points) {
            Ok(fit) => RateOutcome::Fit(fit),
            Err(e) => RateOutcome::Unavailable(e.to_string()),
        }
    }

    pub fn fit(&self) -> Option<&RateFit> {
        match self {
            RateOutcome::Fit(f) => Some(f),
            RateOutcome::Unavailable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRates {
    pub exceedance_fraction: RateOutcome,
    pub median_sup_dev: RateOutcome,
    pub w1_final: RateOutcome,
    /// Particle counts whose exceedance fraction rose above the previous row.
    /// Small-`N` rows may legitimately do this.
    pub non_monotone: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub rates: SweepRates,
}

impl SweepResult {
    pub fn from_rows(config: SweepConfig, rows: Vec<SweepRow>) -> Self {
        let pts = |f: fn(&SweepRow) -> f64| rows.iter().map(|r| (r.n as f64, f(r))).collect::<Vec<_>>();
        let non_monotone = rows
            .windows(2)
            .filter(|w| w[1].exceedance_fraction > w[0].exceedance_fraction)
            .map(|w| w[1].n)
            .collect();
        let rates = SweepRates {
            exceedance_fraction: RateOutcome::from_points(&pts(|r| r.exceedance_fraction)),
            median_sup_dev: RateOutcome::from_points(&pts(|r| r.median_sup_dev)),
            w1_final: RateOutcome::from_points(&pts(|r| r.w1_final)),
            non_monotone,
        };
        SweepResult { config, rows, rates }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(SweepRow::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }
}

/// Replicate seeds: `(master, r, ·)` for `r = 0..reps`, identical across `N`.
pub fn replicate_seed(master: u64, r: usize) -> SeedSpec {
    SeedSpec::new(master, r as u64, 0)
}

/// Runs every replicate of one configuration, spreading replicates over
/// `exec` and keeping each replicate sequential.
pub fn run_replicates(setup: &CoupledSetup, reps: usize, master_seed: u64, exec: Execution) -> Result<Vec<TrajectoryRecord>> {
    exec.map_indexed(reps, |r| run_replicate(setup, replicate_seed(master_seed, r), Execution::Sequential))
        .into_iter()
        .collect()
}

pub fn summarize(setup: &CoupledSetup, records: &[TrajectoryRecord], wall_time: f64) -> Result<SweepRow> {
    let cfg = &setup.config;
    let reps = records.len() as f64;
    let sups: Vec<f64> = records.iter().map(TrajectoryRecord::final_sup).collect();
    let pooled: Vec<f64> = records.iter().flat_map(|r| r.final_x.iter().copied()).collect();
    let final_rho = setup.solution.final_state();
    Ok(SweepRow {
        n: cfg.n,
        eps: cfg.eps(),
        threshold: cfg.threshold(),
        lambda: setup.lambda,
        exceedance_fraction: records.iter().filter(|r| r.exceeded).count() as f64 / reps,
        median_sup_dev: median(&sups),
        mean_j_t: records.iter().map(TrajectoryRecord::final_j).sum::<f64>() / reps,
        w1_final: wasserstein1_vs_density(&pooled, final_rho)?,
        out_of_domain: records.iter().map(|r| r.out_of_domain).sum(),
        wall_time,
    })
}

/// Checkpoint of one finished row, keyed by everything that determines it.
#[derive(Debug, Serialize, Deserialize)]
struct PartialRow {
    config: CoupledConfig,
    reps: usize,
    master_seed: u64,
    row: SweepRow,
}

fn partial_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("row_N{n}.json"))
}

fn load_partial(dir: &Path, cfg: &SweepConfig, n: usize) -> Option<SweepRow> {
    let text = std::fs::read_to_string(partial_path(dir, n)).ok()?;
    let p: PartialRow = serde_json::from_str(&text).ok()?;
    (p.config == cfg.at(n) && p.reps == cfg.reps && p.master_seed == cfg.master_seed).then_some(p.row)
}

fn store_partial(dir: &Path, cfg: &SweepConfig, row: &SweepRow) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = PartialRow {
        config: cfg.at(row.n),
        reps: cfg.reps,
        master_seed: cfg.master_seed,
        row: row.clone(),
    };
    let path = partial_path(dir, row.n);
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string_pretty(&p).expect("row serializes");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
}

/// Runs the sweep. With `checkpoint_dir`, each finished row is written there
/// and rows already present for an identical configuration are reused.
pub fn run_sweep(cfg: &SweepConfig, exec: Execution, checkpoint_dir: Option<&Path>) -> Result<SweepResult> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        if let Some(row) = checkpoint_dir.and_then(|d| load_partial(d, cfg, n)) {
            rows.push(row);
            continue;
        }
        let start = Instant::now();
        let setup = CoupledSetup::prepare(&cfg.at(n))?;
        let records = run_replicates(&setup, cfg.reps, cfg.master_seed, exec)?;
        let row = summarize(&setup, &records, start.elapsed().as_secs_f64())?;
        if let Some(dir) = checkpoint_dir {
            store_partial(dir, cfg, &row)?;
        }
        rows.push(row);
    }
    Ok(SweepResult::from_rows(cfg.clone(), rows))
}
