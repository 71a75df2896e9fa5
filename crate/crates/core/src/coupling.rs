//! Regularised particle system and mean-field companions driven by shared
//! initial data and shared Brownian increments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    calibrate_envelope_constant, interaction_forces, KernelSpec, LipschitzEnvelope, RegularizedKernel,
};
use crate::par::Execution;
use crate::pde::{self, Grid1D, InitialDensity, PdeSolution, SolveOptions, CFL_LIMIT};
use crate::stochastics::{SeedSpec, Stream, StreamPurpose};

/// Samples used when calibrating the envelope constant behind `λ`.
pub const LAMBDA_CALIBRATION_SAMPLES: usize = 100_000;
const CALIBRATION_SEED: SeedSpec = SeedSpec {
    master_seed: 0x5eed_ca1b,
    replicate_id: 0,
    particle_id: 0,
};

/// Drift `b(t, x) = -(k^ε * ρ_t)(x)` tabulated at the PDE snapshots;
/// piecewise linear in `t` and in `x`, constant beyond the outer cell
/// centres.
#[derive(Debug, Clone)]
pub struct MeanFieldDrift {
    grid: Grid1D,
    times: Vec<f64>,
    drifts: Vec<Vec<f64>>,
}

impl MeanFieldDrift {
    pub fn from_solution(sol: &PdeSolution) -> Self {
        MeanFieldDrift {
            grid: sol.grid(),
            times: sol.times(),
            drifts: sol.drifts.clone(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn in_space(&self, field: &[f64], x: f64) -> f64 {
        let s = (x - self.grid.x_min()) / self.grid.dx() - 0.5;
        if s <= 0.0 {
            return field[0];
        }
        let last = field.len() - 1;
        if s >= last as f64 {
            return field[last];
        }
        let j = s.floor() as usize;
        let w = s - j as f64;
        if w == 0.0 {
            field[j]
        } else {
            field[j] + w * (field[j + 1] - field[j])
        }
    }

    pub fn at(&self, t: f64, x: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.in_space(&self.drifts[0], x);
        }
        let lo = k - 1;
        let span = if k < self.times.len() {
            self.times[k] - self.times[lo]
        } else {
            0.0
        };
        let w = if span > 0.0 { (t - self.times[lo]) / span } else { 0.0 };
        if w <= 1e-9 {
            return self.in_space(&self.drifts[lo], x);
        }
        if w >= 1.0 - 1e-9 {
            return self.in_space(&self.drifts[k], x);
        }
        let b0 = self.in_space(&self.drifts[lo], x);
        let b1 = self.in_space(&self.drifts[k], x);
        b0 + w * (b1 - b0)
    }
}

/// Particle positions `X` and mean-field companions `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledEnsemble {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub eps: f64,
    pub beta: f64,
    /// Mean-field positions reflected back into the PDE domain.
    pub out_of_domain: usize,
}

impl CoupledEnsemble {
    pub fn new(initial: Vec<f64>, eps: f64, beta: f64) -> Self {
        CoupledEnsemble {
            y: initial.clone(),
            x: initial,
            t: 0.0,
            eps,
            beta,
            out_of_domain: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `|X - Y|_∞`
    pub fn sup_deviation(&self) -> f64 {
        self.x.iter().zip(&self.y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `X_i ← X_i + K_i^ε(X) dt + σ dB_i`. Returns the largest applied drift.
pub fn em_step_particles(
    ens: &mut CoupledEnsemble,
    kernel: &RegularizedKernel,
    sigma: f64,
    dt: f64,
    db: &[f64],
    exec: Execution,
) -> Result<f64> {
    check_increments(ens, db)?;
    let forces = interaction_forces(kernel, &ens.x, exec);
    let mut max_drift: f64 = 0.0;
    for ((x, f), d) in ens.x.iter_mut().zip(&forces).zip(db) {
        *x = *x + f * dt + sigma * d;
        max_drift = max_drift.max(f.abs());
    }
    Ok(max_drift)
}

/// `Y_i ← Y_i + b(t, Y_i) dt + σ dB_i`, reflecting at the PDE domain edges.
/// Returns the largest applied drift.
pub fn em_step_meanfield(
    ens: &mut CoupledEnsemble,
    drift: &MeanFieldDrift,
    sigma: f64,
    dt: f64,
    db: &[f64],
) -> Result<f64> {
    check_increments(ens, db)?;
    let (lo, hi) = (drift.grid.x_min(), drift.grid.x_max());
    let mut max_drift: f64 = 0.0;
    for (y, d) in ens.y.iter_mut().zip(db) {
        let b = drift.at(ens.t, *y);
        max_drift = max_drift.max(b.abs());
        let mut next = *y + b * dt + sigma * d;
        if next < lo || next > hi {
            ens.out_of_domain += 1;
            next = if next < lo { 2.0 * lo - next } else { 2.0 * hi - next };
            next = next.clamp(lo, hi);
        }
        *y = next;
    }
    Ok(max_drift)
}

fn check_increments(ens: &CoupledEnsemble, db: &[f64]) -> Result<()> {
    if db.len() != ens.len() {
        return Err(Error::LengthMismatch {
            left: db.len(),
            right: ens.len(),
        });
    }
    Ok(())
}

/// Parameters of a coupled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledConfig {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `ε = eps_scale · N^{-β}`
    pub eps_scale: f64,
    pub sigma: f64,
    pub t_end: f64,
    pub dt: f64,
    pub kernel: crate::kernels::KernelKind,
    pub rho0: InitialDensity,
    /// Half-width `L` of the PDE domain `[-L, L]`.
    pub domain_half_width: f64,
    pub cells: usize,
    /// Rate in the auxiliary process; calibrated from the PDE when absent.
    pub lambda: Option<f64>,
    /// PDE steps per SDE step; derived from the CFL bound when absent.
    pub pde_substeps: Option<usize>,
    pub pde: SolveOptions,
}

impl CoupledConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("N", "need at least one particle"));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::config("alpha", "alpha must lie in (0, 1/2)"));
        }
        if !(self.beta > 0.0 && self.beta <= self.alpha) {
            return Err(Error::config("beta", "beta must satisfy 0 < beta <= alpha"));
        }
        if !(self.eps_scale > 0.0) {
            return Err(Error::config("eps_scale", "must be positive"));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::config("sigma", "must be non-negative"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::config("T", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::config("dt", "must lie in (0, T]"));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(Error::config("lambda", "must be non-negative"));
            }
        }
        self.rho0.validate()
    }

    pub fn eps(&self) -> f64 {
        self.eps_scale * (self.n as f64).powf(-self.beta)
    }

    /// `δ = (1/2)(1/2 - α)`
    pub fn delta(&self) -> f64 {
        0.5 * (0.5 - self.alpha)
    }

    pub fn threshold(&self) -> f64 {
        (self.n as f64).powf(-self.alpha)
    }
}

/// Everything shared by the replicates of one configuration: the
/// regularised kernel, the PDE solution that defines the mean-field drift,
/// and the calibrated `λ`.
#[derive(Debug, Clone)]
pub struct CoupledSetup {
    pub config: CoupledConfig,
    pub kernel: RegularizedKernel,
    pub envelope: LipschitzEnvelope,
    pub solution: PdeSolution,
    pub drift: MeanFieldDrift,
    pub lambda: f64,
}

impl CoupledSetup {
    pub fn prepare(config: &CoupledConfig) -> Result<Self> {
        config.validate()?;
        let base = KernelSpec::new(config.kernel.clone())?;
        let eps = config.eps();
        let kernel = RegularizedKernel::new(base.clone(), eps)?;
        let grid = Grid1D::symmetric(config.domain_half_width, config.cells)?;
        let substeps = match config.pde_substeps {
            Some(0) => return Err(Error::config("pde_substeps", "must be at least 1")),
            Some(s) => s,
            None => {
                // |b| <= sup|k^ε| since ρ has unit mass
                let bound = (0..=20_000)
                    .map(|i| kernel.eval(-kernel.support_radius() + kernel.support_radius() * i as f64 / 10_000.0).abs())
                    .fold(0.0, f64::max);
                if bound == 0.0 {
                    1
                } else {
                    (config.dt * bound / (0.9 * CFL_LIMIT * grid.dx())).ceil().max(1.0) as usize
                }
            }
        };
        let pde_dt = config.dt / substeps as f64;
        let solution = pde::solve(&config.rho0, &kernel, config.sigma, config.t_end, grid, pde_dt, substeps, config.pde)?;
        let drift = MeanFieldDrift::from_solution(&solution);
        let env_c = match base.kind() {
            crate::kernels::KernelKind::Zero => 0.0,
            _ => calibrate_envelope_constant(&kernel, LAMBDA_CALIBRATION_SAMPLES, CALIBRATION_SEED, 1.0)?,
        };
        let envelope = LipschitzEnvelope::new(&base, eps, env_c);
        let lambda = match config.lambda {
            Some(l) => l,
            None => pde::sup_convolution(&solution, &envelope, config.pde.exec),
        };
        Ok(CoupledSetup {
            config: config.clone(),
            kernel,
            envelope,
            solution,
            drift,
            lambda,
        })
    }
}

/// Per-replicate time series of the coupling gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub replicate_id: u64,
    pub times: Vec<f64>,
    /// `|X_t - Y_t|_∞`
    pub sup_dev: Vec<f64>,
    /// Running supremum of `sup_dev`.
    pub running_sup: Vec<f64>,
    /// Auxiliary process `J_t^N`.
    pub j: Vec<f64>,
    pub threshold: f64,
    /// `sup_t |X_t - Y_t|_∞ >= N^{-α}`
    pub exceeded: bool,
    pub max_drift: f64,
    pub out_of_domain: usize,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn final_sup(&self) -> f64 {
        self.running_sup[self.running_sup.len() - 1]
    }

    pub fn final_j(&self) -> f64 {
        self.j[self.j.len() - 1]
    }
}

/// Initial positions, one keyed stream per particle.
pub fn initial_positions(rho0: &InitialDensity, n: usize, seed: SeedSpec) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let mut s = Stream::new(seed.with_particle(i as u64), StreamPurpose::InitialPositions);
            rho0.quantile(s.uniform())
        })
        .collect()
}

/// Runs one replicate to `T`; `seed.particle_id` is ignored.
pub fn run_replicate(setup: &CoupledSetup, seed: SeedSpec, exec: Execution) -> Result<TrajectoryRecord> {
    let cfg = &setup.config;
    let n = cfg.n;
    let initial = initial_positions(&cfg.rho0, n, seed);
    let mut ens = CoupledEnsemble::new(initial, setup.kernel.eps(), cfg.beta);
    let mut noise: Vec<Stream> = (0..n)
        .map(|i| Stream::new(seed.with_particle(i as u64), StreamPurpose::Brownian))
        .collect();

    let n_steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let nf = n as f64;
    let scaled_floor = nf.powf(-cfg.delta());
    let j_weight = |t: f64, dev: f64| (setup.lambda * (cfg.t_end - t)).exp() * (nf.powf(cfg.alpha) * dev + scaled_floor);

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut sup_dev = Vec::with_capacity(n_steps + 1);
    let mut running_sup = Vec::<f64>::with_capacity(n_steps + 1);
    let mut j = Vec::with_capacity(n_steps + 1);
    let mut weighted_sup = j_weight(0.0, 0.0);
    times.push(0.0);
    sup_dev.push(0.0);
    running_sup.push(0.0);
    j.push(weighted_sup.min(1.0));

    let mut db = vec![0.0; n];
    let mut max_drift: f64 = 0.0;
    for k in 1..=n_steps {
        let h = if k == n_steps { cfg.t_end - (n_steps - 1) as f64 * cfg.dt } else { cfg.dt };
        let scale = h.sqrt();
        for (d, s) in db.iter_mut().zip(noise.iter_mut()) {
            *d = scale * s.standard_normal();
        }
        let mx = em_step_particles(&mut ens, &setup.kernel, cfg.sigma, h, &db, exec)?;
        let my = em_step_meanfield(&mut ens, &setup.drift, cfg.sigma, h, &db)?;
        max_drift = max_drift.max(mx).max(my);
        ens.t = if k == n_steps { cfg.t_end } else { k as f64 * cfg.dt };
        let dev = ens.sup_deviation();
        weighted_sup = weighted_sup.max(j_weight(ens.t, dev));
        times.push(ens.t);
        sup_dev.push(dev);
        running_sup.push(running_sup[k - 1].max(dev));
        j.push(weighted_sup.min(1.0));
    }
    let threshold = cfg.threshold();
    Ok(TrajectoryRecord {
        replicate_id: seed.replicate_id,
        exceeded: running_sup[n_steps] >= threshold,
        times,
        sup_dev,
        running_sup,
        j,
        threshold,
        max_drift,
        out_of_domain: ens.out_of_domain,
        final_x: ens.x,
        final_y: ens.y,
    })
}

/// Solves the PDE for `config` and runs replicate `seed.replicate_id`.
pub fn run_coupled(config: &CoupledConfig, seed: SeedSpec) -> Result<TrajectoryRecord> {
    let setup = CoupledSetup::prepare(config)?;
    run_replicate(&setup, seed, Execution::default())
}

/// Saved states of the particle system run on its own.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticlePath {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
}

/// Runs only `X`, with the same initial data and noise streams as
/// [`run_replicate`], saving every `save_every` steps and at `T`.
pub fn simulate_particles(config: &CoupledConfig, seed: SeedSpec, save_every: usize, exec: Execution) -> Result<ParticlePath> {
    config.validate()?;
    if save_every == 0 {
        return Err(Error::config("save_every", "must be at least 1"));
    }
    let kernel = RegularizedKernel::new(KernelSpec::new(config.kernel.clone())?, config.eps())?;
    let n = config.n;
    let mut ens = CoupledEnsemble::new(initial_positions(&config.rho0, n, seed), kernel.eps(), config.beta);
    let mut noise: Vec<Stream> = (0..n)
        .map(|i| Stream::new(seed.with_particle(i as u64), StreamPurpose::Brownian))
        .collect();
    let n_steps = (config.t_end / config.dt - 1e-9).ceil().max(1.0) as usize;
    let mut path = ParticlePath {
        times: vec![0.0],
        positions: vec![ens.x.clone()],
    };
    let mut db = vec![0.0; n];
    for k in 1..=n_steps {
        let h = if k == n_steps { config.t_end - (n_steps - 1) as f64 * config.dt } else { config.dt };
        let scale = h.sqrt();
        for (d, s) in db.iter_mut().zip(noise.iter_mut()) {
            *d = scale * s.standard_normal();
        }
        em_step_particles(&mut ens, &kernel, config.sigma, h, &db, exec)?;
        if k % save_every == 0 || k == n_steps {
            path.times.push(if k == n_steps { config.t_end } else { k as f64 * config.dt });
            path.positions.push(ens.x.clone());
        }
    }
    Ok(path)
}
