use serde::{Deserialize, Serialize};

use super::convolution::{ConvolutionMethod, ConvolutionPlan};
use super::tridiag::ImplicitDiffusion;
use super::{Grid1D, GridDensity, InitialDensity};
use crate::error::{Error, Result};
use crate::kernels::{PairKernel, RegularizedKernel};
use crate::par::Execution;

/// Advective CFL number bound: `dt <= CFL_LIMIT * dx / max|b|`.
pub const CFL_LIMIT: f64 = 0.5;
/// Largest admissible density in either boundary cell.
pub const DEFAULT_TOL_BOUNDARY: f64 = 1e-6;
/// Admissible mass defect of a projected initial density.
pub const TOL_MASS: f64 = 1e-8;
/// Exponents reported by [`Diagnostics::lp`].
pub const LP_EXPONENTS: [u32; 3] = [2, 4, 8];

/// Face reconstruction for the advective flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxScheme {
    /// First-order donor cell.
    Upwind,
    /// Donor cell on minmod-limited linear reconstructions.
    #[default]
    Muscl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub flux: FluxScheme,
    pub convolution: ConvolutionMethod,
    pub tol_boundary: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            flux: FluxScheme::default(),
            convolution: ConvolutionMethod::default(),
            tol_boundary: DEFAULT_TOL_BOUNDARY,
            exec: Execution::default(),
        }
    }
}

/// Quadrature norms and moments of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub min: f64,
    pub abs_moment: f64,
    pub l2: f64,
    /// `(p, ‖ρ‖_p)` for each exponent in [`LP_EXPONENTS`].
    pub lp: Vec<(u32, f64)>,
    pub linf: f64,
    /// `max_j |b_j|` of the drift field at this snapshot.
    pub drift_sup: f64,
}

impl Diagnostics {
    pub fn of(rho: &GridDensity, drift: &[f64]) -> Self {
        let dx = rho.grid.dx();
        let lp = |p: u32| (dx * rho.values.iter().map(|v| v.abs().powi(p as i32)).sum::<f64>()).powf(1.0 / p as f64);
        Diagnostics {
            t: rho.t,
            mass: rho.mass(),
            min: rho.min(),
            abs_moment: dx
                * rho
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| rho.grid.center(j).abs() * v)
                    .sum::<f64>(),
            l2: lp(2),
            lp: LP_EXPONENTS.iter().map(|&p| (p, lp(p))).collect(),
            linf: rho.max(),
            drift_sup: drift.iter().map(|b| b.abs()).fold(0.0, f64::max),
        }
    }

    pub fn lp(&self, p: u32) -> Option<f64> {
        self.lp.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

/// Saved states of one run of the regularised diffusion-aggregation equation,
/// with the drift `b = -(k^ε * ρ)` evaluated at every snapshot.
#[derive(Debug, Clone)]
pub struct PdeSolution {
    pub snapshots: Vec<GridDensity>,
    pub drifts: Vec<Vec<f64>>,
    pub diagnostics: Vec<Diagnostics>,
    pub sigma: f64,
    pub kernel: RegularizedKernel,
}

impl PdeSolution {
    pub fn grid(&self) -> Grid1D {
        self.snapshots[0].grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn final_state(&self) -> &GridDensity {
        &self.snapshots[self.snapshots.len() - 1]
    }
}

/// One configured solver: kernel, grid, diffusion and the plans built from
/// them.
pub struct PdeSolver {
    grid: Grid1D,
    sigma: f64,
    plan: ConvolutionPlan,
    options: SolveOptions,
}

impl PdeSolver {
    pub fn new<K: PairKernel + ?Sized>(kernel: &K, grid: Grid1D, sigma: f64, options: SolveOptions) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::config("sigma", format!("diffusion must be non-negative, got {sigma}")));
        }
        let plan = ConvolutionPlan::new(kernel, &grid, options.convolution);
        Ok(PdeSolver {
            grid,
            sigma,
            plan,
            options,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// `b_j = -dx Σ_m k(x_j - x_m) ρ_m`.
    pub fn drift(&self, rho: &GridDensity) -> Vec<f64> {
        let mut b = self.plan.apply(&rho.values, self.options.exec);
        b.iter_mut().for_each(|v| *v = -*v);
        b
    }

    /// Largest stable step for the given drift.
    pub fn max_dt(&self, drift: &[f64]) -> f64 {
        let speed = drift.iter().map(|b| b.abs()).fold(0.0, f64::max);
        if speed == 0.0 {
            f64::INFINITY
        } else {
            CFL_LIMIT * self.grid.dx() / speed
        }
    }

    fn diffusion(&self, dt: f64) -> Result<Option<ImplicitDiffusion>> {
        let r = dt * self.sigma * self.sigma / (2.0 * self.grid.dx() * self.grid.dx());
        if r == 0.0 {
            Ok(None)
        } else {
            ImplicitDiffusion::new(self.grid.cells(), r).map(Some)
        }
    }

    /// One IMEX step: explicit conservative flux for `-(bρ)_x`, then backward
    /// Euler for `(σ²/2) ρ_xx` with zero-flux ends.
    pub fn step(&self, state: &GridDensity, drift: &[f64], dt: f64) -> Result<GridDensity> {
        self.step_with(state, drift, dt, self.diffusion(dt)?.as_ref())
    }

    fn step_with(
        &self,
        state: &GridDensity,
        drift: &[f64],
        dt: f64,
        diffusion: Option<&ImplicitDiffusion>,
    ) -> Result<GridDensity> {
        if state.grid != self.grid {
            return Err(Error::GridMismatch("state grid differs from solver grid".into()));
        }
        if dt == 0.0 {
            return Ok(state.clone());
        }
        if !(dt > 0.0) {
            return Err(Error::config("dt", format!("time step must be positive, got {dt}")));
        }
        let limit = self.max_dt(drift);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                dt,
                limit,
                dx: self.grid.dx(),
                max_speed: drift.iter().map(|b| b.abs()).fold(0.0, f64::max),
            });
        }
        let rho = &state.values;
        let m = rho.len();
        let ratio = dt / self.grid.dx();
        let fluxes = face_fluxes(rho, drift, self.options.flux);
        let mut next: Vec<f64> = (0..m).map(|j| rho[j] - ratio * (fluxes[j + 1] - fluxes[j])).collect();
        if let Some(op) = diffusion {
            op.solve_in_place(&mut next);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite density at t = {}", state.t + dt)));
        }
        Ok(GridDensity {
            grid: self.grid,
            values: next,
            t: state.t + dt,
        })
    }

    /// Steps `rho0` to `t_end`, saving every `save_every` steps and at the
    /// final time. The last step is shortened to land on `t_end`.
    pub fn solve(&self, initial: GridDensity, t_end: f64, dt: f64, save_every: usize, kernel: &RegularizedKernel) -> Result<PdeSolution> {
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::config("T", format!("final time must be non-negative, got {t_end}")));
        }
        if !(dt > 0.0) {
            return Err(Error::config("dt", format!("time step must be positive, got {dt}")));
        }
        if save_every == 0 {
            return Err(Error::config("save_every", "must be at least 1"));
        }
        let n_steps = if t_end == 0.0 { 0 } else { (t_end / dt - 1e-9).ceil().max(1.0) as usize };
        let full_op = self.diffusion(dt)?;
        let mut state = initial;
        let mut drift = self.drift(&state);
        self.check_boundary(&state)?;
        let mut snapshots = vec![state.clone()];
        let mut diagnostics = vec![Diagnostics::of(&state, &drift)];
        let mut drifts = vec![drift.clone()];
        for k in 1..=n_steps {
            let last = k == n_steps;
            let h = if last { t_end - (n_steps - 1) as f64 * dt } else { dt };
            state = if (h - dt).abs() <= 1e-12 * dt {
                self.step_with(&state, &drift, h, full_op.as_ref())?
            } else {
                self.step(&state, &drift, h)?
            };
            if last {
                state.t = t_end;
            }
            drift = self.drift(&state);
            if k % save_every == 0 || last {
                self.check_boundary(&state)?;
                diagnostics.push(Diagnostics::of(&state, &drift));
                drifts.push(drift.clone());
                snapshots.push(state.clone());
            }
        }
        Ok(PdeSolution {
            snapshots,
            drifts,
            diagnostics,
            sigma: self.sigma,
            kernel: kernel.clone(),
        })
    }

    fn check_boundary(&self, state: &GridDensity) -> Result<()> {
        let density = state.boundary_density();
        if density > self.options.tol_boundary {
            return Err(Error::DomainTooSmall {
                density,
                tolerance: self.options.tol_boundary,
                t: state.t,
            });
        }
        Ok(())
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Fluxes at the `M + 1` faces; the two boundary faces carry zero flux.
fn face_fluxes(rho: &[f64], drift: &[f64], scheme: FluxScheme) -> Vec<f64> {
    let m = rho.len();
    let slopes: Vec<f64> = match scheme {
        FluxScheme::Upwind => vec![0.0; m],
        FluxScheme::Muscl => (0..m)
            .map(|j| {
                if j == 0 || j == m - 1 {
                    0.0
                } else {
                    minmod(rho[j] - rho[j - 1], rho[j + 1] - rho[j])
                }
            })
            .collect(),
    };
    let mut flux = vec![0.0; m + 1];
    for j in 0..m - 1 {
        let v = 0.5 * (drift[j] + drift[j + 1]);
        flux[j + 1] = if v > 0.0 {
            v * (rho[j] + 0.5 * slopes[j])
        } else {
            v * (rho[j + 1] - 0.5 * slopes[j + 1])
        };
    }
    flux
}

/// Projects `rho0` and checks that the grid captures its mass.
pub fn project_initial(rho0: &InitialDensity, grid: Grid1D) -> Result<GridDensity> {
    let rho = GridDensity::project(rho0, grid)?;
    let mass = rho.mass();
    if (mass - 1.0).abs() > TOL_MASS {
        return Err(Error::DomainTooSmall {
            density: 1.0 - mass,
            tolerance: TOL_MASS,
            t: 0.0,
        });
    }
    Ok(rho)
}

/// `b = -(k^ε * ρ)` sampled at the cell centres.
pub fn drift_field(kernel: &RegularizedKernel, rho: &GridDensity) -> Vec<f64> {
    let plan = ConvolutionPlan::new(kernel, &rho.grid, ConvolutionMethod::Auto);
    let mut b = plan.apply(&rho.values, Execution::default());
    b.iter_mut().for_each(|v| *v = -*v);
    b
}

/// Single step with a freshly built solver.
pub fn step(state: &GridDensity, kernel: &RegularizedKernel, sigma: f64, dt: f64) -> Result<GridDensity> {
    let solver = PdeSolver::new(kernel, state.grid, sigma, SolveOptions::default())?;
    let drift = solver.drift(state);
    solver.step(state, &drift, dt)
}

#[allow(clippy::too_many_arguments)]
pub fn solve(
    rho0: &InitialDensity,
    kernel: &RegularizedKernel,
    sigma: f64,
    t_end: f64,
    grid: Grid1D,
    dt: f64,
    save_every: usize,
    options: SolveOptions,
) -> Result<PdeSolution> {
    let solver = PdeSolver::new(kernel, grid, sigma, options)?;
    let initial = project_initial(rho0, grid)?;
    solver.solve(initial, t_end, dt, save_every, kernel)
}

/// Per-snapshot diagnostics of a solution.
pub fn diagnostics(sol: &PdeSolution) -> &[Diagnostics] {
    &sol.diagnostics
}

/// `sup_t max_j |(f * ρ_t)(x_j)|` over the saved snapshots.
pub fn sup_convolution<K: PairKernel + ?Sized>(sol: &PdeSolution, kernel: &K, exec: Execution) -> f64 {
    let plan = ConvolutionPlan::new(kernel, &sol.grid(), ConvolutionMethod::Auto);
    sol.snapshots
        .iter()
        .map(|s| plan.apply(&s.values, exec).iter().map(|v| v.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// `sup_t |∫ (ρ_a - ρ_b) φ dx|` over matching snapshots.
pub fn weak_convergence_gap(a: &PdeSolution, b: &PdeSolution, phi: impl Fn(f64) -> f64) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("solutions live on different grids".into()));
    }
    if a.snapshots.len() != b.snapshots.len()
        || a.snapshots.iter().zip(&b.snapshots).any(|(x, y)| (x.t - y.t).abs() > 1e-9)
    {
        return Err(Error::GridMismatch("snapshot times differ".into()));
    }
    let grid = a.grid();
    let weights: Vec<f64> = grid.centers().into_iter().map(|x| grid.dx() * phi(x)).collect();
    Ok(a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            x.values
                .iter()
                .zip(&y.values)
                .zip(&weights)
                .map(|((u, v), w)| (u - v) * w)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max))
}
