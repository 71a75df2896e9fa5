//! Finite-volume solver for the regularised diffusion-aggregation equation
//! `ρ_t = (σ²/2) ρ_xx + ((k^ε * ρ) ρ)_x` on a truncated interval.

mod convolution;
mod grid;
mod initial;
mod solver;
mod tridiag;

pub use convolution::{ConvolutionMethod, ConvolutionPlan, FFT_THRESHOLD};
pub use grid::{Grid1D, GridDensity};
pub use initial::{InitialDensity, MixtureComponent};
pub use solver::{
    diagnostics, drift_field, project_initial, solve, step, sup_convolution, weak_convergence_gap, Diagnostics,
    FluxScheme, PdeSolution, PdeSolver, SolveOptions, CFL_LIMIT, DEFAULT_TOL_BOUNDARY, LP_EXPONENTS, TOL_MASS,
};
pub use tridiag::{solve_tridiagonal, ImplicitDiffusion};
