//! Empirical checks on particle ensembles: law of large numbers, good-set
//! membership, Wasserstein distances and rate fits.

mod chaos;
mod lln;
mod rate;
mod wasserstein;

pub use chaos::{chaos_sets, convolve_with_grid, ChaosSetMembership};
pub use lln::{convolve_with_density, lln_exceedance, lln_trial, median, LlnSummary, LlnTrial};
pub use rate::{fit_rate, RateFit};
pub use wasserstein::{wasserstein1_sorted, wasserstein1_vs_density};
