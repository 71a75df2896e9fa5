//! Interacting-particle systems with bounded, discontinuous interaction
//! kernels, their regularised mean-field limits, and Monte Carlo diagnostics
//! of how closely the two track each other.
//!
//! * [`kernels`]: bounded kernels `k`, C² regularisations `k^ε` and local
//!   Lipschitz envelopes `l^ε`.
//! * [`pde`]: IMEX finite-volume solver for the regularised
//!   diffusion-aggregation equation.
//! * [`stochastics`]: counter-keyed random streams.
//! * [`coupling`]: particle system and mean-field companions driven by the
//!   same noise.
//! * [`analysis`]: law-of-large-numbers exceedances, Wasserstein-1 distances,
//!   rate fits.
//! * [`experiments`]: sweeps over the particle count.
//! * [`config`] and [`output`]: JSON configuration and result files used by
//!   the `chaoslab` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod output;
pub mod par;
pub mod pde;
pub mod stochastics;

pub use error::{Error, Result};
