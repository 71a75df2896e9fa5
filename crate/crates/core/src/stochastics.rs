//! Seeded, order-independent random streams.
//!
//! Every stream is a ChaCha8 generator keyed directly by
//! `(master_seed, replicate_id, particle_id, purpose)`, so streams can be
//! built by any worker in any order and still reproduce bit-for-bit.
//! Normal variates use the inverse CDF: one uniform per draw, no rejection.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::pde::InitialDensity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate_id: u64,
    pub particle_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate_id: u64, particle_id: u64) -> Self {
        SeedSpec {
            master_seed,
            replicate_id,
            particle_id,
        }
    }

    pub fn with_particle(self, particle_id: u64) -> Self {
        SeedSpec { particle_id, ..self }
    }

    pub fn with_replicate(self, replicate_id: u64) -> Self {
        SeedSpec { replicate_id, ..self }
    }
}

/// Separates streams that share a seed triple but serve different roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    InitialPositions = 1,
    Brownian = 2,
    Auxiliary = 3,
}

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: SeedSpec, purpose: StreamPurpose) -> Self {
        let mut key = [0u8; 32];
        for (chunk, word) in key.chunks_exact_mut(8).zip([
            seed.master_seed,
            seed.replicate_id,
            seed.particle_id,
            purpose as u64,
        ]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Stream {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        standard_normal_quantile(self.uniform())
    }
}

/// `Φ^{-1}(p)` for `p ∈ (0, 1)`.
pub fn standard_normal_quantile(p: f64) -> f64 {
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    // one Newton step polishes the last few digits of erfc_inv
    let cdf = 0.5 * erfc(-x / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if pdf > 0.0 {
        x - (cdf - p) / pdf
    } else {
        x
    }
}

/// Per-step `N(0, dt)` increments of one Brownian path.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianIncrements {
    pub dt: f64,
    pub increments: Vec<f64>,
}

pub fn brownian_stream(seed: SeedSpec, n_steps: usize, dt: f64) -> Result<BrownianIncrements> {
    if !(dt > 0.0) {
        return Err(Error::config("dt", format!("time step must be positive, got {dt}")));
    }
    let mut stream = Stream::new(seed, StreamPurpose::Brownian);
    let scale = dt.sqrt();
    let increments = (0..n_steps).map(|_| scale * stream.standard_normal()).collect();
    Ok(BrownianIncrements { dt, increments })
}

/// `n` i.i.d. draws from `rho0` through its inverse CDF.
pub fn sample_initial(rho0: &InitialDensity, n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    rho0.validate()?;
    if n == 0 {
        return Err(Error::config("n", "need at least one sample"));
    }
    let mut stream = Stream::new(seed, StreamPurpose::InitialPositions);
    Ok((0..n).map(|_| rho0.quantile(stream.uniform())).collect())
}
