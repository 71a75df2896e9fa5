use serde::Serialize;

use super::lln::{GL5_NODES, GL5_WEIGHTS};
use crate::error::{Error, Result};
use crate::kernels::{envelope_forces, interaction_forces, LipschitzEnvelope, PairKernel, RegularizedKernel, SegmentValue};
use crate::par::Execution;
use crate::pde::{GridDensity, PdeSolution};

/// Snapshot times closer than this to the requested `t` are accepted.
const TIME_MATCH: f64 = 1e-9;

/// Membership of a mean-field ensemble in the two good sets at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosSetMembership {
    pub in_b1: bool,
    pub in_b2: bool,
    /// `|K^ε(Y) - K̄^ε_t(Y)|_∞`
    pub b1_deviation: f64,
    /// `|L^ε(Y) - L̄^ε_t(Y)|_∞`
    pub b2_deviation: f64,
    pub b1_threshold: f64,
}

/// `∫ f(y - z) ρ(z) dz` for a piecewise-constant grid density.
///
/// Constant pieces of `f` use exact cell integrals; the rest is integrated
/// with five-point Gauss-Legendre on every cell fragment.
pub fn convolve_with_grid<K: PairKernel + ?Sized>(f: &K, rho: &GridDensity, y: f64) -> f64 {
    let grid = rho.grid;
    let dx = grid.dx();
    let mut total = 0.0;
    for seg in f.segments() {
        // d = y - z ∈ [lo, hi)  <=>  z ∈ (y - hi, y - lo]
        let (z_lo, z_hi) = ((y - seg.hi).max(grid.x_min()), (y - seg.lo).min(grid.x_max()));
        if z_lo >= z_hi {
            continue;
        }
        let first = (((z_lo - grid.x_min()) / dx).floor() as usize).min(grid.cells() - 1);
        let last = (((z_hi - grid.x_min()) / dx).ceil() as usize).clamp(first + 1, grid.cells());
        for j in first..last {
            let a = z_lo.max(grid.face(j));
            let b = z_hi.min(grid.face(j + 1));
            if a >= b {
                continue;
            }
            let piece = match seg.value {
                SegmentValue::Const(c) => c * (b - a),
                SegmentValue::Eval => {
                    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                    half * GL5_NODES
                        .iter()
                        .zip(GL5_WEIGHTS)
                        .map(|(s, w)| w * f.eval(y - (mid + half * s)))
                        .sum::<f64>()
                }
            };
            total += rho.values[j] * piece;
        }
    }
    total
}

/// Tests whether `Y` lies in `B¹_t` and `B²_t`, with the averaged forces
/// `K̄ = -(k^ε * ρ_t)(Y_i)` and `L̄ = (l^ε * ρ_t)(Y_i)` taken from the stored
/// snapshot at time `t`.
#[allow(clippy::too_many_arguments)]
pub fn chaos_sets(
    y: &[f64],
    rk: &RegularizedKernel,
    env: &LipschitzEnvelope,
    sol: &PdeSolution,
    t: f64,
    alpha: f64,
    delta: f64,
    exec: Execution,
) -> Result<ChaosSetMembership> {
    let snapshot = sol
        .snapshots
        .iter()
        .find(|s| (s.t - t).abs() <= TIME_MATCH)
        .ok_or_else(|| Error::GridMismatch(format!("no stored snapshot at t = {t}")))?;
    if y.is_empty() {
        return Err(Error::config("y", "empty ensemble"));
    }
    let n = y.len() as f64;
    let k_emp = interaction_forces(rk, y, exec);
    let l_emp = envelope_forces(env, y, exec);
    let mut b1 = 0.0f64;
    let mut b2 = 0.0f64;
    for (i, &yi) in y.iter().enumerate() {
        let k_bar = -convolve_with_grid(rk, snapshot, yi);
        let l_bar = convolve_with_grid(env, snapshot, yi);
        b1 = b1.max((k_emp[i] - k_bar).abs());
        b2 = b2.max((l_emp[i] - l_bar).abs());
    }
    let threshold = n.powf(-(delta + alpha));
    Ok(ChaosSetMembership {
        in_b1: b1 <= threshold,
        in_b2: b2 <= 1.0,
        b1_deviation: b1,
        b2_deviation: b2,
        b1_threshold: threshold,
    })
}
