use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{pair_sums_sorted, PairKernel, SegmentValue};
use crate::par::Execution;
use crate::pde::InitialDensity;
use crate::stochastics::{sample_initial, SeedSpec};

/// One draw of `Z^1..Z^N` with `H_i(Z) = (1/N) Σ_{j≠i} h(Z^i - Z^j)` and
/// the conditional expectations `E_{(-i)} H_i = ((N-1)/N) (h * u)(Z^i)`.
/// Arrays are in ascending order of `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlnTrial {
    pub draws: Vec<f64>,
    pub h_values: Vec<f64>,
    pub expectations: Vec<f64>,
    /// `sup_i |H_i - E_{(-i)} H_i|`
    pub deviation: f64,
}

/// Exceedance statistics of one particle count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnSummary {
    pub n: usize,
    pub reps: usize,
    pub threshold: f64,
    pub exceedances: usize,
    pub exceedance_fraction: f64,
    pub median_dev: f64,
}

pub(crate) const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
pub(crate) const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];
const QUADRATURE_PANELS: usize = 32;

/// `(h * u)(z) = ∫ h(z - w) u(w) dw`.
///
/// Constant pieces of `h` integrate exactly through the CDF of `u`; the
/// remaining pieces use composite 5-point Gauss-Legendre.
pub fn convolve_with_density<K: PairKernel + ?Sized>(h: &K, u: &InitialDensity, z: f64) -> f64 {
    h.segments()
        .iter()
        .map(|seg| {
            // z - w in [lo, hi)  <=>  w in (z - hi, z - lo]
            let (a, b) = (z - seg.hi, z - seg.lo);
            match seg.value {
                SegmentValue::Const(c) => c * u.prob_between(a, b),
                SegmentValue::Eval => {
                    let width = (b - a) / QUADRATURE_PANELS as f64;
                    (0..QUADRATURE_PANELS)
                        .map(|p| {
                            let mid = a + (p as f64 + 0.5) * width;
                            GL5_NODES
                                .iter()
                                .zip(GL5_WEIGHTS)
                                .map(|(t, w)| {
                                    let x = mid + 0.5 * width * t;
                                    w * h.eval(z - x) * u.pdf(x)
                                })
                                .sum::<f64>()
                                * 0.5
                                * width
                        })
                        .sum()
                }
            }
        })
        .sum()
}

pub fn lln_trial<K: PairKernel + ?Sized>(h: &K, density: &InitialDensity, n: usize, seed: SeedSpec) -> Result<LlnTrial> {
    let mut draws = sample_initial(density, n, seed)?;
    draws.sort_by(f64::total_cmp);
    let nf = n as f64;
    let h_values: Vec<f64> = pair_sums_sorted(h, &draws, false, Execution::Sequential)
        .into_iter()
        .map(|s| s / nf)
        .collect();
    let expectations: Vec<f64> = draws
        .iter()
        .map(|&z| (nf - 1.0) / nf * convolve_with_density(h, density, z))
        .collect();
    let deviation = h_values
        .iter()
        .zip(&expectations)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(LlnTrial {
        draws,
        h_values,
        expectations,
        deviation,
    })
}

/// Fraction of `reps` trials in which `sup_i |H_i - E_{(-i)} H_i|`
/// reaches `N^{-(δ+α)}`. Replicate `r` draws from seed
/// `(master_seed, r, N)`.
#[allow(clippy::too_many_arguments)]
pub fn lln_exceedance<K: PairKernel + ?Sized>(
    h: &K,
    density: &InitialDensity,
    n: usize,
    alpha: f64,
    delta: f64,
    reps: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<LlnSummary> {
    if !(alpha > 0.0 && delta > 0.0 && alpha + delta < 0.5) {
        return Err(Error::config("alpha", "need alpha, delta > 0 with alpha + delta < 1/2"));
    }
    if reps == 0 || n < 2 {
        return Err(Error::config("reps", "need reps >= 1 and N >= 2"));
    }
    let threshold = (n as f64).powf(-(alpha + delta));
    let devs: Vec<f64> = exec
        .map_indexed(reps, |r| {
            lln_trial(h, density, n, SeedSpec::new(master_seed, r as u64, n as u64)).map(|t| t.deviation)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let exceedances = devs.iter().filter(|&&d| d >= threshold).count();
    Ok(LlnSummary {
        n,
        reps,
        threshold,
        exceedances,
        exceedance_fraction: exceedances as f64 / reps as f64,
        median_dev: median(&devs),
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
