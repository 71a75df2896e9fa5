use serde::Serialize;

use super::{KernelSpec, LipschitzEnvelope, PairKernel, RegularizedKernel};
use crate::error::{Error, Result};
use crate::stochastics::{SeedSpec, Stream, StreamPurpose};

/// Interval from which the base point `y` of each sampled pair is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingWindow {
    pub lo: f64,
    pub hi: f64,
}

impl SamplingWindow {
    /// One unit of padding around every jump of `kernel`.
    pub fn covering(kernel: &KernelSpec) -> Self {
        let jumps = kernel.discontinuities();
        let lo = jumps.iter().copied().fold(0.0, f64::min);
        let hi = jumps.iter().copied().fold(0.0, f64::max);
        SamplingWindow { lo: lo - 1.0, hi: hi + 1.0 }
    }
}

/// Outcome of sampling `|k(x) - k(y)| <= l(y) |x - y|` over pairs with
/// `|x - y| <= 2ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub eps: f64,
    pub n_samples: usize,
    pub window: SamplingWindow,
    pub envelope_constant: f64,
    pub violations: usize,
    /// Largest `|Δk| / (l(y)|x-y|)`; `None` when some pair with a zero
    /// envelope had a non-zero increment.
    pub worst_ratio: Option<f64>,
    /// Smallest `C` with no violation on these samples; `None` if no finite
    /// `C` works.
    pub calibrated_constant: Option<f64>,
    /// Pairs that no finite `C` can cover.
    pub unbounded_pairs: usize,
}

pub fn verify_local_lipschitz<K: PairKernel + ?Sized>(
    kernel: &K,
    env: &LipschitzEnvelope,
    n_samples: usize,
    seed: SeedSpec,
    window: SamplingWindow,
) -> Result<ViolationReport> {
    if n_samples == 0 {
        return Err(Error::config("n_samples", "need at least one sample"));
    }
    if !(window.hi > window.lo) {
        return Err(Error::config(
            "window",
            format!("empty sampling window [{}, {}]", window.lo, window.hi),
        ));
    }
    let eps = env.eps();
    let c = env.constant();
    let mut rng = Stream::new(seed, StreamPurpose::Auxiliary);
    let mut violations = 0;
    let mut unbounded_pairs = 0;
    let mut required: f64 = 0.0;
    for _ in 0..n_samples {
        let y = window.lo + (window.hi - window.lo) * rng.uniform();
        let x = y + 2.0 * eps * (2.0 * rng.uniform() - 1.0);
        let dk = (kernel.eval(x) - kernel.eval(y)).abs();
        let scale = env.shape(y) * (x - y).abs();
        if dk > c * scale {
            violations += 1;
        }
        if dk > 0.0 {
            if scale > 0.0 {
                required = required.max(dk / scale);
            } else {
                unbounded_pairs += 1;
            }
        }
    }
    let bounded = unbounded_pairs == 0;
    let worst_ratio = if !bounded {
        None
    } else if c > 0.0 {
        Some(required / c)
    } else if required == 0.0 {
        Some(0.0)
    } else {
        None
    };
    Ok(ViolationReport {
        eps,
        n_samples,
        window,
        envelope_constant: c,
        violations,
        worst_ratio,
        calibrated_constant: bounded.then_some(required),
        unbounded_pairs,
    })
}

/// Samples the smallest envelope constant for `kernel` and inflates it by
/// `safety`, so that fresh samples stay below the envelope.
pub fn calibrate_envelope_constant(
    kernel: &RegularizedKernel,
    n_samples: usize,
    seed: SeedSpec,
    safety: f64,
) -> Result<f64> {
    let env = LipschitzEnvelope::new(kernel.base(), kernel.eps(), 1.0);
    let window = SamplingWindow::covering(kernel.base());
    let report = verify_local_lipschitz(kernel, &env, n_samples, seed, window)?;
    report
        .calibrated_constant
        .map(|c| c * safety)
        .ok_or_else(|| Error::Numerical("kernel admits no finite local Lipschitz envelope".into()))
}
