//! Bounded interaction kernels, their C² regularisations and local Lipschitz
//! envelopes.

mod assembly;
mod envelope;
mod mollifier;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assembly::{
    assemble_envelope_force, assemble_interaction_force, envelope_forces, interaction_forces,
    pair_sums, pair_sums_direct, pair_sums_sorted,
};
pub use envelope::LipschitzEnvelope;
pub use mollifier::{smoothstep, Mollifier, SMOOTHSTEP_MAX_SLOPE};
pub use verify::{calibrate_envelope_constant, verify_local_lipschitz, SamplingWindow, ViolationReport};

/// Profile `h` multiplying the bounded-confidence indicator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `h ≡ 1`
    #[default]
    One,
    /// `h(x) = x`
    Linear,
    /// `h(x) = Σ c_k x^k`, coefficients in ascending order.
    Polynomial(Vec<f64>),
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::One => 1.0,
            Profile::Linear => x,
            Profile::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::One => 0.0,
            Profile::Linear => 1.0,
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * x + k as f64 * ck),
        }
    }

    /// `Some(c)` when `h` is the constant `c`.
    fn constant(&self) -> Option<f64> {
        match self {
            Profile::One => Some(1.0),
            Profile::Linear => None,
            Profile::Polynomial(c) => {
                if c.iter().skip(1).all(|&v| v == 0.0) {
                    Some(c.first().copied().unwrap_or(0.0))
                } else {
                    None
                }
            }
        }
    }

    /// `sup_{|x| <= r} |h(x)|`, sampled densely for general polynomials.
    fn sup_abs(&self, r: f64) -> f64 {
        match self {
            Profile::One => 1.0,
            Profile::Linear => r,
            Profile::Polynomial(_) => {
                const SAMPLES: usize = 20_000;
                (0..=SAMPLES)
                    .map(|i| self.value(-r + 2.0 * r * i as f64 / SAMPLES as f64).abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Shape of a bounded interaction kernel `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `k(x) = 1_{[0,R]}(|x|) h(x)`
    Bcm {
        #[serde(default, alias = "h")]
        profile: Profile,
        #[serde(alias = "R")]
        radius: f64,
    },
    /// `k(x) = -1_{[-R,0]}(x) + 1_{[0,R]}(x)`
    Uniform {
        #[serde(alias = "R")]
        radius: f64,
    },
    /// `k ≡ 0`; the null model used for baselines.
    Zero,
}

/// A bounded kernel together with its sup norm.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    norm_inf: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Result<Self> {
        let norm_inf = match &kind {
            KernelKind::Bcm { profile, radius } => {
                check_radius(*radius)?;
                if let Profile::Polynomial(c) = profile {
                    if c.iter().any(|v| !v.is_finite()) {
                        return Err(Error::config("kernel.profile", "non-finite coefficient"));
                    }
                }
                profile.sup_abs(*radius)
            }
            KernelKind::Uniform { radius } => {
                check_radius(*radius)?;
                1.0
            }
            KernelKind::Zero => 0.0,
        };
        Ok(KernelSpec { kind, norm_inf })
    }

    pub fn bcm(profile: Profile, radius: f64) -> Result<Self> {
        Self::new(KernelKind::Bcm { profile, radius })
    }

    pub fn uniform(radius: f64) -> Result<Self> {
        Self::new(KernelKind::Uniform { radius })
    }

    pub fn zero() -> Self {
        KernelSpec {
            kind: KernelKind::Zero,
            norm_inf: 0.0,
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Bcm { radius, .. } | KernelKind::Uniform { radius } => Some(radius),
            KernelKind::Zero => None,
        }
    }

    /// Evaluates `k(x)` with closed-interval indicators.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            KernelKind::Bcm { profile, radius } => {
                if x.abs() <= *radius {
                    profile.value(x)
                } else {
                    0.0
                }
            }
            KernelKind::Uniform { radius } => {
                let r = *radius;
                let left = if (-r..=0.0).contains(&x) { 1.0 } else { 0.0 };
                let right = if (0.0..=r).contains(&x) { 1.0 } else { 0.0 };
                right - left
            }
            KernelKind::Zero => 0.0,
        }
    }

    /// Points where `k` jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match &self.kind {
            KernelKind::Bcm { profile, radius } => {
                let r = *radius;
                [-r, r].into_iter().filter(|&x| profile.value(x) != 0.0).collect()
            }
            KernelKind::Uniform { radius } => vec![-radius, 0.0, *radius],
            KernelKind::Zero => Vec::new(),
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::config("kernel.radius", format!("radius must be positive, got {radius}")))
    }
}

/// Piece of a partition of the real line used by sorted pair summation.
/// Covers `[lo, hi)`; everything outside the listed segments is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub value: SegmentValue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentValue {
    Const(f64),
    Eval,
}

/// A real function of the pair offset `x_i - x_j`.
pub trait PairKernel: Sync {
    fn eval(&self, d: f64) -> f64;

    /// Ordered, non-overlapping segments describing where the function is
    /// non-zero, and where it is constant.
    fn segments(&self) -> Vec<Segment>;
}

impl PairKernel for KernelSpec {
    fn eval(&self, d: f64) -> f64 {
        KernelSpec::eval(self, d)
    }

    fn segments(&self) -> Vec<Segment> {
        match &self.kind {
            KernelKind::Bcm { profile, radius } => {
                let value = match profile.constant() {
                    Some(c) => SegmentValue::Const(c),
                    None => SegmentValue::Eval,
                };
                // closed at +R; the upper end is nudged to include it
                vec![Segment {
                    lo: -radius,
                    hi: radius.next_up(),
                    value,
                }]
            }
            KernelKind::Uniform { radius } => vec![
                Segment {
                    lo: -radius,
                    hi: 0.0,
                    value: SegmentValue::Const(-1.0),
                },
                Segment {
                    lo: 0.0,
                    hi: radius.next_up(),
                    value: SegmentValue::Const(1.0),
                },
            ],
            KernelKind::Zero => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Regularized {
    Bcm { psi: Mollifier, profile: Profile },
    Uniform { left: Mollifier, right: Mollifier },
    Zero,
}

/// C² kernel `k^ε` built from [`Mollifier`] ramps.
///
/// The uniform kernel uses `-ψ_{-R,0} + ψ_{0,R}` so that the left lobe
/// carries the negative sign of `k_U`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedKernel {
    base: KernelSpec,
    eps: f64,
    shape: Regularized,
}

impl RegularizedKernel {
    pub fn new(base: KernelSpec, eps: f64) -> Result<Self> {
        let shape = match base.kind() {
            KernelKind::Bcm { profile, radius } => Regularized::Bcm {
                psi: Mollifier::new(-radius, *radius, eps)?,
                profile: profile.clone(),
            },
            KernelKind::Uniform { radius } => Regularized::Uniform {
                left: Mollifier::new(-radius, 0.0, eps)?,
                right: Mollifier::new(0.0, *radius, eps)?,
            },
            KernelKind::Zero => {
                if !(eps > 0.0) {
                    return Err(Error::config("eps", format!("cutoff must be positive, got {eps}")));
                }
                Regularized::Zero
            }
        };
        Ok(RegularizedKernel { base, eps, shape })
    }

    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Regularized::Bcm { psi, profile } => {
                let p = psi.eval(x);
                if p == 0.0 {
                    0.0
                } else {
                    p * profile.value(x)
                }
            }
            Regularized::Uniform { left, right } => right.eval(x) - left.eval(x),
            Regularized::Zero => 0.0,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.shape {
            Regularized::Bcm { psi, profile } => {
                psi.derivative(x) * profile.value(x) + psi.eval(x) * profile.derivative(x)
            }
            Regularized::Uniform { left, right } => right.derivative(x) - left.derivative(x),
            Regularized::Zero => 0.0,
        }
    }

    /// Half-width of the support of `k^ε`.
    pub fn support_radius(&self) -> f64 {
        match self.base.radius() {
            Some(r) => r + 2.0 * self.eps,
            None => 0.0,
        }
    }
}

impl PairKernel for RegularizedKernel {
    fn eval(&self, d: f64) -> f64 {
        RegularizedKernel::eval(self, d)
    }

    fn segments(&self) -> Vec<Segment> {
        let e2 = 2.0 * self.eps;
        let eval = |lo: f64, hi: f64| Segment {
            lo,
            hi,
            value: SegmentValue::Eval,
        };
        let constant = |lo: f64, hi: f64, c: f64| Segment {
            lo,
            hi,
            value: SegmentValue::Const(c),
        };
        match &self.shape {
            Regularized::Bcm { psi, profile } => {
                let r = psi.right();
                match profile.constant() {
                    Some(c) => vec![
                        eval(-r - e2, -r + e2),
                        constant(-r + e2, r - e2, c),
                        eval(r - e2, r + e2),
                    ],
                    None => vec![eval(-r - e2, r + e2)],
                }
            }
            Regularized::Uniform { right, .. } => {
                let r = right.right();
                vec![
                    eval(-r - e2, -r + e2),
                    constant(-r + e2, -e2, -1.0),
                    eval(-e2, e2),
                    constant(e2, r - e2, 1.0),
                    eval(r - e2, r + e2),
                ]
            }
            Regularized::Zero => Vec::new(),
        }
    }
}
