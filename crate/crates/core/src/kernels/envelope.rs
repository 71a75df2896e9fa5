use super::{KernelKind, KernelSpec, PairKernel, Segment, SegmentValue};

/// Default half-width offset of the interior window `[-R-3, R+3]`.
pub const DEFAULT_INTERIOR_MARGIN: f64 = 3.0;

/// Piecewise-constant local Lipschitz envelope `l^ε`.
///
/// * bounded confidence: `C` on `[-R-m, R+m]` away from the jump
///   neighbourhoods `[±R - 4ε, ±R + 4ε]`, and `C/ε` on them;
/// * uniform: `C/ε` on the neighbourhoods of `-R`, `0`, `R`, zero elsewhere;
/// * zero kernel: identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEnvelope {
    eps: f64,
    constant: f64,
    interior_margin: f64,
    kind: EnvelopeKind,
}

#[derive(Debug, Clone, PartialEq)]
enum EnvelopeKind {
    Bcm { radius: f64 },
    Uniform { radius: f64 },
    Zero,
}

impl LipschitzEnvelope {
    pub fn new(kernel: &KernelSpec, eps: f64, constant: f64) -> Self {
        let kind = match kernel.kind() {
            KernelKind::Bcm { radius, .. } => EnvelopeKind::Bcm { radius: *radius },
            KernelKind::Uniform { radius } => EnvelopeKind::Uniform { radius: *radius },
            KernelKind::Zero => EnvelopeKind::Zero,
        };
        LipschitzEnvelope {
            eps,
            constant,
            interior_margin: DEFAULT_INTERIOR_MARGIN,
            kind,
        }
    }

    pub fn with_interior_margin(mut self, margin: f64) -> Self {
        self.interior_margin = margin;
        self
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Centres of the `4ε` neighbourhoods on which the envelope is `C/ε`.
    fn jump_centres(&self) -> Vec<f64> {
        match self.kind {
            EnvelopeKind::Bcm { radius } => vec![-radius, radius],
            EnvelopeKind::Uniform { radius } => vec![-radius, 0.0, radius],
            EnvelopeKind::Zero => Vec::new(),
        }
    }

    fn near_jump(&self, y: f64) -> bool {
        let w = 4.0 * self.eps;
        self.jump_centres().iter().any(|c| (y - c).abs() <= w)
    }

    /// Envelope value divided by `C`; this is what calibration scales.
    pub fn shape(&self, y: f64) -> f64 {
        if let EnvelopeKind::Zero = self.kind {
            return 0.0;
        }
        if self.near_jump(y) {
            return 1.0 / self.eps;
        }
        match self.kind {
            EnvelopeKind::Bcm { radius } if y.abs() <= radius + self.interior_margin => 1.0,
            _ => 0.0,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.constant * self.shape(y)
    }
}

impl PairKernel for LipschitzEnvelope {
    fn eval(&self, d: f64) -> f64 {
        LipschitzEnvelope::eval(self, d)
    }

    fn segments(&self) -> Vec<Segment> {
        let w = 4.0 * self.eps;
        let hot = self.constant / self.eps;
        // merge overlapping jump neighbourhoods
        let mut spikes: Vec<(f64, f64)> = Vec::new();
        for c in self.jump_centres() {
            match spikes.last_mut() {
                Some(last) if c - w <= last.1 => last.1 = c + w,
                _ => spikes.push((c - w, c + w)),
            }
        }
        let background = match self.kind {
            EnvelopeKind::Bcm { radius } => {
                let m = radius + self.interior_margin;
                Some((-m, m))
            }
            _ => None,
        };
        let mut cuts: Vec<f64> = spikes.iter().flat_map(|&(a, b)| [a, b.next_up()]).collect();
        if let Some((a, b)) = background {
            cuts.push(a);
            cuts.push(b.next_up());
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .filter_map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let v = if spikes.iter().any(|&(a, b)| a <= mid && mid <= b) {
                    hot
                } else if background.is_some_and(|(a, b)| a <= mid && mid <= b) {
                    self.constant
                } else {
                    0.0
                };
                (v != 0.0).then_some(Segment {
                    lo: w[0],
                    hi: w[1],
                    value: SegmentValue::Const(v),
                })
            })
            .collect()
    }
}
