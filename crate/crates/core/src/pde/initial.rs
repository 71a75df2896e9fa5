use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::stochastics::standard_normal_quantile;

/// Probability density of the initial particle positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDensity {
    Gaussian { mean: f64, sd: f64 },
    UniformBox { a: f64, b: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub density: InitialDensity,
}

impl Default for InitialDensity {
    fn default() -> Self {
        InitialDensity::Gaussian { mean: 0.0, sd: 1.0 }
    }
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

impl InitialDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialDensity::Gaussian { mean, sd } => {
                if !mean.is_finite() || !(*sd > 0.0) || !sd.is_finite() {
                    return Err(Error::config("rho0", format!("gaussian needs finite mean and sd > 0, got ({mean}, {sd})")));
                }
            }
            InitialDensity::UniformBox { a, b } => {
                if !a.is_finite() || !b.is_finite() || !(b > a) {
                    return Err(Error::config("rho0", format!("box needs a < b, got [{a}, {b}]")));
                }
            }
            InitialDensity::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::config("rho0.components", "mixture needs at least one component"));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if components.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-12 {
                    return Err(Error::config(
                        "rho0.components",
                        format!("weights must be positive and sum to 1, got {total}"),
                    ));
                }
                for c in components {
                    c.density.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            InitialDensity::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                FRAC_1_SQRT_2PI / sd * (-0.5 * z * z).exp()
            }
            InitialDensity::UniformBox { a, b } => {
                if (*a..=*b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            InitialDensity::Mixture { components } => components.iter().map(|c| c.weight * c.density.pdf(x)).sum(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            InitialDensity::Gaussian { mean, sd } => upper_tail(-(x - mean) / sd),
            InitialDensity::UniformBox { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            InitialDensity::Mixture { components } => components.iter().map(|c| c.weight * c.density.cdf(x)).sum(),
        }
    }

    /// `P(lo < X <= hi)`, computed from the nearer tail to avoid cancellation.
    pub fn prob_between(&self, lo: f64, hi: f64) -> f64 {
        match self {
            InitialDensity::Gaussian { mean, sd } => {
                let (zl, zh) = ((lo - mean) / sd, (hi - mean) / sd);
                if zl >= 0.0 {
                    upper_tail(zl) - upper_tail(zh)
                } else {
                    upper_tail(-zh) - upper_tail(-zl)
                }
            }
            InitialDensity::Mixture { components } => {
                components.iter().map(|c| c.weight * c.density.prob_between(lo, hi)).sum()
            }
            InitialDensity::UniformBox { .. } => self.cdf(hi) - self.cdf(lo),
        }
    }

    /// Inverse CDF; bisection to 1e-12 for mixtures.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            InitialDensity::Gaussian { mean, sd } => mean + sd * standard_normal_quantile(p),
            InitialDensity::UniformBox { a, b } => a + (b - a) * p,
            InitialDensity::Mixture { components } => {
                let (mut lo, mut hi) = components
                    .iter()
                    .map(|c| c.density.quantile(p))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), q| (l.min(q), h.max(q)));
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            InitialDensity::Gaussian { mean, .. } => *mean,
            InitialDensity::UniformBox { a, b } => 0.5 * (a + b),
            InitialDensity::Mixture { components } => components.iter().map(|c| c.weight * c.density.mean()).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            InitialDensity::Gaussian { sd, .. } => sd * sd,
            InitialDensity::UniformBox { a, b } => (b - a).powi(2) / 12.0,
            InitialDensity::Mixture { components } => {
                let m = self.mean();
                components
                    .iter()
                    .map(|c| c.weight * (c.density.variance() + (c.density.mean() - m).powi(2)))
                    .sum()
            }
        }
    }
}
