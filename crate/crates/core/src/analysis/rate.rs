use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares fit of `log statistic = intercept + slope · log N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
    /// Two-sided 95% Student-t band for the slope.
    pub slope_ci95: (f64, f64),
    /// Particle counts whose statistic was exactly zero and was left out.
    pub censored: Vec<f64>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut censored = Vec::new();
    for &(n, s) in points {
        if !(n > 0.0) || !n.is_finite() || !s.is_finite() || s < 0.0 {
            return Err(Error::DegenerateFit(format!("invalid point ({n}, {s})")));
        }
        if s == 0.0 {
            censored.push(n);
        } else {
            x.push(n.ln());
            y.push(s.ln());
        }
    }
    if x.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} usable points after censoring {} zeros; need 3",
            x.len(),
            censored.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all particle counts coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = n - 2.0;
    let slope_stderr = if dof > 0.0 { (sse / dof / sxx).sqrt() } else { f64::NAN };
    let t = StudentsT::new(0.0, 1.0, dof)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    Ok(RateFit {
        x,
        y,
        slope,
        intercept,
        r2,
        slope_stderr,
        slope_ci95: (slope - t * slope_stderr, slope + t * slope_stderr),
        censored,
    })
}
