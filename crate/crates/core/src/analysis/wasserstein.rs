use crate::error::{Error, Result};
use crate::pde::GridDensity;

/// `W_1` between two equal-size empirical measures: the mean gap between
/// order statistics.
pub fn wasserstein1_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// `W_1 = ∫ |F_emp - F_ρ| dx` between a sample and a grid density.
///
/// `F_ρ` is piecewise linear between faces and `F_emp` piecewise constant,
/// so the integral is evaluated exactly on the merged breakpoints.
pub fn wasserstein1_vs_density(sample: &[f64], rho: &GridDensity) -> Result<f64> {
    let grid = rho.grid;
    if let Some(&bad) = sample.iter().find(|&&x| !grid.contains(x)) {
        return Err(Error::OutOfDomain {
            position: bad,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
        });
    }
    if sample.is_empty() {
        return Err(Error::config("sample", "empty sample"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let faces = rho.face_cdf();
    let total = faces[faces.len() - 1];
    let cdf_at = |x: f64, j: usize| {
        // x within cell j
        let w = ((x - grid.face(j)) / grid.dx()).clamp(0.0, 1.0);
        (faces[j] + w * (faces[j + 1] - faces[j])) / total
    };

    let mut integral = 0.0;
    let mut next_sample = 0;
    for j in 0..grid.cells() {
        let (lo, hi) = (grid.face(j), grid.face(j + 1));
        // breakpoints inside this cell
        let mut p = lo;
        while next_sample < xs.len() && xs[next_sample] <= lo {
            next_sample += 1;
        }
        let mut count = next_sample;
        while p < hi {
            let q = if count < xs.len() && xs[count] < hi { xs[count] } else { hi };
            let level = count as f64 / n;
            integral += gap_integral(cdf_at(p, j) - level, cdf_at(q, j) - level, q - p);
            p = q;
            while count < xs.len() && xs[count] <= p {
                count += 1;
            }
        }
        next_sample = count;
    }
    Ok(integral)
}

/// `∫_0^w |d0 + (d1 - d0) s / w| ds`
fn gap_integral(d0: f64, d1: f64, width: f64) -> f64 {
    if width <= 0.0 {
        return 0.0;
    }
    if d0 * d1 >= 0.0 {
        0.5 * (d0.abs() + d1.abs()) * width
    } else {
        width * (d0 * d0 + d1 * d1) / (2.0 * (d0.abs() + d1.abs()))
    }
}
