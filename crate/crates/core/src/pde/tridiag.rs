use crate::error::{Error, Result};

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Numerical("tridiagonal system has inconsistent lengths".into()));
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    check_pivot(denom, 0)?;
    c[0] = upper[0] / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        check_pivot(denom, i)?;
        c[i] = upper[i] / denom;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

fn check_pivot(p: f64, i: usize) -> Result<()> {
    if p.is_finite() && p.abs() > f64::EPSILON {
        Ok(())
    } else {
        Err(Error::Numerical(format!("degenerate pivot {p} in row {i}")))
    }
}

/// Pre-factorised backward-Euler operator `I - r Δ` with zero-flux ends.
///
/// Every column sums to one, so the solve conserves `Σ ρ`; the matrix is an
/// M-matrix, so it preserves non-negativity.
#[derive(Debug, Clone)]
pub struct ImplicitDiffusion {
    r: f64,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl ImplicitDiffusion {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        let diag = |i: usize| if i == 0 || i == n - 1 { 1.0 + r } else { 1.0 + 2.0 * r };
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut denom = diag(0);
        check_pivot(denom, 0)?;
        inv_denom[0] = 1.0 / denom;
        c_prime[0] = -r / denom;
        for i in 1..n {
            denom = diag(i) + r * c_prime[i - 1];
            check_pivot(denom, i)?;
            inv_denom[i] = 1.0 / denom;
            c_prime[i] = -r / denom;
        }
        Ok(ImplicitDiffusion { r, c_prime, inv_denom })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        x[0] *= self.inv_denom[0];
        for i in 1..n {
            x[i] = (x[i] + self.r * x[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.c_prime[i] * x[i + 1];
        }
    }
}
