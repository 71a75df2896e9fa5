use serde::{Deserialize, Serialize};

use super::InitialDensity;
use crate::error::{Error, Result};

/// Uniform cell-centred grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    cells: usize,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 16;

    pub fn new(x_min: f64, x_max: f64, cells: usize) -> Result<Self> {
        if cells < Self::MIN_CELLS {
            return Err(Error::config("grid.M", format!("need at least {} cells, got {cells}", Self::MIN_CELLS)));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::config("grid.L", format!("empty domain [{x_min}, {x_max}]")));
        }
        Ok(Grid1D { x_min, x_max, cells })
    }

    /// `[-half_width, half_width]` split into `cells` cells.
    pub fn symmetric(half_width: f64, cells: usize) -> Result<Self> {
        Self::new(-half_width, half_width, cells)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.cells as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }

    pub fn face(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|j| self.center(j)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x)
    }
}

/// Cell averages of a probability density at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub t: f64,
}

impl GridDensity {
    pub fn new(grid: Grid1D, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: grid.cells(),
            });
        }
        Ok(GridDensity { grid, values, t })
    }

    /// Exact cell averages of `rho0` from CDF differences.
    pub fn project(rho0: &InitialDensity, grid: Grid1D) -> Result<Self> {
        rho0.validate()?;
        let dx = grid.dx();
        let values = (0..grid.cells())
            .map(|j| rho0.prob_between(grid.face(j), grid.face(j + 1)) / dx)
            .collect();
        Ok(GridDensity { grid, values, t: 0.0 })
    }

    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Density in the outermost cells.
    pub fn boundary_density(&self) -> f64 {
        self.values[0].abs().max(self.values[self.values.len() - 1].abs())
    }

    /// Cumulative mass at each face, `F[0] = 0`, `F[M] = mass`.
    pub fn face_cdf(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len() + 1);
        out.push(0.0);
        for &v in &self.values {
            acc += v.max(0.0) * dx;
            out.push(acc);
        }
        out
    }

    /// Piecewise-linear CDF, normalised to total mass one.
    pub fn cdf(&self, x: f64) -> f64 {
        let f = self.face_cdf();
        let total = f[f.len() - 1];
        if x <= self.grid.x_min() {
            return 0.0;
        }
        if x >= self.grid.x_max() {
            return 1.0;
        }
        let s = (x - self.grid.x_min()) / self.grid.dx();
        let j = (s.floor() as usize).min(self.grid.cells() - 1);
        let w = s - j as f64;
        (f[j] + w * (f[j + 1] - f[j])) / total
    }

    /// Inverse of [`GridDensity::cdf`].
    pub fn quantile(&self, p: f64) -> f64 {
        let f = self.face_cdf();
        let target = p.clamp(0.0, 1.0) * f[f.len() - 1];
        let k = f.partition_point(|&v| v < target).clamp(1, self.grid.cells());
        let (lo, hi) = (f[k - 1], f[k]);
        let w = if hi > lo { (target - lo) / (hi - lo) } else { 0.5 };
        self.grid.face(k - 1) + w * self.grid.dx()
    }
}
