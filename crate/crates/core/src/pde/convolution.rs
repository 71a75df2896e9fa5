use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::Grid1D;
use crate::kernels::PairKernel;
use crate::par::Execution;

/// Grid size from which [`ConvolutionMethod::Auto`] switches to the FFT path.
pub const FFT_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMethod {
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Midpoint-rule convolution `c_j = dx Σ_m f(x_j - x_m) ρ_m` on a fixed grid.
///
/// The offsets `x_j - x_m` are multiples of `dx`, so `f` is tabulated once
/// and the sum is a Toeplitz product, done directly or by zero-padded FFT.
pub struct ConvolutionPlan {
    cells: usize,
    dx: f64,
    table: Vec<f64>,
    fft: Option<FftPath>,
}

struct FftPath {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex<f64>>,
}

impl std::fmt::Debug for ConvolutionPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionPlan")
            .field("cells", &self.cells)
            .field("dx", &self.dx)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

impl ConvolutionPlan {
    pub fn new<K: PairKernel + ?Sized>(kernel: &K, grid: &Grid1D, method: ConvolutionMethod) -> Self {
        let m = grid.cells();
        let dx = grid.dx();
        // table[s] = f((s - (m-1)) dx)
        let table: Vec<f64> = (0..2 * m - 1)
            .map(|s| kernel.eval((s as f64 - (m as f64 - 1.0)) * dx))
            .collect();
        let use_fft = match method {
            ConvolutionMethod::Auto => m >= FFT_THRESHOLD,
            ConvolutionMethod::Direct => false,
            ConvolutionMethod::Fft => true,
        };
        let fft = use_fft.then(|| {
            let size = (2 * m - 1).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut kernel_hat: Vec<Complex<f64>> = table.iter().map(|&v| Complex::new(v, 0.0)).collect();
            kernel_hat.resize(size, Complex::new(0.0, 0.0));
            forward.process(&mut kernel_hat);
            FftPath {
                forward,
                inverse,
                kernel_hat,
            }
        });
        ConvolutionPlan { cells: m, dx, table, fft }
    }

    pub fn uses_fft(&self) -> bool {
        self.fft.is_some()
    }

    pub fn apply(&self, rho: &[f64], exec: Execution) -> Vec<f64> {
        assert_eq!(rho.len(), self.cells, "density length does not match the plan");
        match &self.fft {
            Some(path) => self.apply_fft(path, rho),
            None => self.apply_direct(rho, exec),
        }
    }

    fn apply_direct(&self, rho: &[f64], exec: Execution) -> Vec<f64> {
        let m = self.cells;
        let mut out = vec![0.0; m];
        exec.fill(&mut out, |j| {
            // offset index s = j - k + m - 1 runs downward as k increases
            let row = &self.table[j..j + m];
            self.dx * row.iter().rev().zip(rho).map(|(t, r)| t * r).sum::<f64>()
        });
        out
    }

    fn apply_fft(&self, path: &FftPath, rho: &[f64]) -> Vec<f64> {
        let m = self.cells;
        let size = path.kernel_hat.len();
        let mut buf: Vec<Complex<f64>> = rho.iter().map(|&v| Complex::new(v, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        path.forward.process(&mut buf);
        buf.iter_mut().zip(&path.kernel_hat).for_each(|(b, k)| *b *= k);
        path.inverse.process(&mut buf);
        let scale = self.dx / size as f64;
        buf[m - 1..2 * m - 1].iter().map(|c| c.re * scale).collect()
    }
}
