//! Discrete Fourier transform facility for periodic grids.
//!
//! Wraps `rustfft` with axis-by-axis application on 1/2/3-D data in
//! x-fastest order. The inverse transform carries the `1/n^dims`
//! normalization, so `inverse(forward(v)) == v` up to round-off.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

/// Planned forward/inverse transforms for one grid size.
pub struct Dft {
    n: usize,
    dims: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(n: usize, dims: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Self {
            n,
            dims,
            forward,
            inverse,
        }
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.n(), grid.dims())
    }

    /// Forward transform of real nodal data.
    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for axis in 0..self.dims {
            self.transform_axis(&mut data, axis, &self.forward);
        }
        data
    }

    /// Inverse transform back to real nodal data (normalized, real part).
    pub fn inverse_real(&self, mut freq: Vec<Complex64>) -> Vec<f64> {
        for axis in 0..self.dims {
            self.transform_axis(&mut freq, axis, &self.inverse);
        }
        let scale = 1.0 / freq.len() as f64;
        freq.iter().map(|c| c.re * scale).collect()
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let stride = n.pow(axis as u32);
        let block = stride * n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + off + i * stride];
                }
                plan.process(&mut line);
                for (i, slot) in line.iter().enumerate() {
                    data[base + off + i * stride] = *slot;
                }
            }
        }
    }
}

/// Signed integer mode of transform bin `j` on an `n`-point axis.
pub fn signed_mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Squared wavenumber `|k|^2` for every flat index, with
/// `k_d = 2 pi m_d / L` and `m_d` the signed mode along axis d.
pub fn wavenumber_sq(grid: &Grid) -> Vec<f64> {
    let n = grid.n();
    let dims = grid.dims();
    let unit = 2.0 * std::f64::consts::PI / grid.len();
    let axis_sq: Vec<f64> = (0..n)
        .map(|j| {
            let k = unit * signed_mode(j, n) as f64;
            k * k
        })
        .collect();
    let mut out = Vec::with_capacity(grid.num_nodes());
    for flat in 0..grid.num_nodes() {
        let ix = grid.unravel(flat);
        let mut sum = 0.0;
        for d in 0..dims {
            sum += axis_sq[ix[d]];
        }
        out.push(sum);
    }
    out
}
