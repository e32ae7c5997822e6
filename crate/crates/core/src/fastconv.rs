//! FFT evaluation of translation-invariant operators.
//!
//! When the weights depend only on `x_i - x_j`, `sum_j w_ij u_j` is a
//! discrete convolution. It is evaluated on a zero-padded grid of twice the
//! size per axis so that the circular convolution has no wrap-around.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::operator::NonlocalOperator;

/// Precomputed kernel spectrum and diagonal of one operator.
pub struct ConvolutionPlan {
    grid: Grid,
    /// Padded length per axis.
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex64>,
    /// `sum_j w_ij + kappa_i`.
    diagonal: Vec<f64>,
}

impl std::fmt::Debug for ConvolutionPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionPlan")
            .field("grid", &self.grid)
            .field("padded", &self.m)
            .finish()
    }
}

impl ConvolutionPlan {
    pub fn new(op: &NonlocalOperator) -> Result<Self> {
        if !op.meta().translation_invariant {
            return Err(Error::InapplicableStructure(format!(
                "operator for coefficient `{}` is not translation invariant",
                op.meta().coefficient
            )));
        }
        let grid = *op.grid();
        let n = grid.n_per_axis();
        let d = grid.dimension();
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);

        // Stencil g(a) = w_ij for any pair with index offset i - j = a, read
        // from the dense matrix so both paths share the same weights.
        let wrap = |a: isize| -> usize { a.rem_euclid(m as isize) as usize };
        let mut kernel = vec![Complex64::new(0.0, 0.0); m.pow(d as u32)];
        match d {
            1 => {
                for a in -(n as isize - 1)..=(n as isize - 1) {
                    let (i, j) = (a.max(0) as usize, (-a).max(0) as usize);
                    kernel[wrap(a)] = Complex64::new(op.weight(i, j), 0.0);
                }
            }
            _ => {
                let flat = |p: usize, q: usize| p * n + q;
                for a in -(n as isize - 1)..=(n as isize - 1) {
                    for b in -(n as isize - 1)..=(n as isize - 1) {
                        let i = flat(a.max(0) as usize, b.max(0) as usize);
                        let j = flat((-a).max(0) as usize, (-b).max(0) as usize);
                        kernel[wrap(a) * m + wrap(b)] = Complex64::new(op.weight(i, j), 0.0);
                    }
                }
            }
        }
        let mut plan = Self {
            grid,
            m,
            forward,
            inverse,
            spectrum: Vec::new(),
            diagonal: Vec::new(),
        };
        plan.transform(&mut kernel, true);
        plan.spectrum = kernel;
        plan.diagonal = (0..op.len())
            .map(|i| op.row(i).iter().sum::<f64>() + op.killing()[i])
            .collect();
        Ok(plan)
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let fft = if forward { &self.forward } else { &self.inverse };
        let m = self.m;
        match self.grid.dimension() {
            1 => fft.process(data),
            _ => {
                for row in data.chunks_mut(m) {
                    fft.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); m];
                for c in 0..m {
                    for r in 0..m {
                        col[r] = data[r * m + c];
                    }
                    fft.process(&mut col);
                    for r in 0..m {
                        data[r * m + c] = col[r];
                    }
                }
            }
        }
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(u.grid())?;
        let n = self.grid.n_per_axis();
        let m = self.m;
        let d = self.grid.dimension();
        let mut buf = vec![Complex64::new(0.0, 0.0); m.pow(d as u32)];
        let pos = |i: usize| -> usize {
            match d {
                1 => i,
                _ => (i / n) * m + i % n,
            }
        };
        for (i, &v) in u.values().iter().enumerate() {
            buf[pos(i)] = Complex64::new(v, 0.0);
        }
        self.transform(&mut buf, true);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.transform(&mut buf, false);
        let scale = 1.0 / buf.len() as f64;
        let out = u
            .values()
            .iter()
            .enumerate()
            .map(|(i, &ui)| buf[pos(i)].re * scale - self.diagonal[i] * ui)
            .collect();
        GridFunction::new(self.grid, out)
    }
}

/// `L u` through the convolution structure; errors unless the operator is
/// translation invariant.
pub fn fast_apply_convolution(op: &NonlocalOperator, u: &GridFunction) -> Result<GridFunction> {
    ConvolutionPlan::new(op)?.apply(u)
}
