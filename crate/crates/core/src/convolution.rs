//! Fast products with the domain operator.
//!
//! Domain coupling between two pixels depends only on `(|Δx|, |Δy|)`, so the
//! operator is block Toeplitz with Toeplitz blocks. Embedding it in a
//! `2ny × 2nx` circulant turns each product into two 2D FFTs and a pointwise
//! multiply.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::linalg::CVector;

#[derive(Clone)]
pub struct DomainConvolution {
    nx: usize,
    ny: usize,
    /// Spectrum of the circulant embedding, `(2ny, 2nx)` row-major, with the
    /// inverse-transform normalization folded in.
    spectrum: Vec<Complex64>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DomainConvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainConvolution")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish_non_exhaustive()
    }
}

impl DomainConvolution {
    /// `table[[|Δy|, |Δx|]]` is the coupling between pixels at that offset.
    pub fn new(table: &Array2<Complex64>) -> Self {
        let (ny, nx) = table.dim();
        let (py, px) = (2 * ny, 2 * nx);
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(px);
        let row_inv = planner.plan_fft_inverse(px);
        let col_fwd = planner.plan_fft_forward(py);
        let col_inv = planner.plan_fft_inverse(py);

        let wrap = |i: usize, n: usize, p: usize| -> Option<usize> {
            match i {
                i if i < n => Some(i),
                i if i == n => None,
                i => Some(p - i),
            }
        };
        let mut spectrum = vec![Complex64::new(0.0, 0.0); py * px];
        for iy in 0..py {
            for ix in 0..px {
                if let (Some(dy), Some(dx)) = (wrap(iy, ny, py), wrap(ix, nx, px)) {
                    spectrum[iy * px + ix] = table[[dy, dx]];
                }
            }
        }
        let mut conv = Self {
            nx,
            ny,
            spectrum: Vec::new(),
            row_fwd,
            row_inv,
            col_fwd,
            col_inv,
        };
        conv.transform(&mut spectrum, py, false);
        let scale = 1.0 / (py * px) as f64;
        spectrum.iter_mut().for_each(|z| *z *= scale);
        conv.spectrum = spectrum;
        conv
    }

    pub fn pixel_count(&self) -> usize {
        self.nx * self.ny
    }

    /// 2D transform of a `(2ny, 2nx)` buffer. The row pass covers only the
    /// first `live_rows` rows: on the way in the rest are zero padding, on
    /// the way out they are discarded.
    fn transform(&self, buf: &mut [Complex64], live_rows: usize, inverse: bool) {
        let (py, px) = (2 * self.ny, 2 * self.nx);
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        if !inverse {
            row.process(&mut buf[..live_rows * px]);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); py];
        for ix in 0..px {
            for iy in 0..py {
                column[iy] = buf[iy * px + ix];
            }
            col.process(&mut column);
            for iy in 0..py {
                buf[iy * px + ix] = column[iy];
            }
        }
        if inverse {
            row.process(&mut buf[..live_rows * px]);
        }
    }

    /// `y[p] = Σ_q coupling(p, q) x[q]` over the `nx × ny` grid.
    pub fn apply(&self, x: ArrayView1<Complex64>) -> CVector {
        let (nx, ny) = (self.nx, self.ny);
        let px = 2 * nx;
        assert_eq!(x.len(), nx * ny, "vector length does not match the grid");
        let mut buf = vec![Complex64::new(0.0, 0.0); 4 * nx * ny];
        for (iy, chunk) in buf.chunks_mut(px).take(ny).enumerate() {
            for ix in 0..nx {
                chunk[ix] = x[iy * nx + ix];
            }
        }
        self.transform(&mut buf, ny, false);
        buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b *= s);
        // Only the first ny output rows are needed.
        self.transform(&mut buf, ny, true);
        let mut y = CVector::zeros(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                y[iy * nx + ix] = buf[iy * px + ix];
            }
        }
        y
    }
}
