//! Dense complex vector/matrix helpers used across the solvers.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;

pub type CVector = Array1<Complex64>;
pub type CMatrix = Array2<Complex64>;

/// `a · x` for a row-major matrix.
pub fn matvec(a: ArrayView2<Complex64>, x: ArrayView1<Complex64>) -> CVector {
    assert_eq!(a.ncols(), x.len(), "matvec dimension mismatch");
    let x = x.as_standard_layout();
    let xs = x.as_slice().expect("standard layout");
    a.outer_iter()
        .map(|row| match row.as_slice() {
            Some(r) => dot_plain(r, xs),
            None => row.iter().zip(xs).map(|(a, b)| a * b).sum(),
        })
        .collect()
}

/// `aᴴ · y`.
pub fn matvec_adjoint(a: ArrayView2<Complex64>, y: ArrayView1<Complex64>) -> CVector {
    assert_eq!(a.nrows(), y.len(), "adjoint matvec dimension mismatch");
    let mut out = vec![Complex64::new(0.0, 0.0); a.ncols()];
    for (row, yi) in a.outer_iter().zip(y.iter()) {
        match row.as_slice() {
            Some(r) => {
                for (o, aij) in out.iter_mut().zip(r) {
                    *o += aij.conj() * yi;
                }
            }
            None => {
                for (o, aij) in out.iter_mut().zip(row.iter()) {
                    *o += aij.conj() * yi;
                }
            }
        }
    }
    Array1::from(out)
}

fn dot_plain(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // Separate real/imaginary accumulators vectorize better than Complex sums.
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re - x.im * y.im;
        im += x.re * y.im + x.im * y.re;
    }
    Complex64::new(re, im)
}

/// `Σ conj(a_k) b_k`.
pub fn dotc(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(x: ArrayView1<Complex64>) -> f64 {
    norm2_sqr(x).sqrt()
}

pub fn norm2_sqr(x: ArrayView1<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm1(x: ArrayView1<Complex64>) -> f64 {
    x.iter().map(|z| z.norm()).sum()
}

pub fn all_finite(x: ArrayView1<Complex64>) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
