//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use bimlab::fields::FieldSet;
use bimlab::greens::GreensOperators;
use bimlab::linalg::CMatrix;
use bimlab::nn::{Kernel, Tensor};
use bimlab::{Complex64, ContrastImage};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_shape_fn((rows, cols), |_| complex_gaussian(rng))
}

pub fn to_nalgebra(a: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Largest singular value from a full dense SVD.
pub fn sigma_max(a: &CMatrix) -> f64 {
    to_nalgebra(a).singular_values().max()
}

/// Total fields from a dense LU solve of `(I + A D(t)) e = e_inc`.
pub fn dense_state_solve(ops: &GreensOperators, t: &ContrastImage, e_inc: &FieldSet) -> Vec<Vec<Complex64>> {
    let n = ops.pixel_count();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        delta + ops.a_dom[[i, j]] * t.t[j]
    });
    let lu = m.lu();
    e_inc
        .per_tx
        .iter()
        .map(|e| {
            let rhs = DVector::from_iterator(n, e.iter().copied());
            lu.solve(&rhs).expect("nonsingular state matrix").iter().copied().collect()
        })
        .collect()
}

pub fn rel_error_c(x: &[Complex64], reference: &[Complex64]) -> f64 {
    let diff: f64 = x.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
    (diff / norm).sqrt()
}

pub fn rel_error_f(x: &[f32], reference: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(reference).map(|(&a, b)| (a as f64 - b).powi(2)).sum();
    let norm: f64 = reference.iter().map(|b| b * b).sum();
    (diff / norm).sqrt()
}

pub fn random_tensor(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Tensor {
    Tensor::new(c, h, w, (0..c * h * w).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()).unwrap()
}

pub fn random_kernel(rng: &mut ChaCha8Rng, o: usize, i: usize, k: usize) -> (Kernel, Vec<f32>) {
    let data = (0..o * i * k * k).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
    let bias = (0..o).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
    (Kernel::new(o, i, k, k, data).unwrap(), bias)
}

/// Direct-sum cross-correlation with zero padding, accumulated in f64.
pub fn naive_conv(x: &Tensor, k: &Kernel, bias: &[f32]) -> Vec<f64> {
    let (h, w) = (x.height as isize, x.width as isize);
    let (ph, pw) = ((k.kh / 2) as isize, (k.kw / 2) as isize);
    let mut out = Vec::with_capacity(k.out_ch * x.height * x.width);
    for o in 0..k.out_ch {
        for y in 0..h {
            for xx in 0..w {
                let mut acc = bias[o] as f64;
                for i in 0..k.in_ch {
                    for ky in 0..k.kh {
                        for kx in 0..k.kw {
                            let sy = y + ky as isize - ph;
                            let sx = xx + kx as isize - pw;
                            if sy < 0 || sx < 0 || sy >= h || sx >= w {
                                continue;
                            }
                            let wv = k.data[((o * k.in_ch + i) * k.kh + ky) * k.kw + kx] as f64;
                            acc += wv * x.at(i, sy as usize, sx as usize) as f64;
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    out
}

/// Each input pixel deposits `kernel · value` into its own 2×2 output block.
pub fn scatter_upconv(x: &Tensor, k: &Kernel, bias: &[f32]) -> Vec<f64> {
    let (oh, ow) = (2 * x.height, 2 * x.width);
    let mut out = vec![0.0f64; k.out_ch * oh * ow];
    for o in 0..k.out_ch {
        for v in &mut out[o * oh * ow..(o + 1) * oh * ow] {
            *v = bias[o] as f64;
        }
    }
    for i in 0..k.in_ch {
        for y in 0..x.height {
            for xx in 0..x.width {
                let value = x.at(i, y, xx) as f64;
                for o in 0..k.out_ch {
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let wv = k.data[((o * k.in_ch + i) * 2 + dy) * 2 + dx] as f64;
                            out[(o * oh + 2 * y + dy) * ow + 2 * xx + dx] += wv * value;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Reference Hankel table rows `(x, J0, Y0, J1, Y1)`.
pub fn hankel_reference() -> Vec<[f64; 5]> {
    let bytes = std::fs::read(fixture("hankel_reference.bin")).expect("hankel fixture");
    bytes
        .chunks_exact(40)
        .map(|row| {
            let mut out = [0.0; 5];
            for (k, v) in out.iter_mut().enumerate() {
                *v = f64::from_le_bytes(row[8 * k..8 * k + 8].try_into().unwrap());
            }
            out
        })
        .collect()
}
