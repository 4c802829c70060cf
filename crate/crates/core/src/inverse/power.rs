use ndarray::{Array1, ArrayView2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{matvec, matvec_adjoint, norm2, norm2_sqr, CVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    /// Estimated largest singular value.
    pub sigma: f64,
    /// Landweber step length `1 / σ²`.
    pub gamma: f64,
}

/// Estimates the largest singular value of `h` with `n_pow` power steps on
/// the Gram operator `hᴴh`, from a seeded Gaussian start vector. The
/// estimate is the Rayleigh quotient `‖h v‖²` of the final unit iterate, so
/// it never exceeds the true value.
pub fn power_iteration(h: ArrayView2<Complex64>, n_pow: usize, seed: u64) -> Result<SpectralEstimate> {
    if n_pow == 0 {
        return Err(Error::Contract("power iteration needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: CVector = Array1::from_shape_fn(h.ncols(), |_| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let start_norm = norm2(v.view());
    v.mapv_inplace(|z| z / start_norm);

    for _ in 0..n_pow {
        let w = matvec_adjoint(h, matvec(h, v.view()).view());
        let size = norm2(w.view());
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::Numerical(format!(
                "power iteration collapsed (‖hᴴh v‖ = {size}); step length undefined"
            )));
        }
        v = w.mapv(|z| z / size);
    }

    let sigma_sq = norm2_sqr(matvec(h, v.view()).view());
    if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
        return Err(Error::Numerical(format!("largest singular value estimate is {sigma_sq}")));
    }
    Ok(SpectralEstimate {
        sigma: sigma_sq.sqrt(),
        gamma: 1.0 / sigma_sq,
    })
}
