use num_complex::Complex64;

use crate::error::Result;
use crate::fields::{ContrastImage, MeasurementVector};
use crate::linalg::CVector;
use crate::nn::{Tensor, UNet};

use super::observation::ObservationMatrix;

/// Map applied after every Landweber step.
#[derive(Debug, Clone, Copy)]
pub enum Regularizer<'a> {
    /// Complex soft-thresholding at level δ.
    SoftThreshold(f64),
    /// Plain Landweber.
    Identity,
    /// Learned denoiser acting on the (re, im) image.
    Network(&'a UNet),
}

impl Regularizer<'_> {
    pub fn apply(&self, t: ContrastImage) -> Result<ContrastImage> {
        match self {
            Regularizer::SoftThreshold(delta) => Ok(ContrastImage {
                t: soft_threshold(&t.t, *delta),
                ..t
            }),
            Regularizer::Identity => Ok(t),
            Regularizer::Network(net) => {
                let input = Tensor::from_contrast(&t);
                let output = net.forward(&input)?;
                output.to_contrast()
            }
        }
    }
}

/// Elementwise `z/|z| · max(|z| − δ, 0)`, with zero mapped to zero.
pub fn soft_threshold(z: &CVector, delta: f64) -> CVector {
    z.mapv(|v| {
        let size = v.norm();
        if size <= delta || size == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            v * ((size - delta) / size)
        }
    })
}

/// `t − γ hᴴ(h t − e_mea)`
pub fn landweber_step(
    h: &ObservationMatrix,
    t: &ContrastImage,
    e_mea: &MeasurementVector,
    gamma: f64,
) -> Result<ContrastImage> {
    h.check(t, e_mea)?;
    let residual = h.apply(t) - &e_mea.data;
    let gradient = h.apply_adjoint(&residual);
    Ok(ContrastImage {
        t: &t.t - &(gradient * Complex64::new(gamma, 0.0)),
        ..*t
    })
}

/// `n_lwb` rounds of Landweber followed by the regularizer, from `t0`.
pub fn tista(
    h: &ObservationMatrix,
    e_mea: &MeasurementVector,
    gamma: f64,
    reg: Regularizer<'_>,
    n_lwb: usize,
    t0: &ContrastImage,
) -> Result<ContrastImage> {
    h.check(t0, e_mea)?;
    let mut t = t0.clone();
    for _ in 0..n_lwb {
        t = reg.apply(landweber_step(h, &t, e_mea, gamma)?)?;
    }
    Ok(t)
}
