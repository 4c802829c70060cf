use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::ContrastImage;

/// Channel-major `(C, H, W)` float32 image.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::Contract(format!(
                "tensor data has {} values, shape is {channels}×{height}×{width}",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    /// Two channels: real part, then imaginary part.
    pub fn from_contrast(t: &ContrastImage) -> Self {
        let mut data = Vec::with_capacity(2 * t.len());
        data.extend(t.t.iter().map(|z| z.re as f32));
        data.extend(t.t.iter().map(|z| z.im as f32));
        Self {
            channels: 2,
            height: t.ny,
            width: t.nx,
            data,
        }
    }

    pub fn to_contrast(&self) -> Result<ContrastImage> {
        if self.channels != 2 {
            return Err(Error::Contract(format!(
                "contrast needs a 2-channel tensor, got {} channels",
                self.channels
            )));
        }
        let (re, im) = (self.plane(0), self.plane(1));
        let t = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r as f64, i as f64))
            .collect();
        ContrastImage::new(t, self.width, self.height)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
