use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Convolution kernel laid out `(out_ch, in_ch, kh, kw)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub out_ch: usize,
    pub in_ch: usize,
    pub kh: usize,
    pub kw: usize,
    pub data: Vec<f32>,
}

impl Kernel {
    pub fn new(out_ch: usize, in_ch: usize, kh: usize, kw: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != out_ch * in_ch * kh * kw {
            return Err(Error::Contract(format!(
                "kernel data has {} values, shape is {out_ch}×{in_ch}×{kh}×{kw}",
                data.len()
            )));
        }
        Ok(Self {
            out_ch,
            in_ch,
            kh,
            kw,
            data,
        })
    }

    pub fn zeros(out_ch: usize, in_ch: usize, kh: usize, kw: usize) -> Self {
        Self {
            out_ch,
            in_ch,
            kh,
            kw,
            data: vec![0.0; out_ch * in_ch * kh * kw],
        }
    }

    fn tap(&self, o: usize, i: usize, ky: usize, kx: usize) -> f32 {
        self.data[((o * self.in_ch + i) * self.kh + ky) * self.kw + kx]
    }

    fn check(&self, input: &Tensor, bias: &[f32], what: &str) -> Result<()> {
        if self.in_ch != input.channels {
            return Err(Error::Contract(format!(
                "{what}: kernel expects {} input channels, tensor has {}",
                self.in_ch, input.channels
            )));
        }
        if bias.len() != self.out_ch {
            return Err(Error::Contract(format!(
                "{what}: bias has {} entries for {} output channels",
                bias.len(),
                self.out_ch
            )));
        }
        Ok(())
    }
}

/// Stride-1 cross-correlation with "same" zero padding.
pub fn conv2d(input: &Tensor, kernel: &Kernel, bias: &[f32]) -> Result<Tensor> {
    kernel.check(input, bias, "conv2d")?;
    if kernel.kh.is_multiple_of(2) || kernel.kw.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "conv2d: kernel {}×{} must have odd size",
            kernel.kh, kernel.kw
        )));
    }
    let (h, w) = (input.height, input.width);
    let (py, px) = ((kernel.kh / 2) as isize, (kernel.kw / 2) as isize);
    let mut out = Tensor::zeros(kernel.out_ch, h, w);

    for o in 0..kernel.out_ch {
        let plane = out.plane_mut(o);
        plane.fill(bias[o]);
        for i in 0..kernel.in_ch {
            let src = input.plane(i);
            for ky in 0..kernel.kh {
                let dy = ky as isize - py;
                let y_lo = (-dy).max(0) as usize;
                let y_hi = (h as isize - dy).min(h as isize).max(0) as usize;
                for kx in 0..kernel.kw {
                    let weight = kernel.tap(o, i, ky, kx);
                    if weight == 0.0 {
                        continue;
                    }
                    let dx = kx as isize - px;
                    let x_lo = (-dx).max(0) as usize;
                    let x_hi = (w as isize - dx).min(w as isize).max(0) as usize;
                    if x_lo >= x_hi {
                        continue;
                    }
                    for y in y_lo..y_hi {
                        let sy = (y as isize + dy) as usize;
                        let dst = &mut plane[y * w + x_lo..y * w + x_hi];
                        let s0 = (sy * w) as isize + x_lo as isize + dx;
                        let s = &src[s0 as usize..s0 as usize + (x_hi - x_lo)];
                        for (d, v) in dst.iter_mut().zip(s) {
                            *d += weight * v;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// 2×2 max pooling, stride 2.
pub fn maxpool2(input: &Tensor) -> Result<Tensor> {
    let (h, w) = (input.height, input.width);
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::Contract(format!("maxpool2 needs even dimensions, got {h}×{w}")));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor::zeros(input.channels, oh, ow);
    for c in 0..input.channels {
        let src = input.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..oh {
            for x in 0..ow {
                let a = src[2 * y * w + 2 * x];
                let b = src[2 * y * w + 2 * x + 1];
                let d = src[(2 * y + 1) * w + 2 * x];
                let e = src[(2 * y + 1) * w + 2 * x + 1];
                dst[y * ow + x] = a.max(b).max(d.max(e));
            }
        }
    }
    Ok(out)
}

/// Transposed 2×2 convolution with stride 2; every input pixel writes one
/// disjoint 2×2 output block.
pub fn upconv2(input: &Tensor, kernel: &Kernel, bias: &[f32]) -> Result<Tensor> {
    kernel.check(input, bias, "upconv2")?;
    if kernel.kh != 2 || kernel.kw != 2 {
        return Err(Error::Contract(format!(
            "upconv2: kernel must be 2×2, got {}×{}",
            kernel.kh, kernel.kw
        )));
    }
    let (h, w) = (input.height, input.width);
    let ow = 2 * w;
    let mut out = Tensor::zeros(kernel.out_ch, 2 * h, ow);
    for o in 0..kernel.out_ch {
        let dst = out.plane_mut(o);
        dst.fill(bias[o]);
        for i in 0..kernel.in_ch {
            let src = input.plane(i);
            let taps = [
                kernel.tap(o, i, 0, 0),
                kernel.tap(o, i, 0, 1),
                kernel.tap(o, i, 1, 0),
                kernel.tap(o, i, 1, 1),
            ];
            for y in 0..h {
                for x in 0..w {
                    let v = src[y * w + x];
                    let top = 2 * y * ow + 2 * x;
                    let bottom = top + ow;
                    dst[top] += taps[0] * v;
                    dst[top + 1] += taps[1] * v;
                    dst[bottom] += taps[2] * v;
                    dst[bottom + 1] += taps[3] * v;
                }
            }
        }
    }
    Ok(out)
}

pub fn relu_inplace(t: &mut Tensor) {
    for v in &mut t.data {
        *v = v.max(0.0);
    }
}

/// Stacks the channels of `first` then `second`.
pub fn concat_channels(first: &Tensor, second: &Tensor) -> Result<Tensor> {
    if first.height != second.height || first.width != second.width {
        return Err(Error::Contract(format!(
            "cannot concatenate {:?} with {:?}",
            first.shape(),
            second.shape()
        )));
    }
    let mut data = Vec::with_capacity(first.data.len() + second.data.len());
    data.extend_from_slice(&first.data);
    data.extend_from_slice(&second.data);
    Tensor::new(first.channels + second.channels, first.height, first.width, data)
}
