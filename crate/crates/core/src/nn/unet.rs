use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::layers::{concat_channels, conv2d, maxpool2, relu_inplace, upconv2, Kernel};
use super::tensor::Tensor;
use super::weights::UNetWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: &'static str,
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
}

const fn layer(name: &'static str, in_ch: usize, out_ch: usize, kernel: usize) -> LayerSpec {
    LayerSpec {
        name,
        in_ch,
        out_ch,
        kernel,
    }
}

/// Every parameterized layer of the network, in bundle order. Kernels are
/// stored `(out_ch, in_ch, k, k)`, including the transposed convolutions.
pub const LAYERS: [LayerSpec; 13] = [
    layer("enc1.conv1", 2, 16, 3),
    layer("enc1.conv2", 16, 16, 3),
    layer("enc2.conv1", 16, 32, 3),
    layer("enc2.conv2", 32, 32, 3),
    layer("bott.conv1", 32, 64, 3),
    layer("bott.conv2", 64, 64, 3),
    layer("up1.deconv", 64, 32, 2),
    layer("dec1.conv1", 64, 32, 3),
    layer("dec1.conv2", 32, 32, 3),
    layer("up2.deconv", 32, 16, 2),
    layer("dec2.conv1", 32, 16, 3),
    layer("dec2.conv2", 16, 16, 3),
    layer("out.conv", 16, 2, 1),
];

/// Architecture description recorded alongside weight bundles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub name: String,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub filters: Vec<usize>,
    pub pool: usize,
    pub upconv: usize,
    pub activation: String,
    pub output: String,
    pub concat: String,
}

impl ArchSpec {
    pub fn reference() -> Self {
        Self {
            name: "unet2".into(),
            in_channels: 2,
            out_channels: 2,
            kernel_size: 3,
            filters: vec![16, 32, 64],
            pool: 2,
            upconv: 2,
            activation: "relu".into(),
            output: "linear".into(),
            concat: "skip_first".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Conv {
    kernel: Kernel,
    bias: Vec<f32>,
}

impl Conv {
    fn conv(&self, x: &Tensor) -> Result<Tensor> {
        conv2d(x, &self.kernel, &self.bias)
    }

    fn conv_relu(&self, x: &Tensor) -> Result<Tensor> {
        let mut y = self.conv(x)?;
        relu_inplace(&mut y);
        Ok(y)
    }

    fn up(&self, x: &Tensor) -> Result<Tensor> {
        upconv2(x, &self.kernel, &self.bias)
    }
}

/// Two-level U-net: 3×3 convolutions with rectifiers, 2×2 max pooling,
/// 2×2 stride-2 transposed convolutions, skip connections concatenated
/// before the upsampled channels, and a linear 1×1 output head.
#[derive(Debug, Clone)]
pub struct UNet {
    layers: Vec<Conv>,
}

impl UNet {
    pub fn from_weights(weights: &UNetWeights) -> Result<Self> {
        weights.validate()?;
        let layers = LAYERS
            .iter()
            .map(|spec| {
                let kernel = weights.tensor(&format!("{}.kernel", spec.name))?;
                let bias = weights.tensor(&format!("{}.bias", spec.name))?;
                Ok(Conv {
                    kernel: Kernel::new(spec.out_ch, spec.in_ch, spec.kernel, spec.kernel, kernel.data.clone())?,
                    bias: bias.data.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    /// Two pooling levels need both image sides divisible by four.
    pub fn check_grid(height: usize, width: usize) -> Result<()> {
        if height == 0 || width == 0 || !height.is_multiple_of(4) || !width.is_multiple_of(4) {
            return Err(Error::Contract(format!(
                "U-net input {height}×{width} must have sides divisible by 4"
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        if input.channels != 2 {
            return Err(Error::Contract(format!(
                "U-net expects 2 input channels, got {}",
                input.channels
            )));
        }
        Self::check_grid(input.height, input.width)?;
        let l = &self.layers;

        let e1 = l[1].conv_relu(&l[0].conv_relu(input)?)?;
        let e2 = l[3].conv_relu(&l[2].conv_relu(&maxpool2(&e1)?)?)?;
        let b = l[5].conv_relu(&l[4].conv_relu(&maxpool2(&e2)?)?)?;

        let c1 = concat_channels(&e2, &l[6].up(&b)?)?;
        let d1 = l[8].conv_relu(&l[7].conv_relu(&c1)?)?;

        let c2 = concat_channels(&e1, &l[9].up(&d1)?)?;
        let d2 = l[11].conv_relu(&l[10].conv_relu(&c2)?)?;

        l[12].conv(&d2)
    }
}

pub fn unet_forward(weights: &UNetWeights, input: &Tensor) -> Result<Tensor> {
    UNet::from_weights(weights)?.forward(input)
}
