//! Float32 inference for the U-net regularizer and its weight bundles.

mod layers;
mod parity;
mod tensor;
mod unet;
mod weights;

pub use layers::{concat_channels, conv2d, maxpool2, relu_inplace, upconv2, Kernel};
pub use parity::{check_parity, ParityReport, ParityVectors};
pub use tensor::Tensor;
pub use unet::{unet_forward, ArchSpec, UNet, LAYERS};
pub use weights::{load_bundle_set, save_bundle_set, BundleMeta, UNetWeights, WeightTensor};
