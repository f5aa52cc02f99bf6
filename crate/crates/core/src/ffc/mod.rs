//! Inference-only Fast Fourier Convolution.
//!
//! A block splits its channels into a local stream processed by 3×3
//! convolutions and a global stream processed in the frequency domain by the
//! spectral transform, exchanging information between the two.

mod block;
mod ops;
mod tensor;
mod weights;

pub use block::{ffc_forward, BlockKind, BlockSpec, FfcNetwork, FfcWeights, ShapeTrace};
pub use ops::{
    avg_pool2, irfft2_stacked, relu, rfft2_stacked, rfft_bins, spectral_transform, upsample_nearest2, Affine, Conv1x1,
    Conv3x3, SpectralTransformWeights,
};
pub use tensor::{
    concat_channels, decode_tensor, encode_tensor, global_channel_count, read_tensor, split_channels, write_tensor,
    FeatureTensor, RawTensor, TENSOR_MAGIC,
};
pub use weights::{decode_weights, encode_weights, read_weights, write_weights, WEIGHTS_MAGIC, WEIGHTS_VERSION};
