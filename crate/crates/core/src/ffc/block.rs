//! The two-stream FFC block and sequential block networks.
//!
//! With input split into local `X^l` and global `X^g` channels:
//!
//! ```text
//! Y^l = f_l(X^l) + f_{g→l}(X^g)
//! Y^g = f_g(X^g) + f_{l→g}(X^l)
//! ```
//!
//! `f_l`, `f_{g→l}` and `f_{l→g}` are 3×3 convolutions and `f_g` is the
//! spectral transform. Per-branch normalization and ReLU follow the sums.

use super::ops::{
    avg_pool2, norm_act, spectral_transform, upsample_nearest2, Affine, Conv1x1, Conv3x3, SpectralTransformWeights,
};
use super::tensor::{concat_channels, global_channel_count, split_channels, FeatureTensor};
use crate::error::{Error, Result};

/// Spatial behaviour of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Stride 1; output size equals input size.
    Same,
    /// Stride-2 convolutions; the global branch sees a 2×2 average-pooled
    /// input. Output size is `⌈H/2⌉ × ⌈W/2⌉`.
    Down,
    /// Nearest-neighbour 2× upsampling, then a stride-1 block.
    Up,
}

impl BlockKind {
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::Same => "same",
            BlockKind::Down => "down",
            BlockKind::Up => "up",
        }
    }

    pub fn code(self) -> u32 {
        match self {
            BlockKind::Same => 0,
            BlockKind::Down => 1,
            BlockKind::Up => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(BlockKind::Same),
            1 => Some(BlockKind::Down),
            2 => Some(BlockKind::Up),
            _ => None,
        }
    }
}

/// Shape and flag manifest of one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub in_channels: usize,
    pub out_channels: usize,
    /// Fraction of input channels routed to the global stream.
    pub ratio_in: f64,
    /// Fraction of output channels produced by the global stream.
    pub ratio_out: f64,
    pub norm: bool,
    pub activation: bool,
    /// Adds the block input to its output.
    pub residual: bool,
}

impl BlockSpec {
    /// Stride-1 block with `channels` in and out and no norm, activation or skip.
    pub fn same(channels: usize, ratio: f64) -> Self {
        Self {
            kind: BlockKind::Same,
            in_channels: channels,
            out_channels: channels,
            ratio_in: ratio,
            ratio_out: ratio,
            norm: false,
            activation: false,
            residual: false,
        }
    }

    /// `(local, global)` input channel counts.
    pub fn input_split(&self) -> (usize, usize) {
        let g = global_channel_count(self.in_channels, self.ratio_in);
        (self.in_channels - g, g)
    }

    /// `(local, global)` output channel counts.
    pub fn output_split(&self) -> (usize, usize) {
        let g = global_channel_count(self.out_channels, self.ratio_out);
        (self.out_channels - g, g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::InvalidInput("block channel counts must be positive".into()));
        }
        for r in [self.ratio_in, self.ratio_out] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidInput(format!("global ratio {r} outside [0, 1]")));
            }
        }
        if self.residual
            && (self.kind != BlockKind::Same
                || self.in_channels != self.out_channels
                || self.input_split() != self.output_split())
        {
            return Err(Error::InvalidInput(
                "residual blocks need kind 'same' and matching input/output splits".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters of a single FFC block.
///
/// Each cross-stream path is `None` exactly when its input or output stream
/// has no channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FfcWeights {
    pub spec: BlockSpec,
    pub l2l: Option<Conv3x3>,
    pub g2l: Option<Conv3x3>,
    pub l2g: Option<Conv3x3>,
    pub g2g: Option<SpectralTransformWeights>,
    pub norm_l: Option<Affine>,
    pub norm_g: Option<Affine>,
}

impl FfcWeights {
    /// Builds every parameter of `spec` by calling `fill(name, index)` for
    /// each scalar, in the order they appear in the weight file.
    ///
    /// `hidden` is the spectral transform's inner channel count.
    pub fn from_fn(spec: BlockSpec, hidden: usize, mut fill: impl FnMut(&str, usize) -> f64) -> Result<Self> {
        spec.validate()?;
        let (cli, cgi) = spec.input_split();
        let (clo, cgo) = spec.output_split();
        let mut vec_of = |name: &str, n: usize| -> Vec<f64> { (0..n).map(|i| fill(name, i)).collect() };

        let l2l = conv3(&mut vec_of, "l2l", clo, cli);
        let g2l = conv3(&mut vec_of, "g2l", clo, cgi);
        let l2g = conv3(&mut vec_of, "l2g", cgo, cli);
        let g2g = if cgo > 0 && cgi > 0 {
            if hidden == 0 {
                return Err(Error::InvalidInput("spectral hidden channels must be positive".into()));
            }
            let pre = conv1(&mut vec_of, "g2g.pre", hidden, cgi);
            let pre_norm = spec.norm.then(|| affine(&mut vec_of, "g2g.pre_norm", hidden));
            let freq = conv1(&mut vec_of, "g2g.freq", 2 * hidden, 2 * hidden);
            let freq_norm = spec.norm.then(|| affine(&mut vec_of, "g2g.freq_norm", 2 * hidden));
            let post = conv1(&mut vec_of, "g2g.post", cgo, hidden);
            Some(SpectralTransformWeights {
                pre,
                pre_norm,
                freq,
                freq_norm,
                post,
                activation: spec.activation,
            })
        } else {
            None
        };
        let norm_l = (spec.norm && clo > 0).then(|| affine(&mut vec_of, "norm_l", clo));
        let norm_g = (spec.norm && cgo > 0).then(|| affine(&mut vec_of, "norm_g", cgo));
        Ok(Self {
            spec,
            l2l,
            g2l,
            l2g,
            g2g,
            norm_l,
            norm_g,
        })
    }

    /// All-zero parameters (unit normalization scales).
    pub fn zeros(spec: BlockSpec, hidden: usize) -> Result<Self> {
        Self::from_fn(spec, hidden, |name, _| if name.ends_with(".scale") { 1.0 } else { 0.0 })
    }

    /// A stride-1 block that maps its input to itself: identity `f_l` and
    /// `f_g`, zero cross-stream paths.
    pub fn identity(channels: usize, ratio: f64) -> Result<Self> {
        let spec = BlockSpec::same(channels, ratio);
        let (cl, cg) = spec.input_split();
        let mut w = Self::zeros(spec, cg.max(1))?;
        if let Some(l2l) = &mut w.l2l {
            for c in 0..cl {
                l2l.weight[(c * cl + c) * 9 + 4] = 1.0;
            }
        }
        if cg > 0 {
            w.g2g = Some(SpectralTransformWeights::identity(cg));
        }
        Ok(w)
    }

    pub fn hidden_channels(&self) -> Option<usize> {
        self.g2g.as_ref().map(SpectralTransformWeights::hidden_channels)
    }
}

fn conv3(
    vec_of: &mut impl FnMut(&str, usize) -> Vec<f64>,
    name: &str,
    out_channels: usize,
    in_channels: usize,
) -> Option<Conv3x3> {
    (out_channels > 0 && in_channels > 0).then(|| Conv3x3 {
        out_channels,
        in_channels,
        weight: vec_of(&format!("{name}.weight"), out_channels * in_channels * 9),
        bias: vec_of(&format!("{name}.bias"), out_channels),
    })
}

fn conv1(
    vec_of: &mut impl FnMut(&str, usize) -> Vec<f64>,
    name: &str,
    out_channels: usize,
    in_channels: usize,
) -> Conv1x1 {
    Conv1x1 {
        out_channels,
        in_channels,
        weight: vec_of(&format!("{name}.weight"), out_channels * in_channels),
        bias: vec_of(&format!("{name}.bias"), out_channels),
    }
}

fn affine(vec_of: &mut impl FnMut(&str, usize) -> Vec<f64>, name: &str, n: usize) -> Affine {
    Affine {
        scale: vec_of(&format!("{name}.scale"), n),
        shift: vec_of(&format!("{name}.shift"), n),
    }
}

fn sum_paths(
    a: Option<FeatureTensor>,
    b: Option<FeatureTensor>,
    channels: usize,
    h: usize,
    w: usize,
) -> Result<FeatureTensor> {
    match (a, b) {
        (Some(a), Some(b)) => a.add(&b),
        (Some(t), None) | (None, Some(t)) => Ok(t),
        (None, None) => Ok(FeatureTensor::zeros(channels, h, w)),
    }
}

/// Runs one FFC block.
pub fn ffc_forward(x: &FeatureTensor, weights: &FfcWeights) -> Result<FeatureTensor> {
    let spec = &weights.spec;
    if x.channels() != spec.in_channels {
        return Err(Error::DimensionMismatch(format!(
            "block expects {} input channels, got {}",
            spec.in_channels,
            x.channels()
        )));
    }
    let up;
    let input = if spec.kind == BlockKind::Up {
        up = upsample_nearest2(x);
        &up
    } else {
        x
    };
    let stride = if spec.kind == BlockKind::Down { 2 } else { 1 };
    let (xl, xg) = split_channels(input, spec.ratio_in)?;
    let (clo, cgo) = spec.output_split();
    let (oh, ow) = ((input.height() - 1) / stride + 1, (input.width() - 1) / stride + 1);

    let conv = |k: &Option<Conv3x3>, t: &FeatureTensor| k.as_ref().map(|k| k.forward(t, stride)).transpose();
    let l2l = conv(&weights.l2l, &xl)?;
    let g2l = conv(&weights.g2l, &xg)?;
    let l2g = conv(&weights.l2g, &xl)?;
    let g2g = match &weights.g2g {
        Some(st) if stride == 2 => Some(spectral_transform(&avg_pool2(&xg), st)?),
        Some(st) => Some(spectral_transform(&xg, st)?),
        None => None,
    };

    let mut yl = sum_paths(l2l, g2l, clo, oh, ow)?;
    let mut yg = sum_paths(g2g, l2g, cgo, oh, ow)?;
    norm_act(&mut yl, weights.norm_l.as_ref(), spec.activation);
    norm_act(&mut yg, weights.norm_g.as_ref(), spec.activation);
    let y = concat_channels(&[&yl, &yg])?;
    if spec.residual {
        return y.add(x);
    }
    Ok(y)
}

/// Output shape `(C, H, W)` after each block.
pub type ShapeTrace = Vec<(usize, usize, usize)>;

/// Blocks executed in order.
#[derive(Debug, Clone, PartialEq)]
pub struct FfcNetwork {
    pub blocks: Vec<FfcWeights>,
}

impl FfcNetwork {
    pub fn new(blocks: Vec<FfcWeights>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("network has no blocks".into()));
        }
        for (i, pair) in blocks.windows(2).enumerate() {
            if pair[0].spec.out_channels != pair[1].spec.in_channels {
                return Err(Error::DimensionMismatch(format!(
                    "block {} outputs {} channels but block {} expects {}",
                    i,
                    pair[0].spec.out_channels,
                    i + 1,
                    pair[1].spec.in_channels
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// Runs all blocks, returning the output and the shape after each block.
    pub fn forward(&self, x: &FeatureTensor) -> Result<(FeatureTensor, ShapeTrace)> {
        let mut cur = x.clone();
        let mut trace = Vec::with_capacity(self.blocks.len());
        for (i, block) in self.blocks.iter().enumerate() {
            cur = ffc_forward(&cur, block).map_err(|e| match e {
                Error::DimensionMismatch(m) => Error::DimensionMismatch(format!("block {i}: {m}")),
                other => other,
            })?;
            trace.push(cur.shape());
        }
        Ok((cur, trace))
    }
}
