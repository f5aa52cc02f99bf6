//! Convolutions, per-channel affine maps and the spectral transform.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use super::tensor::FeatureTensor;
use crate::error::{Error, Result};
use crate::spectral::fft;

/// 3×3 convolution, zero padding 1, weight layout `[out][in][3][3]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv3x3 {
    pub out_channels: usize,
    pub in_channels: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv3x3 {
    pub fn zeros(out_channels: usize, in_channels: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            weight: vec![0.0; out_channels * in_channels * 9],
            bias: vec![0.0; out_channels],
        }
    }

    /// Output `(o, r, c)` sums `in[i][r·s + ky − 1][c·s + kx − 1]`.
    pub fn forward(&self, x: &FeatureTensor, stride: usize) -> Result<FeatureTensor> {
        if x.channels() != self.in_channels {
            return Err(Error::DimensionMismatch(format!(
                "3×3 conv expects {} input channels, got {}",
                self.in_channels,
                x.channels()
            )));
        }
        let (h, w) = (x.height(), x.width());
        let (oh, ow) = ((h - 1) / stride + 1, (w - 1) / stride + 1);
        let mut out = FeatureTensor::zeros(self.out_channels, oh, ow);
        out.data_mut()
            .par_chunks_mut(oh * ow)
            .enumerate()
            .for_each(|(o, plane)| {
                plane.fill(self.bias[o]);
                for i in 0..self.in_channels {
                    let src = x.plane(i);
                    let k = &self.weight[(o * self.in_channels + i) * 9..][..9];
                    for r in 0..oh {
                        for c in 0..ow {
                            let mut acc = 0.0;
                            for ky in 0..3 {
                                let y = (r * stride + ky) as isize - 1;
                                if y < 0 || y >= h as isize {
                                    continue;
                                }
                                for kx in 0..3 {
                                    let xx = (c * stride + kx) as isize - 1;
                                    if xx < 0 || xx >= w as isize {
                                        continue;
                                    }
                                    acc += k[ky * 3 + kx] * src[y as usize * w + xx as usize];
                                }
                            }
                            plane[r * ow + c] += acc;
                        }
                    }
                }
            });
        Ok(out)
    }
}

/// Pointwise (1×1) convolution, weight layout `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1x1 {
    pub out_channels: usize,
    pub in_channels: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv1x1 {
    pub fn identity(channels: usize) -> Self {
        let mut weight = vec![0.0; channels * channels];
        for c in 0..channels {
            weight[c * channels + c] = 1.0;
        }
        Self {
            out_channels: channels,
            in_channels: channels,
            weight,
            bias: vec![0.0; channels],
        }
    }

    pub fn forward(&self, x: &FeatureTensor) -> Result<FeatureTensor> {
        if x.channels() != self.in_channels {
            return Err(Error::DimensionMismatch(format!(
                "1×1 conv expects {} input channels, got {}",
                self.in_channels,
                x.channels()
            )));
        }
        let n = x.height() * x.width();
        let mut out = FeatureTensor::zeros(self.out_channels, x.height(), x.width());
        out.data_mut().par_chunks_mut(n).enumerate().for_each(|(o, plane)| {
            plane.fill(self.bias[o]);
            for i in 0..self.in_channels {
                let k = self.weight[o * self.in_channels + i];
                for (p, s) in plane.iter_mut().zip(x.plane(i)) {
                    *p += k * s;
                }
            }
        });
        Ok(out)
    }
}

/// Per-channel `scale·x + shift` (inference-time normalization).
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl Affine {
    pub fn identity(channels: usize) -> Self {
        Self {
            scale: vec![1.0; channels],
            shift: vec![0.0; channels],
        }
    }

    pub fn apply(&self, x: &mut FeatureTensor) {
        for c in 0..x.channels() {
            let (a, b) = (self.scale[c], self.shift[c]);
            for v in x.plane_mut(c) {
                *v = a * *v + b;
            }
        }
    }
}

pub fn relu(x: &mut FeatureTensor) {
    for v in x.data_mut() {
        *v = v.max(0.0);
    }
}

/// Applies the optional normalization, then ReLU when `activation` is set.
pub(crate) fn norm_act(x: &mut FeatureTensor, norm: Option<&Affine>, activation: bool) {
    if let Some(n) = norm {
        n.apply(x);
    }
    if activation {
        relu(x);
    }
}

/// Number of real-FFT frequency bins along a width-`w` axis.
pub fn rfft_bins(width: usize) -> usize {
    width / 2 + 1
}

/// Orthonormal real 2D FFT of each channel.
///
/// Output has `2C` channels over `H × (⌊W/2⌋+1)` bins, interleaved as
/// `(re₀, im₀, re₁, im₁, …)`.
pub fn rfft2_stacked(x: &FeatureTensor) -> FeatureTensor {
    let (c, h, w) = x.shape();
    let wf = rfft_bins(w);
    let scale = 1.0 / ((h * w) as f64).sqrt();
    let mut out = FeatureTensor::zeros(2 * c, h, wf);
    for ch in 0..c {
        let mut rows: Vec<Complex64> = x.plane(ch).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::rows_in_place(&mut rows, w, FftDirection::Forward);
        let mut half: Vec<Complex64> = (0..h).flat_map(|r| rows[r * w..r * w + wf].to_vec()).collect();
        fft::cols_in_place(&mut half, h, wf, FftDirection::Forward);
        let (re, im) = (2 * ch, 2 * ch + 1);
        for (k, z) in half.iter().enumerate() {
            out.plane_mut(re)[k] = z.re * scale;
            out.plane_mut(im)[k] = z.im * scale;
        }
    }
    out
}

/// Inverse of [`rfft2_stacked`] back to `H × width`.
///
/// Each row of the half spectrum is completed by conjugate symmetry before
/// the inverse transform and the real part is kept, so imaginary parts of the
/// DC and Nyquist columns that break symmetry are discarded.
pub fn irfft2_stacked(x: &FeatureTensor, width: usize) -> Result<FeatureTensor> {
    let (c2, h, wf) = x.shape();
    if c2 % 2 != 0 || wf != rfft_bins(width) {
        return Err(Error::DimensionMismatch(format!(
            "stacked spectrum {c2}×{h}×{wf} does not match width {width}"
        )));
    }
    let scale = 1.0 / ((h * width) as f64).sqrt();
    let mut out = FeatureTensor::zeros(c2 / 2, h, width);
    for ch in 0..c2 / 2 {
        let mut half: Vec<Complex64> = x
            .plane(2 * ch)
            .iter()
            .zip(x.plane(2 * ch + 1))
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        fft::cols_in_place(&mut half, h, wf, FftDirection::Inverse);
        let mut full = vec![Complex64::default(); h * width];
        for r in 0..h {
            let row = &half[r * wf..(r + 1) * wf];
            let dst = &mut full[r * width..(r + 1) * width];
            dst[..wf].copy_from_slice(row);
            for v in wf..width {
                dst[v] = row[width - v].conj();
            }
        }
        fft::rows_in_place(&mut full, width, FftDirection::Inverse);
        for (o, z) in out.plane_mut(ch).iter_mut().zip(&full) {
            *o = z.re * scale;
        }
    }
    Ok(out)
}

/// Parameters of the global-branch spectral transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTransformWeights {
    /// `C_in → C_hidden`, applied in the spatial domain.
    pub pre: Conv1x1,
    pub pre_norm: Option<Affine>,
    /// `2·C_hidden → 2·C_hidden`, applied to stacked real/imaginary parts.
    pub freq: Conv1x1,
    pub freq_norm: Option<Affine>,
    /// `C_hidden → C_out`, applied in the spatial domain.
    pub post: Conv1x1,
    pub activation: bool,
}

impl SpectralTransformWeights {
    /// Weights under which the transform is the identity map.
    pub fn identity(channels: usize) -> Self {
        Self {
            pre: Conv1x1::identity(channels),
            pre_norm: None,
            freq: Conv1x1::identity(2 * channels),
            freq_norm: None,
            post: Conv1x1::identity(channels),
            activation: false,
        }
    }

    pub fn hidden_channels(&self) -> usize {
        self.pre.out_channels
    }
}

/// `post(irfft(act(norm(freq(rfft(act(norm(pre(x)))))))))`.
pub fn spectral_transform(x: &FeatureTensor, w: &SpectralTransformWeights) -> Result<FeatureTensor> {
    if w.freq.in_channels != 2 * w.pre.out_channels
        || w.freq.out_channels != w.freq.in_channels
        || w.post.in_channels != w.pre.out_channels
    {
        return Err(Error::DimensionMismatch(format!(
            "spectral transform shapes: pre {}→{}, freq {}→{}, post {}→{}",
            w.pre.in_channels,
            w.pre.out_channels,
            w.freq.in_channels,
            w.freq.out_channels,
            w.post.in_channels,
            w.post.out_channels
        )));
    }
    let mut hidden = w.pre.forward(x)?;
    norm_act(&mut hidden, w.pre_norm.as_ref(), w.activation);
    let stacked = rfft2_stacked(&hidden);
    let mut mixed = w.freq.forward(&stacked)?;
    norm_act(&mut mixed, w.freq_norm.as_ref(), w.activation);
    let back = irfft2_stacked(&mixed, x.width())?;
    w.post.forward(&back)
}

/// 2×2 average pooling; edge windows average the available cells.
pub fn avg_pool2(x: &FeatureTensor) -> FeatureTensor {
    let (c, h, w) = x.shape();
    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
    FeatureTensor::from_fn(c, oh, ow, |ch, r, col| {
        let src = x.plane(ch);
        let (mut sum, mut n) = (0.0, 0);
        for y in 2 * r..(2 * r + 2).min(h) {
            for xx in 2 * col..(2 * col + 2).min(w) {
                sum += src[y * w + xx];
                n += 1;
            }
        }
        sum / n as f64
    })
}

/// Nearest-neighbour 2× upsampling.
pub fn upsample_nearest2(x: &FeatureTensor) -> FeatureTensor {
    let (c, h, w) = x.shape();
    FeatureTensor::from_fn(c, 2 * h, 2 * w, |ch, r, col| x.plane(ch)[(r / 2) * w + col / 2])
}
