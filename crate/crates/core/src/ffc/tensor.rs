//! Feature tensors and the `FFCT` tensor file.
//!
//! `FFCT` layout (little-endian): `"FFCT"`, `u32` rank, `rank × u32` dims,
//! then the `f32` values in row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"FFCT";

/// `C × H × W` real values, channel-major.
///
/// Zero channels are allowed so that a split with ratio 0 or 1 can return an
/// empty part; spatial dimensions are always positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "tensor spatial dims must be positive, got {height}×{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::InvalidInput(format!(
                "tensor {channels}×{height}×{width} needs {} values, got {}",
                channels * height * width,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature tensor".into()));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0);
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(channels, height, width);
        for c in 0..channels {
            for r in 0..height {
                for x in 0..width {
                    t.data[(c * height + r) * width + x] = f(c, r, x);
                }
            }
        }
        t
    }

    /// `(C, H, W)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * a).collect(),
            ..self.clone()
        }
    }

    /// Elementwise sum; shapes must match.
    pub fn add(&self, other: &FeatureTensor) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "tensor {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// Channels `[start, end)`.
    pub fn slice_channels(&self, start: usize, end: usize) -> Self {
        let n = self.height * self.width;
        Self {
            channels: end - start,
            height: self.height,
            width: self.width,
            data: self.data[start * n..end * n].to_vec(),
        }
    }

    pub fn max_abs_diff(&self, other: &FeatureTensor) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Number of global channels for `ratio`: `round(ratio·C)`, halves rounded up.
pub fn global_channel_count(channels: usize, ratio: f64) -> usize {
    ((ratio * channels as f64 + 0.5).floor() as usize).min(channels)
}

/// Splits `x` into `(local, global)` by channel index; the global part is
/// the last `round(ratio·C)` channels.
pub fn split_channels(x: &FeatureTensor, ratio: f64) -> Result<(FeatureTensor, FeatureTensor)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidInput(format!("global ratio {ratio} outside [0, 1]")));
    }
    let local = x.channels - global_channel_count(x.channels, ratio);
    Ok((x.slice_channels(0, local), x.slice_channels(local, x.channels)))
}

/// Stacks `parts` along the channel axis.
pub fn concat_channels(parts: &[&FeatureTensor]) -> Result<FeatureTensor> {
    let (h, w) = (parts[0].height, parts[0].width);
    if let Some(p) = parts.iter().find(|p| (p.height, p.width) != (h, w)) {
        return Err(Error::DimensionMismatch(format!(
            "cannot concatenate {}×{} with {h}×{w}",
            p.height, p.width
        )));
    }
    let mut data = Vec::new();
    for p in parts {
        data.extend_from_slice(&p.data);
    }
    Ok(FeatureTensor {
        channels: parts.iter().map(|p| p.channels).sum(),
        height: h,
        width: w,
        data,
    })
}

/// A rank-N `f32` tensor as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    pub dims: Vec<usize>,
    pub values: Vec<f32>,
}

impl RawTensor {
    pub fn numel(&self) -> usize {
        self.dims.iter().product()
    }
}

impl From<&FeatureTensor> for RawTensor {
    fn from(t: &FeatureTensor) -> Self {
        RawTensor {
            dims: vec![t.channels, t.height, t.width],
            values: t.data.iter().map(|&v| v as f32).collect(),
        }
    }
}

impl TryFrom<&RawTensor> for FeatureTensor {
    type Error = Error;

    fn try_from(raw: &RawTensor) -> Result<Self> {
        match raw.dims[..] {
            [c, h, w] if c > 0 => FeatureTensor::new(c, h, w, raw.values.iter().map(|&v| v as f64).collect()),
            _ => Err(Error::InvalidInput(format!(
                "feature tensor must be C×H×W with C ≥ 1, got dims {:?}",
                raw.dims
            ))),
        }
    }
}

/// Sequential little-endian reader that reports byte offsets on failure.
pub(crate) struct Cursor<'a> {
    bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::format(
                    self.bytes.len(),
                    format!("truncated {what} starting at byte {}", self.pos),
                )
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != expected {
            return Err(Error::format(
                self.pos - 4,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    /// Reads `u32` rank, dims and `f32` values.
    pub(crate) fn tensor_body(&mut self) -> Result<RawTensor> {
        let rank_at = self.pos;
        let rank = self.u32("tensor rank")? as usize;
        if rank > 8 {
            return Err(Error::format(rank_at, format!("unsupported tensor rank {rank}")));
        }
        let dims_at = self.pos;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(self.u32("tensor dims")? as usize);
        }
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|n| n.checked_mul(4).is_some())
            .ok_or_else(|| Error::format(dims_at, format!("tensor dims {dims:?} overflow")))?;
        let raw = self.take(count * 4, "tensor values")?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(RawTensor { dims, values })
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(self.pos, "trailing bytes"));
        }
        Ok(())
    }
}

pub(crate) fn put_tensor_body(out: &mut Vec<u8>, t: &RawTensor) {
    out.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
    for &d in &t.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in &t.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_tensor(t: &RawTensor) -> Vec<u8> {
    let mut out = TENSOR_MAGIC.to_vec();
    put_tensor_body(&mut out, t);
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<RawTensor> {
    let mut cur = Cursor::new(bytes);
    cur.magic(TENSOR_MAGIC)?;
    let t = cur.tensor_body()?;
    cur.finish()?;
    Ok(t)
}

pub fn write_tensor(path: &Path, t: &FeatureTensor) -> Result<()> {
    fs::write(path, encode_tensor(&RawTensor::from(t)))?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<FeatureTensor> {
    FeatureTensor::try_from(&decode_tensor(&fs::read(path)?)?)
}
