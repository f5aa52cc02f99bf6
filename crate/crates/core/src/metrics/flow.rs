//! Dense flow fields, Middlebury `.flo` files, and backward warping.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::{Frame, FrameGrid};

/// The `.flo` magic, `"PIEH"` read as a little-endian `f32`.
pub const FLO_MAGIC: f32 = 202021.25;

/// Per-pixel displacement `(dx, dy)` in pixels; `dx` is horizontal
/// (column), `dy` vertical (row).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField(Grid<[f64; 2]>);

impl FlowField {
    pub fn new(grid: Grid<[f64; 2]>) -> Result<Self> {
        if grid.data().iter().any(|d| !d[0].is_finite() || !d[1].is_finite()) {
            return Err(Error::NonFinite("flow field".into()));
        }
        Ok(Self(grid))
    }

    pub fn constant(height: usize, width: usize, dx: f64, dy: f64) -> Self {
        Self(Grid::filled(height, width, [dx, dy]))
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::constant(height, width, 0.0, 0.0)
    }

    pub fn grid(&self) -> &Grid<[f64; 2]> {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn get(&self, row: usize, col: usize) -> [f64; 2] {
        *self.0.get(row, col)
    }
}

/// Serializes a flow field in Middlebury format (values rounded to `f32`).
pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let (h, w) = flow.dims();
    let mut out = Vec::with_capacity(12 + 8 * h * w);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for d in flow.grid().data() {
        out.extend_from_slice(&(d[0] as f32).to_le_bytes());
        out.extend_from_slice(&(d[1] as f32).to_le_bytes());
    }
    out
}

pub fn decode_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 12 {
        return Err(Error::format(bytes.len(), "truncated .flo header"));
    }
    let word = |o: usize| -> [u8; 4] { bytes[o..o + 4].try_into().unwrap() };
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::format(
            0,
            format!("bad .flo magic {magic} (bytes {:02x?}), expected {FLO_MAGIC}", word(0)),
        ));
    }
    let width = u32::from_le_bytes(word(4)) as usize;
    let height = u32::from_le_bytes(word(8)) as usize;
    if width == 0 || height == 0 {
        return Err(Error::format(4, format!("zero flow dimension {width}×{height}")));
    }
    let payload = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format(4, format!("flow dimensions {width}×{height} overflow")))?;
    let expected = 12usize
        .checked_add(payload)
        .ok_or_else(|| Error::format(4, "flow dimensions overflow"))?;
    if bytes.len() < expected {
        return Err(Error::format(
            bytes.len(),
            format!("truncated .flo payload: {} of {expected} bytes", bytes.len()),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(expected, "trailing bytes after .flo payload"));
    }
    let data = bytes[12..]
        .chunks_exact(8)
        .map(|c| {
            [
                f32::from_le_bytes(c[..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(c[4..].try_into().unwrap()) as f64,
            ]
        })
        .collect();
    FlowField::new(Grid::new(height, width, data)?)
}

pub fn write_flo(flow: &FlowField, path: &Path) -> Result<()> {
    fs::write(path, encode_flo(flow))?;
    Ok(())
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    decode_flo(&fs::read(path)?)
}

/// Backward warp: output pixel `(r, c)` samples `frame` bilinearly at
/// `(c + dx, r + dy)`, with source coordinates clamped to the border.
pub fn warp(frame: &Frame, flow: &FlowField) -> Result<Frame> {
    let (h, w) = frame.dims();
    if flow.dims() != (h, w) {
        let (fh, fw) = flow.dims();
        return Err(Error::DimensionMismatch(format!("flow {fh}×{fw} vs frame {h}×{w}")));
    }
    let channels = frame
        .channels()
        .iter()
        .map(|ch| {
            FrameGrid::from_fn(h, w, |r, c| {
                let [dx, dy] = flow.get(r, c);
                let x = (c as f64 + dx).clamp(0.0, (w - 1) as f64);
                let y = (r as f64 + dy).clamp(0.0, (h - 1) as f64);
                let (x0, y0) = (x.floor() as usize, y.floor() as usize);
                let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
                let (fx, fy) = (x - x0 as f64, y - y0 as f64);
                let top = ch.get(y0, x0) * (1.0 - fx) + ch.get(y0, x1) * fx;
                let bottom = ch.get(y1, x0) * (1.0 - fx) + ch.get(y1, x1) * fx;
                top * (1.0 - fy) + bottom * fy
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Frame::new(channels)
}
