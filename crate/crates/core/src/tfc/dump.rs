//! Raw grid dumps.
//!
//! Layout (little-endian): `"TFCG"`, `u32` height, `u32` width, `u32` layout
//! code (0 unshifted, 1 shifted), then `height·width` `f64` values in
//! row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::RealGrid;
use crate::spectral::Layout;

pub const GRID_DUMP_MAGIC: &[u8; 4] = b"TFCG";
const HEADER_LEN: usize = 16;

pub fn encode_grid_dump(grid: &RealGrid, layout: Layout) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
    out.extend_from_slice(GRID_DUMP_MAGIC);
    out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    out.extend_from_slice(&layout.code().to_le_bytes());
    for v in grid.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::format(bytes.len(), "truncated header"))
}

pub fn decode_grid_dump(bytes: &[u8]) -> Result<(RealGrid, Layout)> {
    match bytes.get(..4) {
        Some(m) if m == GRID_DUMP_MAGIC => {}
        Some(m) => {
            return Err(Error::format(
                0,
                format!("bad magic {:?}, expected \"TFCG\"", String::from_utf8_lossy(m)),
            ))
        }
        None => return Err(Error::format(bytes.len(), "truncated header")),
    }
    let height = read_u32(bytes, 4)? as usize;
    let width = read_u32(bytes, 8)? as usize;
    let code = read_u32(bytes, 12)?;
    if height == 0 || width == 0 {
        return Err(Error::format(4, format!("zero dimension {height}×{width}")));
    }
    let layout = Layout::from_code(code).ok_or_else(|| Error::format(12, format!("unknown layout code {code}")))?;
    let count = height
        .checked_mul(width)
        .filter(|n| n.checked_mul(8).is_some())
        .ok_or_else(|| Error::format(4, "dimension overflow"))?;
    let expected = HEADER_LEN + 8 * count;
    if bytes.len() < expected {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: {} of {} bytes", bytes.len(), expected),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(expected, "trailing bytes after payload"));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((RealGrid::new(height, width, values)?, layout))
}

pub fn write_grid_dump(path: &Path, grid: &RealGrid, layout: Layout) -> Result<()> {
    fs::write(path, encode_grid_dump(grid, layout))?;
    Ok(())
}

pub fn read_grid_dump(path: &Path) -> Result<(RealGrid, Layout)> {
    decode_grid_dump(&fs::read(path)?)
}
