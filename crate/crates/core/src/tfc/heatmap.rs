//! Grayscale heatmap rendering of frequency-domain grids.
//!
//! Normalization is per image (min–max), so pixel values of two heatmaps are
//! not comparable; compare raw dumps or band energies instead.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{fftshift, RealGrid};
use crate::io::{write_gray8, ImageKind};
use crate::spectral::Layout;

/// Renders `grid` to row-major 8-bit pixels.
///
/// Unshifted grids are shifted so DC lands at the image center. With
/// `log_scale` the values pass through `log(1 + x)` first. The result is
/// min–max scaled to `0..=255`; a constant grid renders as all zeros.
pub fn render_heatmap(grid: &RealGrid, layout: Layout, log_scale: bool) -> Result<Vec<u8>> {
    if let Some(bad) = grid.data().iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "heatmap values must be finite and nonnegative, found {bad}"
        )));
    }
    let display = match layout {
        Layout::Unshifted => fftshift(grid),
        Layout::Shifted => grid.clone(),
    };
    let display = if log_scale { display.map(|v| v.ln_1p()) } else { display };
    let (lo, hi) = display.min_max();
    let span = hi - lo;
    Ok(display
        .data()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect())
}

pub fn export_heatmap(grid: &RealGrid, layout: Layout, log_scale: bool, kind: ImageKind, path: &Path) -> Result<()> {
    let pixels = render_heatmap(grid, layout, log_scale)?;
    write_gray8(path, &pixels, grid.height(), grid.width(), kind)
}
