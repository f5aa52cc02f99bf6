//! Global integer translation by phase correlation.
//!
//! A coarse stand-in for learned optical flow: it only recovers a single
//! cyclic translation and reports it as a constant flow field.

use rustfft::num_complex::Complex64;

use super::flow::FlowField;
use crate::error::Result;
use crate::grid::Grid;
use crate::spectral::{self, luma, Frame, Layout, Spectrum};

const MAGNITUDE_EPS: f64 = 1e-12;

fn signed(index: usize, n: usize) -> i64 {
    if index > n / 2 {
        index as i64 - n as i64
    } else {
        index as i64
    }
}

/// Integer `(dx, dy)` such that `curr(r, c) ≈ prev(r + dy, c + dx)` (indices
/// taken cyclically), so that `warp(prev, flow) ≈ curr`.
///
/// Uses the luma of both frames. Constant frames yield `(0, 0)`.
pub fn estimate_translation(prev: &Frame, curr: &Frame) -> Result<(i64, i64)> {
    prev.check_compatible(curr)?;
    let (a, b) = (luma(prev), luma(curr));
    let is_constant = |g: &spectral::FrameGrid| {
        let (lo, hi) = g.min_max();
        hi - lo == 0.0
    };
    if is_constant(&a) || is_constant(&b) {
        return Ok((0, 0));
    }
    let (fa, fb) = (spectral::dft2(&a), spectral::dft2(&b));
    let (h, w) = a.dims();
    let cross = Grid::from_fn(h, w, |u, v| {
        let z = fa.get(u, v) * fb.get(u, v).conj();
        let m = z.norm();
        if m < MAGNITUDE_EPS {
            Complex64::default()
        } else {
            z / m
        }
    });
    let surface = spectral::idft2_complex(&Spectrum::new(cross, Layout::Unshifted))?;
    let mut best = (0, 0);
    let mut best_value = f64::NEG_INFINITY;
    for r in 0..h {
        for c in 0..w {
            let v = surface.get(r, c).re;
            if v > best_value {
                best_value = v;
                best = (r, c);
            }
        }
    }
    Ok((signed(best.1, w), signed(best.0, h)))
}

/// [`estimate_translation`] as a constant flow field.
pub fn estimate_flow_translation(prev: &Frame, curr: &Frame) -> Result<FlowField> {
    let (dx, dy) = estimate_translation(prev, curr)?;
    let (h, w) = prev.dims();
    Ok(FlowField::constant(h, w, dx as f64, dy as f64))
}
