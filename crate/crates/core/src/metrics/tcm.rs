//! Warping-error temporal consistency:
//!
//! ```text
//! E_R = ‖r_t − warp(r_{t−1}, o_t)‖²,  E_S = ‖s_t − warp(s_{t−1}, o_t)‖²
//! TCM_t = exp(−| E_R / E_S − 1 |)
//! ```
//!
//! with the flow `o_t` estimated on the reference pair.

use super::flow::{warp, FlowField};
use crate::error::Result;
use crate::spectral::Frame;

/// Warping errors below this are treated as zero.
pub const ERROR_EPS: f64 = 1e-12;

/// `‖curr − warp(prev, flow)‖²` summed over pixels and channels.
pub fn warping_error(prev: &Frame, curr: &Frame, flow: &FlowField) -> Result<f64> {
    prev.check_compatible(curr)?;
    let warped = warp(prev, flow)?;
    Ok(curr
        .channels()
        .iter()
        .zip(warped.channels())
        .flat_map(|(c, w)| c.data().iter().zip(w.data()))
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// TCM from the two warping errors.
///
/// Both errors ≈ 0 gives 1; only the synthetic error ≈ 0 gives 0 (maximal
/// mismatch).
pub fn tcm_from_errors(reference_error: f64, synthetic_error: f64) -> f64 {
    if synthetic_error < ERROR_EPS {
        return if reference_error < ERROR_EPS { 1.0 } else { 0.0 };
    }
    (-(reference_error / synthetic_error - 1.0).abs()).exp()
}

pub fn tcm(ref_prev: &Frame, ref_curr: &Frame, syn_prev: &Frame, syn_curr: &Frame, flow: &FlowField) -> Result<f64> {
    ref_prev.check_compatible(syn_prev)?;
    let e_r = warping_error(ref_prev, ref_curr, flow)?;
    let e_s = warping_error(syn_prev, syn_curr, flow)?;
    Ok(tcm_from_errors(e_r, e_s))
}
