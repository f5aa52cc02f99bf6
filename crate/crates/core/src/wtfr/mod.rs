//! Weighted Temporal Frequency Regularization loss.
//!
//! For a reference transition `(r_{t−1}, r_t)` and a synthetic transition
//! `(s_{t−1}, s_t)`:
//!
//! ```text
//! L_TAC = 1/(MN) Σ_{u,v} w(u,v)·| TAC^R_t(u,v) − TAC^S_t(u,v) |
//! L_TPC = 1/(MN) Σ_{u,v} w(u,v)·| TPC^R_t(u,v) − TPC^S_t(u,v) |
//! L     = α·L_TAC + β·L_TPC
//! w(u,v) = ((M/2)² + (N/2)²)^δ − ((u − M/2)² + (v − N/2)²)^δ + 1
//! ```
//!
//! with `w` evaluated on unshifted indices, so it is 1 at DC and largest at
//! the Nyquist corner `(M/2, N/2)`. Color frames are handled per channel and
//! the channel losses averaged.
//!
//! The gradient with respect to the synthetic pixels is exact wherever the
//! loss is differentiable; at the kinks of the absolute values the
//! subgradient 0 is used.

mod config;

pub use config::{load_config, parse_config};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grid::{Grid, RealGrid};
use crate::spectral::{self, fft, Frame, FrameGrid, PHASE_EPS};
use crate::tfc::{phase_distance, PhaseMode, VideoSequence};

/// Which synthetic frames of a transition receive gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientFlow {
    /// Only `s_t`; `s_{t−1}` is a constant (detached) input.
    #[default]
    CurrentOnly,
    /// Both `s_{t−1}` and `s_t`.
    BothFrames,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WtfrConfig {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub phase_mode: PhaseMode,
    /// `false` replaces `w` by ones (plain TFR).
    pub weighting: bool,
    pub gradient_flow: GradientFlow,
}

impl Default for WtfrConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 1.0,
            delta: 0.05,
            phase_mode: PhaseMode::Wrapped,
            weighting: true,
            gradient_flow: GradientFlow::CurrentOnly,
        }
    }
}

impl WtfrConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha must be finite and ≥ 0, got {}", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta must be finite and ≥ 0, got {}", self.beta));
        }
        if self.alpha + self.beta <= 0.0 {
            return bad("alpha + beta must be positive".into());
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad(format!("delta must be finite and ≥ 0, got {}", self.delta));
        }
        Ok(())
    }

    fn weights(&self, height: usize, width: usize) -> RealGrid {
        if self.weighting {
            weight_grid(height, width, self.delta)
        } else {
            RealGrid::filled(height, width, 1.0)
        }
    }
}

/// The frequency weighting `w(u,v)` on unshifted indices.
///
/// `0^δ` is taken as 0 for `δ > 0` (and 1 for `δ = 0`, where `w ≡ 1`).
pub fn weight_grid(height: usize, width: usize, delta: f64) -> RealGrid {
    let (hm, hn) = (height as f64 / 2.0, width as f64 / 2.0);
    let reference = (hm * hm + hn * hn).powf(delta);
    RealGrid::from_fn(height, width, |u, v| {
        let du = u as f64 - hm;
        let dv = v as f64 - hn;
        reference - (du * du + dv * dv).powf(delta) + 1.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WtfrResult {
    pub total: f64,
    pub l_tac: f64,
    pub l_tpc: f64,
    /// `∂total/∂s_t`, one grid per channel.
    pub gradient: Option<Vec<RealGrid>>,
    /// `∂total/∂s_{t−1}`; only with [`GradientFlow::BothFrames`].
    pub gradient_prev: Option<Vec<RealGrid>>,
}

/// Spectral data of one channel reused across the loss and its gradient.
struct ChannelSpectrum {
    values: Grid<Complex64>,
    amplitude: RealGrid,
    phase: RealGrid,
}

impl ChannelSpectrum {
    fn of(grid: &FrameGrid) -> Self {
        let s = spectral::dft2(grid);
        Self {
            amplitude: spectral::amplitude(&s),
            phase: spectral::phase(&s),
            values: s.values().clone(),
        }
    }
}

fn frame_spectra(frame: &Frame) -> Vec<ChannelSpectrum> {
    frame.channels().iter().map(ChannelSpectrum::of).collect()
}

/// `sign` with `sign(0) = 0`.
#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `∂ TPC / ∂ phase_curr` for `Δ = phase_curr − phase_prev`.
#[inline]
fn tpc_slope(delta_phase: f64, mode: PhaseMode) -> f64 {
    let s = sign(delta_phase);
    match mode {
        PhaseMode::Raw => s,
        PhaseMode::Wrapped if delta_phase.abs() <= std::f64::consts::PI => s,
        PhaseMode::Wrapped => -s,
    }
}

/// Maps per-frequency derivatives `∂L/∂|F|` and `∂L/∂∠F` to pixel space.
fn backpropagate(spec: &ChannelSpectrum, d_amp: &RealGrid, d_phase: &RealGrid) -> RealGrid {
    let (h, w) = spec.values.dims();
    let mut g: Vec<Complex64> = spec
        .values
        .data()
        .iter()
        .zip(spec.amplitude.data())
        .zip(d_amp.data().iter().zip(d_phase.data()))
        .map(|((z, &a), (&da, &dp))| {
            let mut out = Complex64::default();
            if a > 0.0 {
                // ∂|F|/∂R = R/|F|, ∂|F|/∂I = I/|F|
                out += Complex64::new(z.re, z.im) * (da / a);
            }
            if a >= PHASE_EPS {
                // ∂∠F/∂R = −I/|F|², ∂∠F/∂I = R/|F|²
                out += Complex64::new(-z.im, z.re) * (dp / (a * a));
            }
            out
        })
        .collect();
    // ∂L/∂f(x,y) = Re Σ_{u,v} (g_R + i g_I)·exp(+i2π(ux/M + vy/N))
    fft::fft2_in_place(&mut g, h, w, FftDirection::Inverse);
    Grid::new(h, w, g.into_iter().map(|z| z.re).collect()).expect("dims preserved")
}

struct ChannelLoss {
    l_tac: f64,
    l_tpc: f64,
    grad_curr: Option<RealGrid>,
    grad_prev: Option<RealGrid>,
}

#[allow(clippy::too_many_arguments)]
fn channel_loss(
    ref_prev: &ChannelSpectrum,
    ref_curr: &ChannelSpectrum,
    syn_prev: &ChannelSpectrum,
    syn_curr: &ChannelSpectrum,
    weights: &RealGrid,
    cfg: &WtfrConfig,
    want_gradient: bool,
) -> ChannelLoss {
    let (h, w) = weights.dims();
    let norm = 1.0 / (h * w) as f64;
    let mode = cfg.phase_mode;
    let n = h * w;
    let (mut l_tac, mut l_tpc) = (0.0, 0.0);
    let mut d_amp = vec![0.0; if want_gradient { n } else { 0 }];
    let mut d_phase = vec![0.0; if want_gradient { n } else { 0 }];

    for k in 0..n {
        let wk = weights.data()[k];
        let tac_r = (ref_curr.amplitude.data()[k] - ref_prev.amplitude.data()[k]).abs();
        let tpc_r = phase_distance(ref_curr.phase.data()[k], ref_prev.phase.data()[k], mode);
        let amp_diff = syn_curr.amplitude.data()[k] - syn_prev.amplitude.data()[k];
        let phase_diff = syn_curr.phase.data()[k] - syn_prev.phase.data()[k];
        let tac_s = amp_diff.abs();
        let tpc_s = phase_distance(syn_curr.phase.data()[k], syn_prev.phase.data()[k], mode);
        let r_tac = tac_r - tac_s;
        let r_tpc = tpc_r - tpc_s;
        l_tac += wk * r_tac.abs();
        l_tpc += wk * r_tpc.abs();
        if want_gradient {
            // ∂|r|/∂x = sign(r)·∂r/∂x and r = ref − syn
            d_amp[k] = -cfg.alpha * norm * wk * sign(r_tac) * sign(amp_diff);
            d_phase[k] = -cfg.beta * norm * wk * sign(r_tpc) * tpc_slope(phase_diff, mode);
        }
    }

    let (grad_curr, grad_prev) = if want_gradient {
        let d_amp = RealGrid::new(h, w, d_amp).expect("dims");
        let d_phase = RealGrid::new(h, w, d_phase).expect("dims");
        let curr = backpropagate(syn_curr, &d_amp, &d_phase);
        let prev = match cfg.gradient_flow {
            GradientFlow::CurrentOnly => None,
            // TAC^S and TPC^S depend on the previous frame with opposite sign.
            GradientFlow::BothFrames => Some(backpropagate(syn_prev, &d_amp.map(|v| -v), &d_phase.map(|v| -v))),
        };
        (Some(curr), prev)
    } else {
        (None, None)
    };

    ChannelLoss {
        l_tac: l_tac * norm,
        l_tpc: l_tpc * norm,
        grad_curr,
        grad_prev,
    }
}

fn pair_loss(
    ref_prev: &[ChannelSpectrum],
    ref_curr: &[ChannelSpectrum],
    syn_prev: &[ChannelSpectrum],
    syn_curr: &[ChannelSpectrum],
    weights: &RealGrid,
    cfg: &WtfrConfig,
    want_gradient: bool,
) -> WtfrResult {
    let channels = ref_prev.len();
    let scale = 1.0 / channels as f64;
    let (mut l_tac, mut l_tpc) = (0.0, 0.0);
    let mut grad = want_gradient.then(Vec::new);
    let mut grad_prev = (want_gradient && cfg.gradient_flow == GradientFlow::BothFrames).then(Vec::new);
    for c in 0..channels {
        let cl = channel_loss(
            &ref_prev[c],
            &ref_curr[c],
            &syn_prev[c],
            &syn_curr[c],
            weights,
            cfg,
            want_gradient,
        );
        l_tac += cl.l_tac;
        l_tpc += cl.l_tpc;
        if let (Some(g), Some(gc)) = (grad.as_mut(), cl.grad_curr) {
            g.push(gc.map(|v| v * scale));
        }
        if let (Some(g), Some(gp)) = (grad_prev.as_mut(), cl.grad_prev) {
            g.push(gp.map(|v| v * scale));
        }
    }
    let l_tac = l_tac * scale;
    let l_tpc = l_tpc * scale;
    WtfrResult {
        total: cfg.alpha * l_tac + cfg.beta * l_tpc,
        l_tac,
        l_tpc,
        gradient: grad,
        gradient_prev: grad_prev,
    }
}

/// WTFR loss of one transition, optionally with its pixel gradient.
pub fn wtfr_loss(
    ref_prev: &Frame,
    ref_curr: &Frame,
    syn_prev: &Frame,
    syn_curr: &Frame,
    cfg: &WtfrConfig,
    want_gradient: bool,
) -> Result<WtfrResult> {
    cfg.validate()?;
    for other in [ref_curr, syn_prev, syn_curr] {
        ref_prev.check_compatible(other)?;
    }
    let (h, w) = ref_prev.dims();
    let weights = cfg.weights(h, w);
    Ok(pair_loss(
        &frame_spectra(ref_prev),
        &frame_spectra(ref_curr),
        &frame_spectra(syn_prev),
        &frame_spectra(syn_curr),
        &weights,
        cfg,
        want_gradient,
    ))
}

/// Per-transition losses of a sequence and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceLoss {
    /// Entry `i` is the transition into frame `i + 1`.
    pub per_transition: Vec<WtfrResult>,
    pub mean_total: f64,
    pub mean_l_tac: f64,
    pub mean_l_tpc: f64,
}

/// WTFR over all transitions `t = 1..T−1` of aligned sequences.
pub fn wtfr_sequence_loss(
    reference: &VideoSequence,
    synthetic: &VideoSequence,
    cfg: &WtfrConfig,
    want_gradient: bool,
) -> Result<SequenceLoss> {
    cfg.validate()?;
    reference.check_aligned(synthetic)?;
    let (h, w) = reference.dims();
    let weights = cfg.weights(h, w);
    let ref_spectra: Vec<_> = reference.frames().par_iter().map(frame_spectra).collect();
    let syn_spectra: Vec<_> = synthetic.frames().par_iter().map(frame_spectra).collect();
    let per_transition: Vec<WtfrResult> = (1..reference.len())
        .into_par_iter()
        .map(|t| {
            pair_loss(
                &ref_spectra[t - 1],
                &ref_spectra[t],
                &syn_spectra[t - 1],
                &syn_spectra[t],
                &weights,
                cfg,
                want_gradient,
            )
        })
        .collect();
    let n = per_transition.len() as f64;
    let mean = |f: fn(&WtfrResult) -> f64| per_transition.iter().map(f).sum::<f64>() / n;
    Ok(SequenceLoss {
        mean_total: mean(|r| r.total),
        mean_l_tac: mean(|r| r.l_tac),
        mean_l_tpc: mean(|r| r.l_tpc),
        per_transition,
    })
}
