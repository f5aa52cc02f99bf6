//! Temporal Frequency Changes between adjacent frames.
//!
//! For frames `f_{t−1}`, `f_t` with spectra `F_{t−1}`, `F_t`:
//!
//! ```text
//! TAC_t(u,v) = | |F_t(u,v)| − |F_{t−1}(u,v)| |
//! TPC_t(u,v) = | ∠F_t(u,v) − ∠F_{t−1}(u,v) |          (raw)
//!            = min(d, 2π − d),  d = |∠F_t − ∠F_{t−1}|  (wrapped)
//! ```
//!
//! computed per channel on unshifted spectra and averaged over channels.

mod dump;
mod heatmap;

pub use dump::{decode_grid_dump, encode_grid_dump, read_grid_dump, write_grid_dump, GRID_DUMP_MAGIC};
pub use heatmap::{export_heatmap, render_heatmap};

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::RealGrid;
use crate::spectral::{self, Frame, Layout};

/// How phase differences are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// Literal `|Δ∠F|`, in `[0, 2π)`.
    Raw,
    /// Angular distance on the circle, in `[0, π]`.
    #[default]
    Wrapped,
}

impl PhaseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseMode::Raw => "raw",
            PhaseMode::Wrapped => "wrapped",
        }
    }
}

impl std::str::FromStr for PhaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(PhaseMode::Raw),
            "wrapped" => Ok(PhaseMode::Wrapped),
            other => Err(Error::InvalidInput(format!(
                "unknown phase mode {other:?} (expected raw or wrapped)"
            ))),
        }
    }
}

/// Distance between two phases in `(−π, π]` under `mode`.
#[inline]
pub fn phase_distance(a: f64, b: f64, mode: PhaseMode) -> f64 {
    let d = (a - b).abs();
    match mode {
        PhaseMode::Raw => d,
        PhaseMode::Wrapped => d.min(2.0 * PI - d),
    }
}

/// Amplitude and phase grids of one channel's spectrum.
#[derive(Debug, Clone)]
pub struct PolarSpectrum {
    pub amplitude: RealGrid,
    pub phase: RealGrid,
}

impl PolarSpectrum {
    pub fn of(grid: &spectral::FrameGrid) -> Self {
        let s = spectral::dft2(grid);
        Self {
            amplitude: spectral::amplitude(&s),
            phase: spectral::phase(&s),
        }
    }
}

/// Per-channel polar spectra of a frame.
pub fn frame_spectra(frame: &Frame) -> Vec<PolarSpectrum> {
    frame.channels().iter().map(PolarSpectrum::of).collect()
}

/// TAC and TPC grids of one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TfcPair {
    pub tac: RealGrid,
    pub tpc: RealGrid,
    pub layout: Layout,
}

/// TAC/TPC of one channel.
pub fn channel_tfc(prev: &PolarSpectrum, curr: &PolarSpectrum, mode: PhaseMode) -> (RealGrid, RealGrid) {
    let tac = curr
        .amplitude
        .zip_map(&prev.amplitude, |a, b| (a - b).abs())
        .expect("equal dims");
    let tpc = curr
        .phase
        .zip_map(&prev.phase, |a, b| phase_distance(*a, *b, mode))
        .expect("equal dims");
    (tac, tpc)
}

fn pair_from_spectra(prev: &[PolarSpectrum], curr: &[PolarSpectrum], mode: PhaseMode) -> TfcPair {
    let (h, w) = prev[0].amplitude.dims();
    let mut tac = RealGrid::zeros(h, w);
    let mut tpc = RealGrid::zeros(h, w);
    let scale = 1.0 / prev.len() as f64;
    for (p, c) in prev.iter().zip(curr) {
        let (a, b) = channel_tfc(p, c, mode);
        tac.add_scaled(&a, scale);
        tpc.add_scaled(&b, scale);
    }
    TfcPair {
        tac,
        tpc,
        layout: Layout::Unshifted,
    }
}

/// TFC of the transition `prev → curr`, averaged over channels.
pub fn tfc_pair(prev: &Frame, curr: &Frame, mode: PhaseMode) -> Result<TfcPair> {
    prev.check_compatible(curr)?;
    Ok(pair_from_spectra(&frame_spectra(prev), &frame_spectra(curr), mode))
}

/// An ordered list of at least two frames of uniform shape.
#[derive(Debug, Clone)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    frame_rate: Option<f64>,
}

impl VideoSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a video needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        for (t, f) in frames.iter().enumerate().skip(1) {
            frames[0]
                .check_compatible(f)
                .map_err(|e| Error::DimensionMismatch(format!("frame {t}: {e}")))?;
        }
        Ok(Self {
            frames,
            frame_rate: None,
        })
    }

    pub fn with_frame_rate(mut self, fps: f64) -> Self {
        self.frame_rate = Some(fps);
        self
    }

    pub fn frame_rate(&self) -> Option<f64> {
        self.frame_rate
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn channel_count(&self) -> usize {
        self.frames[0].channel_count()
    }

    pub fn to_luma(&self) -> VideoSequence {
        VideoSequence {
            frames: self.frames.iter().map(Frame::to_luma).collect(),
            frame_rate: self.frame_rate,
        }
    }

    /// Errors unless both sequences have equal length, dimensions and
    /// channel count.
    pub fn check_aligned(&self, other: &VideoSequence) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "sequence lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        self.frames[0].check_compatible(&other.frames[0])
    }
}

/// Mean TAC/TPC over all transitions of a video.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTfc {
    pub mean_tac: RealGrid,
    pub mean_tpc: RealGrid,
    pub transitions: usize,
}

/// Per-transition TFC of a video, `t = 1..T−1` (index of the later frame).
pub fn sequence_tfc(video: &VideoSequence, mode: PhaseMode) -> Vec<TfcPair> {
    let spectra: Vec<Vec<PolarSpectrum>> = video.frames.par_iter().map(frame_spectra).collect();
    spectra
        .par_windows(2)
        .map(|w| pair_from_spectra(&w[0], &w[1], mode))
        .collect()
}

/// Mean of the per-transition TFC grids, divided by `T − 1`.
///
/// Accumulation runs in transition order so the result is bit-identical for
/// any thread count.
pub fn mean_tfc(video: &VideoSequence, mode: PhaseMode) -> MeanTfc {
    let pairs = sequence_tfc(video, mode);
    let (h, w) = video.dims();
    let mut mean_tac = RealGrid::zeros(h, w);
    let mut mean_tpc = RealGrid::zeros(h, w);
    for p in &pairs {
        mean_tac.add_scaled(&p.tac, 1.0);
        mean_tpc.add_scaled(&p.tpc, 1.0);
    }
    let n = pairs.len() as f64;
    MeanTfc {
        mean_tac: mean_tac.map(|v| v / n),
        mean_tpc: mean_tpc.map(|v| v / n),
        transitions: pairs.len(),
    }
}

/// Normalized radial distance of each unshifted index from DC, measured in
/// the shifted view and divided by the largest such distance.
pub fn radial_distance(height: usize, width: usize) -> RealGrid {
    let (ch, cw) = ((height / 2) as f64, (width / 2) as f64);
    let r_max = (ch * ch + cw * cw).sqrt();
    RealGrid::from_fn(height, width, |u, v| {
        if r_max == 0.0 {
            return 0.0;
        }
        // shifted position of (u, v) relative to the display center
        let su = ((u + height / 2) % height) as f64 - ch;
        let sv = ((v + width / 2) % width) as f64 - cw;
        (su * su + sv * sv).sqrt() / r_max
    })
}

/// Sums of an unshifted grid inside and outside the disc of normalized
/// radius `band_fraction` around DC: `(low, high)`.
pub fn band_energy(grid: &RealGrid, band_fraction: f64) -> Result<(f64, f64)> {
    if !(band_fraction > 0.0 && band_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "band fraction must lie in (0, 1], got {band_fraction}"
        )));
    }
    let dist = radial_distance(grid.height(), grid.width());
    let (mut low, mut high) = (0.0, 0.0);
    for (&v, &d) in grid.data().iter().zip(dist.data()) {
        if d <= band_fraction {
            low += v;
        } else {
            high += v;
        }
    }
    Ok((low, high))
}
