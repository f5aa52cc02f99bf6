//! 2D discrete Fourier analysis of frames.
//!
//! Conventions:
//!
//! * forward transform is unnormalized,
//!   `F(u,v) = Σ_x Σ_y f(x,y)·exp(−i2π(ux/M + vy/N))`, where `x`/`u` index
//!   rows and `y`/`v` index columns;
//! * the inverse carries the `1/(MN)` factor;
//! * phase is the four-quadrant arctangent in `(−π, π]`, and is `0` wherever
//!   the amplitude is below [`PHASE_EPS`].
//!
//! Spectra are produced in [`Layout::Unshifted`] form (DC at `(0, 0)`);
//! [`shift_spectrum`] produces the centered view used only for display.

pub(crate) mod fft;

use std::f64::consts::PI;

pub use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grid::{fftshift, ifftshift, Grid, RealGrid};

/// Amplitude below which the phase of a spectrum entry is defined as zero.
pub const PHASE_EPS: f64 = 1e-12;

/// Rec. 601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// One channel of one frame: finite real intensities, nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid(RealGrid);

impl FrameGrid {
    pub fn new(grid: RealGrid) -> Result<Self> {
        if !grid.all_finite() {
            return Err(Error::NonFinite("frame grid".into()));
        }
        Ok(Self(grid))
    }

    pub fn from_vec(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(Grid::new(height, width, values)?)
    }

    pub fn from_fn(height: usize, width: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Grid::from_fn(height, width, f))
    }

    pub fn as_grid(&self) -> &RealGrid {
        &self.0
    }

    pub fn into_grid(self) -> RealGrid {
        self.0
    }

    /// Clamps every value into `[0, 1]`.
    pub fn clamped(&self) -> Self {
        Self(self.0.map(|v| v.clamp(0.0, 1.0)))
    }
}

impl std::ops::Deref for FrameGrid {
    type Target = RealGrid;

    fn deref(&self) -> &RealGrid {
        &self.0
    }
}

/// A frame: one (luma) or three (RGB) channels of identical dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    channels: Vec<FrameGrid>,
}

impl Frame {
    pub fn new(channels: Vec<FrameGrid>) -> Result<Self> {
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "a frame has 1 or 3 channels, got {}",
                channels.len()
            )));
        }
        let dims = channels[0].dims();
        if let Some(bad) = channels.iter().find(|c| c.dims() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "channel {}×{} differs from {}×{}",
                bad.height(),
                bad.width(),
                dims.0,
                dims.1
            )));
        }
        Ok(Self { channels })
    }

    pub fn gray(grid: FrameGrid) -> Self {
        Self { channels: vec![grid] }
    }

    pub fn channels(&self) -> &[FrameGrid] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    /// `0.299R + 0.587G + 0.114B` for RGB frames; single-channel frames are
    /// returned unchanged.
    pub fn to_luma(&self) -> Frame {
        Frame::gray(luma(self))
    }

    pub fn clamped(&self) -> Frame {
        Frame {
            channels: self.channels.iter().map(FrameGrid::clamped).collect(),
        }
    }

    /// Errors unless `other` has the same dimensions and channel count.
    pub fn check_compatible(&self, other: &Frame) -> Result<()> {
        if self.dims() != other.dims() || self.channel_count() != other.channel_count() {
            let (h, w) = self.dims();
            let (oh, ow) = other.dims();
            return Err(Error::DimensionMismatch(format!(
                "frame {h}×{w}×{} vs {oh}×{ow}×{}",
                self.channel_count(),
                other.channel_count()
            )));
        }
        Ok(())
    }
}

/// Luma channel of a frame.
pub fn luma(frame: &Frame) -> FrameGrid {
    match frame.channels() {
        [single] => single.clone(),
        [r, g, b] => FrameGrid(Grid::from_fn(r.height(), r.width(), |i, j| {
            LUMA_WEIGHTS[0] * r.get(i, j) + LUMA_WEIGHTS[1] * g.get(i, j) + LUMA_WEIGHTS[2] * b.get(i, j)
        })),
        _ => unreachable!("frames have 1 or 3 channels"),
    }
}

/// Index layout of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// DC at `(0, 0)`.
    Unshifted,
    /// DC at `(⌊M/2⌋, ⌊N/2⌋)`.
    Shifted,
}

impl Layout {
    pub fn code(self) -> u32 {
        match self {
            Layout::Unshifted => 0,
            Layout::Shifted => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Layout::Unshifted),
            1 => Some(Layout::Shifted),
            _ => None,
        }
    }
}

/// Complex spectrum with its index layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Grid<Complex64>,
    layout: Layout,
}

impl Spectrum {
    pub fn new(values: Grid<Complex64>, layout: Layout) -> Self {
        Self { values, layout }
    }

    pub fn values(&self) -> &Grid<Complex64> {
        &self.values
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        *self.values.get(u, v)
    }
}

/// Forward 2D DFT of a real frame channel, unnormalized.
///
/// The result is projected onto the conjugate-symmetric subspace,
/// `F(u,v) ← (F(u,v) + conj F(−u,−v)) / 2`, which changes values only at
/// rounding level but makes the symmetry (and hence the phases of the
/// self-conjugate bins) exact.
pub fn dft2(frame: &FrameGrid) -> Spectrum {
    let (h, w) = frame.dims();
    let mut data: Vec<Complex64> = frame.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::fft2_in_place(&mut data, h, w, FftDirection::Forward);
    let raw = Grid::new(h, w, data).expect("dims preserved");
    let values = Grid::from_fn(h, w, |u, v| {
        let a = *raw.get(u, v);
        let b = raw.get((h - u) % h, (w - v) % w).conj();
        (a + b) * 0.5
    });
    Spectrum::new(values, Layout::Unshifted)
}

/// Unnormalized forward 2D DFT of an arbitrary complex grid.
pub fn dft2_complex(values: &Grid<Complex64>) -> Grid<Complex64> {
    let (h, w) = values.dims();
    let mut data = values.data().to_vec();
    fft::fft2_in_place(&mut data, h, w, FftDirection::Forward);
    Grid::new(h, w, data).expect("dims preserved")
}

/// Inverse 2D DFT including the `1/(MN)` factor, keeping the complex result.
pub fn idft2_complex(spectrum: &Spectrum) -> Result<Grid<Complex64>> {
    if spectrum.layout != Layout::Unshifted {
        return Err(Error::InvalidState(
            "inverse transform needs an unshifted spectrum".into(),
        ));
    }
    let (h, w) = spectrum.dims();
    let mut data = spectrum.values.data().to_vec();
    fft::fft2_in_place(&mut data, h, w, FftDirection::Inverse);
    let scale = 1.0 / (h * w) as f64;
    for z in &mut data {
        *z *= scale;
    }
    Ok(Grid::new(h, w, data).expect("dims preserved"))
}

/// Inverse 2D DFT; the imaginary part is discarded.
///
/// For spectra of real frames the discarded residue is at rounding level.
pub fn idft2(spectrum: &Spectrum) -> Result<FrameGrid> {
    let complex = idft2_complex(spectrum)?;
    FrameGrid::new(complex.map(|z| z.re))
}

/// `|F(u,v)|`.
pub fn amplitude(spectrum: &Spectrum) -> RealGrid {
    spectrum.values.map(|z| z.norm())
}

/// Four-quadrant phase in `(−π, π]`; zero where the amplitude is below
/// [`PHASE_EPS`].
pub fn phase(spectrum: &Spectrum) -> RealGrid {
    spectrum.values.map(|&z| phase_of(z))
}

#[inline]
pub(crate) fn phase_of(z: Complex64) -> f64 {
    if z.norm() < PHASE_EPS {
        return 0.0;
    }
    let p = z.im.atan2(z.re);
    // atan2(−0, x<0) = −π; keep the half-open range.
    if p == -PI {
        PI
    } else {
        p
    }
}

/// Centers the DC term for display.
pub fn shift_spectrum(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.layout == Layout::Shifted {
        return Err(Error::InvalidState("spectrum is already shifted".into()));
    }
    Ok(Spectrum::new(fftshift(&spectrum.values), Layout::Shifted))
}

/// Undoes [`shift_spectrum`].
pub fn unshift_spectrum(spectrum: &Spectrum) -> Result<Spectrum> {
    if spectrum.layout == Layout::Unshifted {
        return Err(Error::InvalidState("spectrum is not shifted".into()));
    }
    Ok(Spectrum::new(ifftshift(&spectrum.values), Layout::Unshifted))
}

/// `log(1 + a)` elementwise. The input is expected to be nonnegative.
pub fn log_amplitude(amplitude: &RealGrid) -> RealGrid {
    amplitude.map(|a| a.ln_1p())
}
