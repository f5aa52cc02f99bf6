//! Frequency-domain analysis of frame sequences.
//!
//! The crate covers four pieces of machinery that share one set of grid and
//! spectrum types:
//!
//! * [`spectral`]: 2D DFT of frames, amplitude/phase views, display shifts.
//! * [`tfc`]: temporal amplitude/phase changes (TAC/TPC) between adjacent
//!   frames, video-level means, band energies, heatmaps and raw dumps.
//! * [`wtfr`]: the weighted temporal frequency regularization loss with
//!   analytic gradients, for use by external trainers.
//! * [`ffc`]: inference-only Fast Fourier Convolution blocks.
//! * [`metrics`]: warping-error temporal consistency (TCM), PSNR, SSIM,
//!   `.flo` flow files and a phase-correlation translation estimator.
//!
//! Everything here is a pure function of its inputs. Sequence-level helpers
//! fan out over transitions with rayon and reduce in index order, so results
//! do not depend on the thread count.

pub mod error;
pub mod ffc;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod spectral;
pub mod tfc;
pub mod wtfr;

pub use error::{Error, Result};
pub use grid::{Grid, RealGrid};
pub use spectral::{Frame, FrameGrid, Layout, Spectrum};
