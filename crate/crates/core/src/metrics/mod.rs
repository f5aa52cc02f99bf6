//! Video evaluation metrics and optical-flow plumbing.

mod flow;
mod phase_corr;
mod quality;
mod report;
mod tcm;

pub use flow::{decode_flo, encode_flo, read_flo, warp, write_flo, FlowField, FLO_MAGIC};
pub use phase_corr::{estimate_flow_translation, estimate_translation};
pub use quality::{mse, psnr, ssim, PSNR_CAP, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use report::{evaluate_video, FlowSource, FrameMetric, MetricMeans, MetricReport, TransitionMetric};
pub use tcm::{tcm, tcm_from_errors, warping_error, ERROR_EPS};
