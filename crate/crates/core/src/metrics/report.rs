//! Video-level evaluation: TCM per transition, PSNR/SSIM per frame.

use rayon::prelude::*;
use serde::Serialize;

use super::flow::FlowField;
use super::phase_corr::estimate_flow_translation;
use super::quality::{psnr, ssim};
use super::tcm::tcm;
use crate::error::{Error, Result};
use crate::tfc::VideoSequence;

/// Where the flows used for TCM came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowSource {
    #[serde(rename = "files")]
    Files,
    #[serde(rename = "phase-correlation")]
    PhaseCorrelation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMetric {
    /// Index of the later frame of the transition.
    pub t: usize,
    pub tcm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameMetric {
    pub t: usize,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricMeans {
    pub tcm: f64,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub video_id: String,
    pub flow_source: FlowSource,
    pub per_transition: Vec<TransitionMetric>,
    pub per_frame: Vec<FrameMetric>,
    pub means: MetricMeans,
}

/// Evaluates `synthetic` against `reference`.
///
/// `flows[i]` is the flow of the transition into frame `i + 1`; when `None`,
/// flows are estimated on the reference pairs by phase correlation.
pub fn evaluate_video(
    video_id: &str,
    reference: &VideoSequence,
    synthetic: &VideoSequence,
    flows: Option<&[FlowField]>,
) -> Result<MetricReport> {
    reference.check_aligned(synthetic)?;
    let transitions = reference.len() - 1;
    if let Some(flows) = flows {
        if flows.len() != transitions {
            return Err(Error::InvalidInput(format!(
                "{} flow fields for {transitions} transitions",
                flows.len()
            )));
        }
        for (i, f) in flows.iter().enumerate() {
            if f.dims() != reference.dims() {
                let (fh, fw) = f.dims();
                let (h, w) = reference.dims();
                return Err(Error::DimensionMismatch(format!(
                    "flow for transition {} is {fh}×{fw}, frames are {h}×{w}",
                    i + 1
                )));
            }
        }
    }
    let r = reference.frames();
    let s = synthetic.frames();
    let per_transition = (1..=transitions)
        .into_par_iter()
        .map(|t| {
            let flow = match flows {
                Some(f) => f[t - 1].clone(),
                None => estimate_flow_translation(&r[t - 1], &r[t])?,
            };
            Ok(TransitionMetric {
                t,
                tcm: tcm(&r[t - 1], &r[t], &s[t - 1], &s[t], &flow)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_frame = (0..r.len())
        .into_par_iter()
        .map(|t| {
            Ok(FrameMetric {
                t,
                psnr: psnr(&s[t], &r[t])?,
                ssim: ssim(&s[t], &r[t])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = |xs: &mut dyn Iterator<Item = f64>, n: usize| xs.sum::<f64>() / n as f64;
    let means = MetricMeans {
        tcm: mean(&mut per_transition.iter().map(|m| m.tcm), per_transition.len()),
        psnr: mean(&mut per_frame.iter().map(|m| m.psnr), per_frame.len()),
        ssim: mean(&mut per_frame.iter().map(|m| m.ssim), per_frame.len()),
    };
    Ok(MetricReport {
        video_id: video_id.to_string(),
        flow_source: if flows.is_some() {
            FlowSource::Files
        } else {
            FlowSource::PhaseCorrelation
        },
        per_transition,
        per_frame,
        means,
    })
}
