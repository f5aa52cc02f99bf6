//! The subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use freqtc::ffc::{read_tensor, read_weights, write_tensor};
use freqtc::io::{encode_gray8, ImageKind};
use freqtc::metrics::{evaluate_video, read_flo, FlowField, MetricReport};
use freqtc::tfc::{band_energy, decode_grid_dump, encode_grid_dump, mean_tfc, render_heatmap};
use freqtc::wtfr::{load_config, wtfr_sequence_loss, WtfrConfig};
use freqtc::{Layout, RealGrid};
use serde::Serialize;

use crate::args::{FfcArgs, FormatArg, HeatmapArgs, MetricsArgs, TfcArgs, WtfrArgs};
use crate::error::{CliError, Context, Result};
use crate::report::{
    check_finite, config_hash, ensure_dir, to_json, write_file, METRICS_SCHEMA, TFC_SCHEMA, TOOL_VERSION, WTFR_SCHEMA,
};
use crate::sequence::{order_by_key, LoadedSequence};

pub const TFC_SUMMARY: &str = "tfc_summary.json";
pub const TAC_DUMP: &str = "mean_tac.tfcg";
pub const TPC_DUMP: &str = "mean_tpc.tfcg";
pub const WTFR_REPORT: &str = "wtfr.json";
pub const METRICS_REPORT: &str = "metrics.json";
pub const FFC_OUTPUT: &str = "output.ffct";

#[derive(Debug, Serialize)]
struct TfcConfig<'a> {
    phase_mode: &'a str,
    channels: &'a str,
    band_fraction: f64,
    image_format: &'a str,
}

#[derive(Debug, Serialize)]
struct Band {
    low: f64,
    high: f64,
}

#[derive(Debug, Serialize)]
struct BandEnergy {
    tac: Band,
    tpc: Band,
}

#[derive(Debug, Serialize)]
struct TfcOutputs {
    tac_heatmap: String,
    tpc_heatmap: String,
    tac_dump: &'static str,
    tpc_dump: &'static str,
}

#[derive(Debug, Serialize)]
struct TfcSummary<'a> {
    schema: &'static str,
    tool_version: &'static str,
    config_hash: String,
    config: TfcConfig<'a>,
    frames: usize,
    transitions: usize,
    height: usize,
    width: usize,
    channel_count: usize,
    inputs: Vec<String>,
    band_energy: BandEnergy,
    outputs: TfcOutputs,
}

fn heatmap_bytes(grid: &RealGrid, layout: Layout, log_scale: bool, kind: ImageKind) -> Result<Vec<u8>> {
    let pixels = render_heatmap(grid, layout, log_scale)?;
    Ok(encode_gray8(&pixels, grid.height(), grid.width(), kind)?)
}

/// Mean TAC/TPC of one sequence: dumps, heatmaps and a band-energy summary.
pub fn cmd_tfc(args: &TfcArgs, out: &mut dyn Write) -> Result<()> {
    if !(args.band_fraction > 0.0 && args.band_fraction <= 1.0) {
        return Err(CliError::Usage(format!(
            "--band-fraction must lie in (0, 1], got {}",
            args.band_fraction
        )));
    }
    let seq = args.selection.spec(&args.reference).load()?;
    let video = seq.video()?;
    let mode = args.phase_mode.mode();
    let mean = mean_tfc(&video, mode);
    let (tac_low, tac_high) = band_energy(&mean.mean_tac, args.band_fraction)?;
    let (tpc_low, tpc_high) = band_energy(&mean.mean_tpc, args.band_fraction)?;
    check_finite("mean TAC", mean.mean_tac.data().iter().copied())?;
    check_finite("mean TPC", mean.mean_tpc.data().iter().copied())?;

    let kind = args.format.kind();
    let outputs = TfcOutputs {
        tac_heatmap: format!("mean_tac.{}", kind.extension()),
        tpc_heatmap: format!("mean_tpc.{}", kind.extension()),
        tac_dump: TAC_DUMP,
        tpc_dump: TPC_DUMP,
    };
    let tac_image = heatmap_bytes(&mean.mean_tac, Layout::Unshifted, true, kind)?;
    let tpc_image = heatmap_bytes(&mean.mean_tpc, Layout::Unshifted, false, kind)?;

    let config = TfcConfig {
        phase_mode: mode.as_str(),
        channels: args.selection.channels.as_str(),
        band_fraction: args.band_fraction,
        image_format: kind.extension(),
    };
    let (height, width) = video.dims();
    let summary = TfcSummary {
        schema: TFC_SCHEMA,
        tool_version: TOOL_VERSION,
        config_hash: config_hash(&config),
        config,
        frames: video.len(),
        transitions: mean.transitions,
        height,
        width,
        channel_count: video.channel_count(),
        inputs: seq.names(),
        band_energy: BandEnergy {
            tac: Band {
                low: tac_low,
                high: tac_high,
            },
            tpc: Band {
                low: tpc_low,
                high: tpc_high,
            },
        },
        outputs,
    };

    ensure_dir(&args.out)?;
    write_file(
        &args.out.join(TAC_DUMP),
        &encode_grid_dump(&mean.mean_tac, Layout::Unshifted),
    )?;
    write_file(
        &args.out.join(TPC_DUMP),
        &encode_grid_dump(&mean.mean_tpc, Layout::Unshifted),
    )?;
    write_file(&args.out.join(&summary.outputs.tac_heatmap), &tac_image)?;
    write_file(&args.out.join(&summary.outputs.tpc_heatmap), &tpc_image)?;
    write_file(&args.out.join(TFC_SUMMARY), &to_json(&summary))?;
    writeln!(
        out,
        "{} frames, {} transitions; TAC low/high {tac_low:.6e}/{tac_high:.6e}, TPC low/high {tpc_low:.6e}/{tpc_high:.6e}",
        summary.frames, summary.transitions
    )?;
    Ok(())
}

/// Loads the reference and synthetic sequences and checks they line up.
fn load_pair(
    args_ref: &Path,
    args_syn: &Path,
    selection: &crate::args::Selection,
) -> Result<(LoadedSequence, LoadedSequence)> {
    let reference = selection.spec(args_ref).load().context("reference")?;
    let synthetic = selection.spec(args_syn).load().context("synthetic")?;
    if reference.frames.len() != synthetic.frames.len() {
        return Err(CliError::Usage(format!(
            "sequence lengths differ: reference has {} frames, synthetic has {}",
            reference.frames.len(),
            synthetic.frames.len()
        )));
    }
    let (rd, sd) = (reference.frames[0].dims(), synthetic.frames[0].dims());
    if rd != sd {
        return Err(CliError::Usage(format!(
            "frame sizes differ: reference is {}×{}, synthetic is {}×{}",
            rd.0, rd.1, sd.0, sd.1
        )));
    }
    Ok((reference, synthetic))
}

#[derive(Debug, Serialize)]
struct WtfrEcho<'a> {
    alpha: f64,
    beta: f64,
    delta: f64,
    phase_mode: &'a str,
    weighting: bool,
    channels: &'a str,
}

#[derive(Debug, Serialize)]
struct WtfrTransition {
    t: usize,
    l_tac: f64,
    l_tpc: f64,
    total: f64,
}

#[derive(Debug, Serialize)]
struct WtfrMeans {
    l_tac: f64,
    l_tpc: f64,
    total: f64,
}

#[derive(Debug, Serialize)]
struct WtfrReport<'a> {
    schema: &'static str,
    tool_version: &'static str,
    config_hash: String,
    config: WtfrEcho<'a>,
    frames: usize,
    height: usize,
    width: usize,
    per_transition: Vec<WtfrTransition>,
    means: WtfrMeans,
}

/// Resolves the loss configuration: file (or defaults), then flag overrides.
pub fn wtfr_config(args: &WtfrArgs) -> Result<WtfrConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path).map_err(|e| match e {
            freqtc::Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
            other => CliError::from(other).context(path.display()),
        })?,
        None => WtfrConfig::default(),
    };
    if let Some(mode) = args.phase_mode {
        cfg.phase_mode = mode.mode();
    }
    if args.no_weighting {
        cfg.weighting = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// WTFR of a synthetic sequence against its reference.
pub fn cmd_wtfr(args: &WtfrArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = wtfr_config(args)?;
    let (reference, synthetic) = load_pair(&args.reference, &args.synthetic, &args.selection)?;
    let (rv, sv) = (reference.video()?, synthetic.video()?);
    let loss = wtfr_sequence_loss(&rv, &sv, &cfg, false)?;
    check_finite(
        "WTFR",
        loss.per_transition
            .iter()
            .flat_map(|r| [r.total, r.l_tac, r.l_tpc])
            .chain([loss.mean_total]),
    )?;

    let config = WtfrEcho {
        alpha: cfg.alpha,
        beta: cfg.beta,
        delta: cfg.delta,
        phase_mode: cfg.phase_mode.as_str(),
        weighting: cfg.weighting,
        channels: args.selection.channels.as_str(),
    };
    let (height, width) = rv.dims();
    let report = WtfrReport {
        schema: WTFR_SCHEMA,
        tool_version: TOOL_VERSION,
        config_hash: config_hash(&config),
        config,
        frames: rv.len(),
        height,
        width,
        per_transition: loss
            .per_transition
            .iter()
            .enumerate()
            .map(|(i, r)| WtfrTransition {
                t: i + 1,
                l_tac: r.l_tac,
                l_tpc: r.l_tpc,
                total: r.total,
            })
            .collect(),
        means: WtfrMeans {
            l_tac: loss.mean_l_tac,
            l_tpc: loss.mean_l_tpc,
            total: loss.mean_total,
        },
    };
    ensure_dir(&args.out)?;
    write_file(&args.out.join(WTFR_REPORT), &to_json(&report))?;
    writeln!(
        out,
        "{} transitions; mean total {:.6e} (L_TAC {:.6e}, L_TPC {:.6e})",
        report.per_transition.len(),
        report.means.total,
        report.means.l_tac,
        report.means.l_tpc
    )?;
    Ok(())
}

/// Reads `flow_dir/*.flo`, numbered by transition index `1..=transitions`.
pub fn load_flows(flow_dir: &Path, transitions: usize) -> Result<Vec<FlowField>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(flow_dir).context(format!("reading {}", flow_dir.display()))? {
        let path = entry.context(format!("reading {}", flow_dir.display()))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("flo")) {
            paths.push(path);
        }
    }
    let files = order_by_key(paths)?;
    (1..=transitions)
        .map(|t| {
            let file = files.iter().find(|f| f.key == t as u64).ok_or_else(|| {
                CliError::Usage(format!(
                    "missing flow file for transition {t} in {}",
                    flow_dir.display()
                ))
            })?;
            read_flo(&file.path).context(format!("flow for transition {t} ({})", file.path.display()))
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct MetricsConfig<'a> {
    channels: &'a str,
    flow: &'a str,
}

#[derive(Debug, Serialize)]
struct MetricsOutput<'a> {
    schema: &'static str,
    tool_version: &'static str,
    config_hash: String,
    config: MetricsConfig<'a>,
    #[serde(flatten)]
    report: MetricReport,
}

/// TCM, PSNR and SSIM of a synthetic sequence against its reference.
pub fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let (reference, synthetic) = load_pair(&args.reference, &args.synthetic, &args.selection)?;
    let (rv, sv) = (reference.video()?, synthetic.video()?);
    let flows = if args.flow == "auto" {
        None
    } else {
        Some(load_flows(Path::new(&args.flow), rv.len() - 1)?)
    };
    let video_id = match &args.video_id {
        Some(id) => id.clone(),
        None => args
            .synthetic
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "video".into()),
    };
    let report = evaluate_video(&video_id, &rv, &sv, flows.as_deref())?;
    check_finite(
        "metrics",
        report
            .per_transition
            .iter()
            .map(|m| m.tcm)
            .chain(report.per_frame.iter().flat_map(|m| [m.psnr, m.ssim])),
    )?;
    let config = MetricsConfig {
        channels: args.selection.channels.as_str(),
        flow: if flows.is_some() { "files" } else { "auto" },
    };
    let output = MetricsOutput {
        schema: METRICS_SCHEMA,
        tool_version: TOOL_VERSION,
        config_hash: config_hash(&config),
        config,
        report,
    };
    ensure_dir(&args.out)?;
    write_file(&args.out.join(METRICS_REPORT), &to_json(&output))?;
    let m = &output.report.means;
    writeln!(out, "mean TCM {:.6}, PSNR {:.4} dB, SSIM {:.6}", m.tcm, m.psnr, m.ssim)?;
    Ok(())
}

/// Runs an FFC block stack on a tensor and prints the shape trace.
pub fn cmd_ffc(args: &FfcArgs, out: &mut dyn Write) -> Result<()> {
    let net = read_weights(&args.weights).context(args.weights.display())?;
    let input = read_tensor(&args.input).context(args.input.display())?;
    let (y, trace) = net.forward(&input)?;
    check_finite("FFC output", y.data().iter().copied())?;
    ensure_dir(&args.out)?;
    let path = args.out.join(FFC_OUTPUT);
    write_tensor(&path, &y).context(format!("writing {}", path.display()))?;
    let (c, h, w) = input.shape();
    writeln!(out, "input {c}x{h}x{w}")?;
    for (i, ((c, h, w), block)) in trace.iter().zip(&net.blocks).enumerate() {
        writeln!(out, "block {i} ({}): {c}x{h}x{w}", block.spec.kind.name())?;
    }
    Ok(())
}

/// Renders a grid dump to PGM or PNG.
pub fn cmd_heatmap(args: &HeatmapArgs, out: &mut dyn Write) -> Result<()> {
    let kind = match args.format {
        Some(f) => f.kind(),
        None => match args
            .out
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .as_deref()
        {
            Some("pgm") => FormatArg::Pgm.kind(),
            Some("png") => FormatArg::Png.kind(),
            _ => {
                return Err(CliError::Usage(format!(
                    "cannot infer an image format from {}; pass --format",
                    args.out.display()
                )))
            }
        },
    };
    let bytes = fs::read(&args.input).context(args.input.display())?;
    let (grid, layout) = decode_grid_dump(&bytes).context(args.input.display())?;
    let image = heatmap_bytes(&grid, layout, args.log, kind)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_file(&args.out, &image)?;
    writeln!(out, "{}x{} heatmap written", grid.height(), grid.width())?;
    Ok(())
}
