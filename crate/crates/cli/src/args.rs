//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freqtc::io::{ChannelMode, ImageKind};
use freqtc::tfc::PhaseMode;

use crate::sequence::{FrameRange, SequenceSpec};

/// Frequency-domain temporal consistency analysis of frame sequences
#[derive(Parser, Debug, Clone)]
#[command(name = "freqtc", version, about, long_about = None)]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Mean TAC/TPC heatmaps, raw grid dumps and band energies of a sequence
    Tfc(TfcArgs),
    /// Weighted temporal frequency loss between a reference and a synthetic sequence
    Wtfr(WtfrArgs),
    /// TCM, PSNR and SSIM of a synthetic sequence against its reference
    Metrics(MetricsArgs),
    /// Runs a stack of Fast Fourier Convolution blocks on a feature tensor
    Ffc(FfcArgs),
    /// Renders a raw grid dump as an 8-bit grayscale image
    Heatmap(HeatmapArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelArg {
    Rgb,
    Luma,
}

impl ChannelArg {
    pub fn mode(self) -> ChannelMode {
        match self {
            ChannelArg::Rgb => ChannelMode::Rgb,
            ChannelArg::Luma => ChannelMode::Luma,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelArg::Rgb => "rgb",
            ChannelArg::Luma => "luma",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseArg {
    Raw,
    Wrapped,
}

impl PhaseArg {
    pub fn mode(self) -> PhaseMode {
        match self {
            PhaseArg::Raw => PhaseMode::Raw,
            PhaseArg::Wrapped => PhaseMode::Wrapped,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatArg {
    Pgm,
    Png,
}

impl FormatArg {
    pub fn kind(self) -> ImageKind {
        match self {
            FormatArg::Pgm => ImageKind::Pgm,
            FormatArg::Png => ImageKind::Png,
        }
    }
}

/// Which files of a sequence directory are read, and how.
#[derive(Args, Debug, Clone)]
pub struct Selection {
    /// Glob on file names, e.g. "frame_*.png"; defaults to all PNG/PPM/PGM files
    #[arg(long)]
    pub pattern: Option<String>,

    /// Inclusive frame-number range START:END (either side may be empty)
    #[arg(long)]
    pub range: Option<FrameRange>,

    /// Per-channel analysis of RGB, or a single luma channel
    #[arg(long, value_enum, default_value = "rgb")]
    pub channels: ChannelArg,
}

impl Selection {
    pub fn spec(&self, dir: &std::path::Path) -> SequenceSpec {
        SequenceSpec {
            dir: dir.to_path_buf(),
            pattern: self.pattern.clone(),
            channels: self.channels.mode(),
            range: self.range,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TfcArgs {
    /// Directory of numbered frames
    #[arg(long = "ref", value_name = "DIR")]
    pub reference: PathBuf,

    #[command(flatten)]
    pub selection: Selection,

    /// Phase distance used for TPC
    #[arg(long, value_enum, default_value = "wrapped")]
    pub phase_mode: PhaseArg,

    /// Normalized radius splitting the low and high bands
    #[arg(long, default_value_t = 0.5)]
    pub band_fraction: f64,

    /// Heatmap image format
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: FormatArg,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct WtfrArgs {
    /// Directory of numbered reference frames
    #[arg(long = "ref", value_name = "DIR")]
    pub reference: PathBuf,

    /// Directory of numbered synthetic frames
    #[arg(long = "syn", value_name = "DIR")]
    pub synthetic: PathBuf,

    #[command(flatten)]
    pub selection: Selection,

    /// TOML file with alpha, beta, delta, phase_mode and weighting
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Overrides the configured phase mode
    #[arg(long, value_enum)]
    pub phase_mode: Option<PhaseArg>,

    /// Disables the radial frequency weighting
    #[arg(long)]
    pub no_weighting: bool,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MetricsArgs {
    /// Directory of numbered reference frames
    #[arg(long = "ref", value_name = "DIR")]
    pub reference: PathBuf,

    /// Directory of numbered synthetic frames
    #[arg(long = "syn", value_name = "DIR")]
    pub synthetic: PathBuf,

    #[command(flatten)]
    pub selection: Selection,

    /// Directory of .flo files numbered by transition, or "auto" for phase correlation
    #[arg(long, default_value = "auto", value_name = "DIR|auto")]
    pub flow: String,

    /// Identifier recorded in the report; defaults to the synthetic directory name
    #[arg(long)]
    pub video_id: Option<String>,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct FfcArgs {
    /// FFCW weight file
    #[arg(long, value_name = "FILE")]
    pub weights: PathBuf,

    /// FFCT input tensor of shape [C, H, W]
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct HeatmapArgs {
    /// TFCG grid dump
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Apply log(1 + x) before scaling
    #[arg(long)]
    pub log: bool,

    /// Image format; inferred from the output extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Output image file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}
