//! Frame-sequence directories: file discovery, numeric ordering and loading.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use freqtc::io::{load_frame, ChannelMode};
use freqtc::tfc::VideoSequence;
use freqtc::Frame;
use rayon::prelude::*;

use crate::error::{CliError, Context, Result};

/// File extensions picked up when no pattern is given.
pub const DEFAULT_EXTENSIONS: [&str; 3] = ["png", "ppm", "pgm"];

/// Inclusive bounds on frame keys; either side may be open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameRange {
    pub start: Option<u64>,
    pub end: Option<u64>,
}

impl FrameRange {
    pub fn contains(&self, key: u64) -> bool {
        self.start.is_none_or(|s| key >= s) && self.end.is_none_or(|e| key <= e)
    }
}

impl FromStr for FrameRange {
    type Err = String;

    /// Parses `START:END`, `START:` or `:END`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("range {s:?} must look like START:END"))?;
        let bound = |t: &str| -> Result<Option<u64>, String> {
            let t = t.trim();
            if t.is_empty() {
                Ok(None)
            } else {
                t.parse()
                    .map(Some)
                    .map_err(|_| format!("range bound {t:?} is not a frame number"))
            }
        };
        let range = FrameRange {
            start: bound(a)?,
            end: bound(b)?,
        };
        if let (Some(s), Some(e)) = (range.start, range.end) {
            if s > e {
                return Err(format!("range start {s} exceeds end {e}"));
            }
        }
        Ok(range)
    }
}

/// A directory of numbered frames.
#[derive(Debug, Clone)]
pub struct SequenceSpec {
    pub dir: PathBuf,
    /// Glob matched against file names; `None` selects PNG/PPM/PGM files.
    pub pattern: Option<String>,
    pub channels: ChannelMode,
    pub range: Option<FrameRange>,
}

/// One resolved frame file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFile {
    pub key: u64,
    pub path: PathBuf,
}

impl FrameFile {
    pub fn name(&self) -> String {
        self.path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

/// The value of the last run of ASCII digits in `stem`.
pub fn numeric_key(stem: &str) -> Option<u64> {
    let bytes = stem.as_bytes();
    let end = bytes.iter().rposition(u8::is_ascii_digit)? + 1;
    let start = bytes[..end]
        .iter()
        .rposition(|b| !b.is_ascii_digit())
        .map_or(0, |i| i + 1);
    stem[start..end].parse().ok()
}

/// Orders files by numeric key, rejecting files without a key and ties.
pub fn order_by_key(paths: Vec<PathBuf>) -> Result<Vec<FrameFile>> {
    let mut files = paths
        .into_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match numeric_key(&stem) {
                Some(key) => Ok(FrameFile { key, path }),
                None => Err(CliError::Usage(format!(
                    "{} has no frame number in its name",
                    path.display()
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    files.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.path.cmp(&b.path)));
    if let Some(w) = files.windows(2).find(|w| w[0].key == w[1].key) {
        return Err(CliError::Usage(format!(
            "{} and {} share frame number {}",
            w[0].path.display(),
            w[1].path.display(),
            w[0].key
        )));
    }
    Ok(files)
}

fn has_default_extension(path: &Path) -> bool {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .is_some_and(|e| DEFAULT_EXTENSIONS.contains(&e.as_str()))
}

impl SequenceSpec {
    pub fn new(dir: impl Into<PathBuf>, channels: ChannelMode) -> Self {
        SequenceSpec {
            dir: dir.into(),
            pattern: None,
            channels,
            range: None,
        }
    }

    /// Lists, orders and range-filters the frame files.
    pub fn resolve(&self) -> Result<Vec<FrameFile>> {
        let pattern = match &self.pattern {
            Some(p) => Some(glob::Pattern::new(p).map_err(|e| CliError::Usage(format!("pattern {p:?}: {e}")))?),
            None => None,
        };
        let entries = fs::read_dir(&self.dir).context(format!("reading {}", self.dir.display()))?;
        let mut paths = Vec::new();
        for entry in entries {
            let entry = entry.context(format!("reading {}", self.dir.display()))?;
            let path = entry.path();
            if !path.is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            let selected = match &pattern {
                Some(p) => p.matches(&name),
                None => has_default_extension(&path),
            };
            if selected {
                paths.push(path);
            }
        }
        let mut files = order_by_key(paths)?;
        if let Some(range) = self.range {
            files.retain(|f| range.contains(f.key));
        }
        if files.is_empty() {
            return Err(CliError::Usage(format!("no frames selected in {}", self.dir.display())));
        }
        Ok(files)
    }

    /// Resolves and decodes the sequence, checking that dimensions agree.
    pub fn load(&self) -> Result<LoadedSequence> {
        let files = self.resolve()?;
        let frames: Vec<Frame> = files
            .par_iter()
            .map(|f| load_frame(&f.path, self.channels).context(f.path.display()))
            .collect::<Result<_>>()?;
        let first = frames[0].dims();
        for (f, frame) in files.iter().zip(&frames) {
            if frame.dims() != first {
                return Err(CliError::Usage(format!(
                    "dimension drift: {} is {}×{}, {} is {}×{}",
                    f.path.display(),
                    frame.dims().0,
                    frame.dims().1,
                    files[0].path.display(),
                    first.0,
                    first.1
                )));
            }
        }
        Ok(LoadedSequence { files, frames })
    }
}

/// Decoded frames with the files they came from.
#[derive(Debug, Clone)]
pub struct LoadedSequence {
    pub files: Vec<FrameFile>,
    pub frames: Vec<Frame>,
}

impl LoadedSequence {
    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(FrameFile::name).collect()
    }

    /// Wraps the frames as a video of at least two frames.
    pub fn video(&self) -> Result<VideoSequence> {
        if self.frames.len() < 2 {
            return Err(CliError::Usage(format!(
                "need at least 2 frames, found {}",
                self.frames.len()
            )));
        }
        Ok(VideoSequence::new(self.frames.clone())?)
    }
}
