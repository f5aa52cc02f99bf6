//! Seeded frame-sequence fixtures, in-process CLI runs and golden files.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::ffi::{OsStr, OsString};
use std::fs;
use std::path::{Path, PathBuf};

use freqtc::ffc::{write_tensor, write_weights, BlockKind, BlockSpec, FeatureTensor, FfcNetwork, FfcWeights};
use freqtc::io::{write_gray8, ImageKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Set to regenerate the frozen goldens instead of comparing against them.
pub const BLESS_VAR: &str = "FREQTC_BLESS";

pub fn golden_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// A reference/synthetic pair of 8-bit grayscale sequences.
pub struct Fixture {
    pub name: &'static str,
    pub height: usize,
    pub width: usize,
    pub reference: Vec<Vec<u8>>,
    pub synthetic: Vec<Vec<u8>>,
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Three identical frames of a fixed texture; the synthetic copy is exact.
pub fn static_clip() -> Fixture {
    let (h, w) = (16, 16);
    let frame: Vec<u8> = (0..h * w)
        .map(|i| (((i / w) * 7 + (i % w) * 3) % 16 * 16) as u8)
        .collect();
    Fixture {
        name: "static_clip",
        height: h,
        width: w,
        reference: vec![frame.clone(); 3],
        synthetic: vec![frame; 3],
    }
}

fn square_frame(h: usize, w: usize, top: i64, left: i64, level: u8) -> Vec<u8> {
    let mut px = vec![30u8; h * w];
    for r in 0..6i64 {
        for c in 0..6i64 {
            let (y, x) = (top + r, left + c);
            if (0..h as i64).contains(&y) && (0..w as i64).contains(&x) {
                px[y as usize * w + x as usize] = level;
            }
        }
    }
    px
}

/// A bright square moving one row down and two columns right per frame;
/// the synthetic square jitters by up to a pixel and is dimmer.
pub fn moving_square() -> Fixture {
    let (h, w) = (24, 32);
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let mut reference = Vec::new();
    let mut synthetic = Vec::new();
    for i in 0..6i64 {
        reference.push(square_frame(h, w, 4 + i, 3 + 2 * i, 220));
        let (jy, jx) = (r.random_range(-1..=1), r.random_range(-1..=1));
        synthetic.push(square_frame(h, w, 4 + i + jy, 3 + 2 * i + jx, 200));
    }
    Fixture {
        name: "moving_square",
        height: h,
        width: w,
        reference,
        synthetic,
    }
}

/// A smooth pattern translating one pixel per frame; the synthetic copy adds
/// i.i.d. Gaussian noise with σ = 0.05.
pub fn noisy_synthetic() -> Fixture {
    let (h, w) = (24, 24);
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let pattern = |y: f64, x: f64| {
        let tau = std::f64::consts::TAU;
        0.5 + 0.2 * (tau * x / 24.0).sin() + 0.15 * (tau * (2.0 * y + x) / 24.0).cos()
    };
    let mut reference = Vec::new();
    let mut synthetic = Vec::new();
    for t in 0..5 {
        let clean: Vec<f64> = (0..h * w)
            .map(|i| pattern((i / w) as f64, (i % w) as f64 - t as f64))
            .collect();
        reference.push(clean.iter().map(|&v| quantize(v)).collect());
        synthetic.push(clean.iter().map(|&v| quantize(v + noise.sample(&mut r))).collect());
    }
    Fixture {
        name: "noisy_synthetic",
        height: h,
        width: w,
        reference,
        synthetic,
    }
}

pub fn all_fixtures() -> Vec<Fixture> {
    vec![static_clip(), moving_square(), noisy_synthetic()]
}

/// Writes `frames` as `frame_000.png`, `frame_001.png`, ...
pub fn write_sequence(dir: &Path, frames: &[Vec<u8>], h: usize, w: usize) {
    fs::create_dir_all(dir).unwrap();
    for (i, px) in frames.iter().enumerate() {
        write_gray8(&dir.join(format!("frame_{i:03}.png")), px, h, w, ImageKind::Png).unwrap();
    }
}

impl Fixture {
    /// Writes the inputs under `root` and returns `(ref_dir, syn_dir)`.
    pub fn materialize(&self, root: &Path) -> (PathBuf, PathBuf) {
        let (rd, sd) = (root.join("ref"), root.join("syn"));
        write_sequence(&rd, &self.reference, self.height, self.width);
        write_sequence(&sd, &self.synthetic, self.height, self.width);
        (rd, sd)
    }
}

/// Runs the CLI in-process; returns `(exit code, stdout, stderr)`.
pub fn run_cli<S: AsRef<OsStr>>(args: &[S]) -> (i32, String, String) {
    let mut full: Vec<OsString> = vec!["freqtc".into()];
    full.extend(args.iter().map(|a| a.as_ref().to_os_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = freqtc_cli::main_with_args(full, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

fn run_ok(args: &[OsString]) {
    let (code, _, err) = run_cli(args);
    assert_eq!(code, 0, "freqtc {args:?} failed: {err}");
}

/// Builds an argument vector from strings and paths.
pub fn argv(parts: &[&dyn AsRef<OsStr>]) -> Vec<OsString> {
    parts.iter().map(|p| p.as_ref().to_os_string()).collect()
}

/// Runs `tfc`, `wtfr` and `metrics` on a materialized fixture and returns
/// every output file keyed by `command/file`.
pub fn run_fixture(
    fixture: &Fixture,
    ref_dir: &Path,
    syn_dir: &Path,
    out: &Path,
    threads: u16,
) -> BTreeMap<String, Vec<u8>> {
    let t = threads.to_string();
    run_ok(&argv(&[
        &"tfc",
        &"--ref",
        &ref_dir,
        &"--out",
        &out.join("tfc"),
        &"--threads",
        &t,
    ]));
    run_ok(&argv(&[
        &"wtfr",
        &"--ref",
        &ref_dir,
        &"--syn",
        &syn_dir,
        &"--out",
        &out.join("wtfr"),
        &"--threads",
        &t,
    ]));
    run_ok(&argv(&[
        &"metrics",
        &"--ref",
        &ref_dir,
        &"--syn",
        &syn_dir,
        &"--video-id",
        &fixture.name,
        &"--out",
        &out.join("metrics"),
        &"--threads",
        &t,
    ]));
    collect_outputs(out)
}

/// Every file under `root`, keyed by its `/`-joined relative path.
pub fn collect_outputs(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap();
                let key = rel.iter().map(|p| p.to_string_lossy()).collect::<Vec<_>>().join("/");
                files.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    files
}

/// Compares outputs with `golden/<name>/`, or rewrites it when blessing.
/// Returns the keys that differ.
pub fn check_golden(name: &str, outputs: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let dir = golden_root().join(name);
    if std::env::var_os(BLESS_VAR).is_some() {
        let _ = fs::remove_dir_all(&dir);
        for (key, bytes) in outputs {
            let path = dir.join(key);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, bytes).unwrap();
        }
        return Vec::new();
    }
    let frozen = if dir.is_dir() {
        collect_outputs(&dir)
    } else {
        BTreeMap::new()
    };
    let mut diffs: Vec<String> = outputs
        .iter()
        .filter(|(k, v)| frozen.get(*k) != Some(v))
        .map(|(k, _)| k.clone())
        .collect();
    diffs.extend(frozen.keys().filter(|k| !outputs.contains_key(*k)).cloned());
    diffs
}

/// Two seeded FFC blocks (a normed same block and a down block) and a
/// 4×12×10 input, written as FFCW/FFCT under `root`.
pub fn ffc_fixture(root: &Path) -> (PathBuf, PathBuf, FfcNetwork, FeatureTensor) {
    let mut r = ChaCha8Rng::seed_from_u64(77);
    let mut same = BlockSpec::same(4, 0.5);
    same.norm = true;
    same.activation = true;
    let mut down = BlockSpec::same(4, 0.5);
    down.kind = BlockKind::Down;
    down.out_channels = 6;
    let mut fill = |name: &str, _: usize| {
        let v = r.random::<f32>();
        if name.ends_with(".scale") {
            (0.5 + v) as f64
        } else {
            ((v - 0.5) * 0.6) as f64
        }
    };
    let net = FfcNetwork::new(vec![
        FfcWeights::from_fn(same, 2, &mut fill).unwrap(),
        FfcWeights::from_fn(down, 2, &mut fill).unwrap(),
    ])
    .unwrap();
    let input = FeatureTensor::from_fn(4, 12, 10, |_, _, _| (r.random::<f32>() * 2.0 - 1.0) as f64);
    fs::create_dir_all(root).unwrap();
    let (wp, ip) = (root.join("net.ffcw"), root.join("input.ffct"));
    write_weights(&wp, &net).unwrap();
    write_tensor(&ip, &input).unwrap();
    (wp, ip, net, input)
}
