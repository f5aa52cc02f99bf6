//! Independent reference implementations and seeded fixtures for tests.
//!
//! Everything here is written directly from the defining formulas with plain
//! loops; none of it calls the fast paths under test except where noted.

#![allow(dead_code)]

use std::f64::consts::PI;

use freqtc::ffc::{Affine, BlockSpec, FeatureTensor, FfcWeights, SpectralTransformWeights};
use freqtc::spectral::{self, Complex64};
use freqtc::tfc::{PhaseMode, VideoSequence};
use freqtc::wtfr::{wtfr_loss, WtfrConfig};
use freqtc::{Frame, FrameGrid, Grid, Layout, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(rng: &mut impl Rng, h: usize, w: usize) -> FrameGrid {
    FrameGrid::from_fn(h, w, |_, _| rng.random::<f64>()).unwrap()
}

pub fn random_frame(rng: &mut impl Rng, h: usize, w: usize, channels: usize) -> Frame {
    Frame::new((0..channels).map(|_| random_grid(rng, h, w)).collect()).unwrap()
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// `Σ_x Σ_y f(x,y)·exp(∓i2π(ux/M + vy/N))` as a literal double sum.
fn naive_transform(values: &[Complex64], h: usize, w: usize, sign: f64) -> Vec<Complex64> {
    let th = twiddles(h, sign);
    let tw = twiddles(w, sign);
    let mut out = vec![Complex64::default(); h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex64::default();
            for x in 0..h {
                let a = th[(u * x) % h];
                for y in 0..w {
                    acc += values[x * w + y] * a * tw[(v * y) % w];
                }
            }
            out[u * w + v] = acc;
        }
    }
    out
}

pub fn naive_dft2(values: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    naive_transform(values, h, w, -1.0)
}

/// Inverse double sum including `1/(MN)`.
pub fn naive_idft2(values: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let scale = 1.0 / (h * w) as f64;
    naive_transform(values, h, w, 1.0)
        .into_iter()
        .map(|z| z * scale)
        .collect()
}

/// DFT of a real grid. Bins with `(2u mod M, 2v mod N) = (0, 0)` are exactly
/// real for real input, so their imaginary part is set to zero.
pub fn naive_real_dft2(grid: &FrameGrid) -> Vec<Complex64> {
    let (h, w) = grid.dims();
    let input: Vec<Complex64> = grid.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut out = naive_dft2(&input, h, w);
    for u in 0..h {
        for v in 0..w {
            if (2 * u) % h == 0 && (2 * v) % w == 0 {
                out[u * w + v].im = 0.0;
            }
        }
    }
    out
}

/// Four-quadrant phase in `(−π, π]`, zero below amplitude 1e-12.
pub fn naive_phase(z: Complex64) -> f64 {
    if (z.re * z.re + z.im * z.im).sqrt() < 1e-12 {
        return 0.0;
    }
    let p = z.im.atan2(z.re);
    if p <= -PI {
        p + 2.0 * PI
    } else {
        p
    }
}

pub fn naive_phase_distance(a: f64, b: f64, mode: PhaseMode) -> f64 {
    let d = (a - b).abs();
    match mode {
        PhaseMode::Raw => d,
        PhaseMode::Wrapped => {
            if d > PI {
                2.0 * PI - d
            } else {
                d
            }
        }
    }
}

pub fn naive_weight(u: usize, v: usize, h: usize, w: usize, delta: f64) -> f64 {
    let (hm, hn) = (h as f64 / 2.0, w as f64 / 2.0);
    let du = u as f64 - hm;
    let dv = v as f64 - hn;
    (hm * hm + hn * hn).powf(delta) - (du * du + dv * dv).powf(delta) + 1.0
}

pub struct NaiveLoss {
    pub total: f64,
    pub l_tac: f64,
    pub l_tpc: f64,
}

/// WTFR of one transition from naive DFTs, averaged over channels.
#[allow(clippy::too_many_arguments)]
pub fn naive_wtfr(
    ref_prev: &Frame,
    ref_curr: &Frame,
    syn_prev: &Frame,
    syn_curr: &Frame,
    alpha: f64,
    beta: f64,
    delta: f64,
    mode: PhaseMode,
    weighting: bool,
) -> NaiveLoss {
    let (h, w) = ref_prev.dims();
    let channels = ref_prev.channel_count();
    let (mut l_tac, mut l_tpc) = (0.0, 0.0);
    for c in 0..channels {
        let spec = |f: &Frame| naive_real_dft2(&f.channels()[c]);
        let (rp, rc, sp, sc) = (spec(ref_prev), spec(ref_curr), spec(syn_prev), spec(syn_curr));
        for u in 0..h {
            for v in 0..w {
                let i = u * w + v;
                let wt = if weighting {
                    naive_weight(u, v, h, w, delta)
                } else {
                    1.0
                };
                let tac_r = (rc[i].norm() - rp[i].norm()).abs();
                let tac_s = (sc[i].norm() - sp[i].norm()).abs();
                let tpc_r = naive_phase_distance(naive_phase(rc[i]), naive_phase(rp[i]), mode);
                let tpc_s = naive_phase_distance(naive_phase(sc[i]), naive_phase(sp[i]), mode);
                l_tac += wt * (tac_r - tac_s).abs();
                l_tpc += wt * (tpc_r - tpc_s).abs();
            }
        }
    }
    let norm = 1.0 / ((h * w) as f64 * channels as f64);
    let (l_tac, l_tpc) = (l_tac * norm, l_tpc * norm);
    NaiveLoss {
        total: alpha * l_tac + beta * l_tpc,
        l_tac,
        l_tpc,
    }
}

/// Smallest distance of any loss term of one transition from a kink of the
/// absolute values, together with the smallest spectral amplitude.
///
/// Self-conjugate bins keep a phase of exactly 0 or π under real
/// perturbations, so they are left out of the phase-kink margins.
pub fn kink_margins(frames: [&Frame; 4], mode: PhaseMode) -> (f64, f64) {
    let (h, w) = frames[0].dims();
    let (mut min_amp, mut min_margin) = (f64::INFINITY, f64::INFINITY);
    for c in 0..frames[0].channel_count() {
        let s: Vec<Vec<Complex64>> = frames.iter().map(|f| naive_real_dft2(&f.channels()[c])).collect();
        for u in 0..h {
            for v in 0..w {
                let i = u * w + v;
                for z in &s {
                    min_amp = min_amp.min(z[i].norm());
                }
                let amp = |k: usize| s[k][i].norm();
                let ph = |k: usize| naive_phase(s[k][i]);
                let tac_r = (amp(1) - amp(0)).abs();
                let syn_diff = amp(3) - amp(2);
                min_margin = min_margin.min(syn_diff.abs()).min((tac_r - syn_diff.abs()).abs());
                if (2 * u) % h == 0 && (2 * v) % w == 0 {
                    continue;
                }
                let raw_s = (ph(3) - ph(2)).abs();
                let tpc_r = naive_phase_distance(ph(1), ph(0), mode);
                let tpc_s = naive_phase_distance(ph(3), ph(2), mode);
                min_margin = min_margin.min(raw_s).min((tpc_r - tpc_s).abs());
                match mode {
                    PhaseMode::Wrapped => {
                        min_margin = min_margin.min((raw_s - PI).abs()).min(2.0 * PI - raw_s);
                    }
                    PhaseMode::Raw => {
                        // the principal phase jumps across the negative real axis
                        min_margin = min_margin.min(PI - ph(2).abs()).min(PI - ph(3).abs());
                    }
                }
            }
        }
    }
    (min_amp, min_margin)
}

/// Relative error used by gradient checks.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Frame with one pixel of one channel replaced.
pub fn perturbed(frame: &Frame, channel: usize, r: usize, c: usize, delta: f64) -> Frame {
    let mut grids: Vec<FrameGrid> = frame.channels().to_vec();
    let g = &grids[channel];
    let (h, w) = g.dims();
    grids[channel] = FrameGrid::from_fn(h, w, |rr, cc| {
        let v = g.get(rr, cc);
        if (rr, cc) == (r, c) {
            v + delta
        } else {
            *v
        }
    })
    .unwrap();
    Frame::new(grids).unwrap()
}

/// 16-frame, 32×32 clip of a band-limited texture translating cyclically by
/// 0.25 px per frame along columns; `noise_sigma > 0` adds clamped i.i.d.
/// Gaussian noise.
pub fn translation_clip(seed: u64, noise_sigma: f64) -> VideoSequence {
    const SIZE: usize = 32;
    const FRAMES: usize = 16;
    const STEP: f64 = 0.25;
    let mut rng = rng(seed);
    // one half plane of integer frequencies, without DC and Nyquist lines
    let mut waves = Vec::new();
    let lim = (SIZE / 2) as i64;
    for p in 0..lim {
        for q in (1 - lim)..lim {
            if p == 0 && q <= 0 {
                continue;
            }
            let r = ((p * p + q * q) as f64).sqrt();
            let phase = rng.random::<f64>() * 2.0 * PI;
            waves.push((p as f64, q as f64, 0.4 / 60.0 / (1.0 + r), phase));
        }
    }
    let noise = Normal::new(0.0, noise_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let frames = (0..FRAMES)
        .map(|t| {
            let shift = STEP * t as f64;
            let clean = FrameGrid::from_fn(SIZE, SIZE, |x, y| {
                let mut v = 0.5;
                for &(p, q, a, ph) in &waves {
                    let arg = 2.0 * PI * (p * x as f64 + q * (y as f64 - shift)) / SIZE as f64 + ph;
                    v += a * arg.cos();
                }
                v
            })
            .unwrap();
            let g = if noise_sigma > 0.0 {
                FrameGrid::from_fn(SIZE, SIZE, |x, y| {
                    (clean.get(x, y) + noise.sample(&mut rng)).clamp(0.0, 1.0)
                })
                .unwrap()
            } else {
                clean.clamped()
            };
            Frame::gray(g)
        })
        .collect();
    VideoSequence::new(frames).unwrap()
}

fn oracle_conv1x1(x: &[Vec<f64>], weight: &[f64], bias: &[f64], out: usize) -> Vec<Vec<f64>> {
    let cin = x.len();
    let n = x[0].len();
    (0..out)
        .map(|o| {
            (0..n)
                .map(|p| bias[o] + (0..cin).map(|i| weight[o * cin + i] * x[i][p]).sum::<f64>())
                .collect()
        })
        .collect()
}

fn oracle_norm_act(x: &mut [Vec<f64>], norm: Option<&Affine>, activation: bool) {
    for (c, plane) in x.iter_mut().enumerate() {
        for v in plane.iter_mut() {
            if let Some(n) = norm {
                *v = n.scale[c] * *v + n.shift[c];
            }
            if activation && *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

/// Spectral transform evaluated through the full complex DFT of the
/// spectral module, with the half spectrum extended by
/// `Z(u, v) = conj Z(−u, −v)` before the inverse.
pub fn oracle_spectral_transform(x: &FeatureTensor, w: &SpectralTransformWeights) -> FeatureTensor {
    let (c, h, width) = x.shape();
    let planes: Vec<Vec<f64>> = (0..c).map(|i| x.plane(i).to_vec()).collect();
    let hidden_n = w.pre.out_channels;
    let mut hidden = oracle_conv1x1(&planes, &w.pre.weight, &w.pre.bias, hidden_n);
    oracle_norm_act(&mut hidden, w.pre_norm.as_ref(), w.activation);

    let wf = width / 2 + 1;
    let ortho = ((h * width) as f64).sqrt();
    let mut stacked = Vec::with_capacity(2 * hidden_n);
    for plane in &hidden {
        let g = Grid::from_fn(h, width, |r, col| Complex64::new(plane[r * width + col], 0.0));
        let f = spectral::dft2_complex(&g);
        let half = |part: fn(&Complex64) -> f64| -> Vec<f64> {
            (0..h)
                .flat_map(|u| (0..wf).map(move |v| (u, v)))
                .map(|(u, v)| part(f.get(u, v)) / ortho)
                .collect()
        };
        stacked.push(half(|z| z.re));
        stacked.push(half(|z| z.im));
    }
    let mut mixed = oracle_conv1x1(&stacked, &w.freq.weight, &w.freq.bias, 2 * hidden_n);
    oracle_norm_act(&mut mixed, w.freq_norm.as_ref(), w.activation);

    let mut back = Vec::with_capacity(hidden_n);
    for k in 0..hidden_n {
        let z = |u: usize, v: usize| Complex64::new(mixed[2 * k][u * wf + v], mixed[2 * k + 1][u * wf + v]);
        let full = Grid::from_fn(h, width, |u, v| {
            if v < wf {
                z(u, v)
            } else {
                z((h - u) % h, width - v).conj()
            }
        });
        let spatial = spectral::idft2_complex(&Spectrum::new(full, Layout::Unshifted)).unwrap();
        back.push(spatial.data().iter().map(|z| z.re * ortho).collect::<Vec<f64>>());
    }
    let out = oracle_conv1x1(&back, &w.post.weight, &w.post.bias, w.post.out_channels);
    FeatureTensor::from_fn(out.len(), h, width, |ch, r, col| out[ch][r * width + col])
}

/// Central-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-6;

/// Draws transitions until `count` of them are smooth enough for finite
/// differences: every amplitude above 1e-3 and every kink margin above 1e-6.
pub fn qualifying_cases(seed: u64, count: usize, mode: PhaseMode) -> Vec<[Frame; 4]> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut drawn = 0;
    while out.len() < count {
        drawn += 1;
        assert!(drawn < 50 * count, "too few qualifying draws");
        let size = if out.len() % 2 == 0 { 4 } else { 8 };
        let f: [Frame; 4] = std::array::from_fn(|_| random_frame(&mut r, size, size, 1));
        let (min_amp, margin) = kink_margins([&f[0], &f[1], &f[2], &f[3]], mode);
        if min_amp > 1e-3 && margin > 1e-6 {
            out.push(f);
        }
    }
    out
}

/// Largest relative error between the analytic gradient(s) and central
/// differences over every pixel of the synthetic frames.
pub fn fd_check(f: &[Frame; 4], c: &WtfrConfig) -> f64 {
    let res = wtfr_loss(&f[0], &f[1], &f[2], &f[3], c, true).unwrap();
    let grad = res.gradient.unwrap();
    let grad_prev = res.gradient_prev;
    let (h, w) = f[0].dims();
    let loss = |sp: &Frame, sc: &Frame| wtfr_loss(&f[0], &f[1], sp, sc, c, false).unwrap().total;
    let mut worst: f64 = 0.0;
    for ch in 0..f[0].channel_count() {
        for r in 0..h {
            for col in 0..w {
                let plus = loss(&f[2], &perturbed(&f[3], ch, r, col, FD_STEP));
                let minus = loss(&f[2], &perturbed(&f[3], ch, r, col, -FD_STEP));
                let fd = (plus - minus) / (2.0 * FD_STEP);
                worst = worst.max(rel_err(*grad[ch].get(r, col), fd));
                if let Some(gp) = &grad_prev {
                    let plus = loss(&perturbed(&f[2], ch, r, col, FD_STEP), &f[3]);
                    let minus = loss(&perturbed(&f[2], ch, r, col, -FD_STEP), &f[3]);
                    let fd = (plus - minus) / (2.0 * FD_STEP);
                    worst = worst.max(rel_err(*gp[ch].get(r, col), fd));
                }
            }
        }
    }
    worst
}

pub fn random_tensor(r: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> FeatureTensor {
    FeatureTensor::from_fn(c, h, w, |_, _, _| r.random::<f64>() * 2.0 - 1.0)
}

/// Random block parameters; norm scales are kept in `[0.5, 1.5)`.
pub fn random_weights(r: &mut ChaCha8Rng, spec: BlockSpec, hidden: usize, biases: bool) -> FfcWeights {
    FfcWeights::from_fn(spec, hidden, |name, _| {
        if name.ends_with(".scale") {
            0.5 + r.random::<f64>()
        } else if !biases && (name.ends_with(".bias") || name.ends_with(".shift")) {
            0.0
        } else {
            (r.random::<f64>() - 0.5) * 0.6
        }
    })
    .unwrap()
}

/// Spectral-transform weights with norms on, drawn through a full block.
pub fn random_spectral_weights(
    r: &mut ChaCha8Rng,
    c: usize,
    hidden: usize,
    activation: bool,
) -> SpectralTransformWeights {
    let mut spec = BlockSpec::same(c, 1.0);
    spec.norm = true;
    spec.activation = activation;
    random_weights(r, spec, hidden, true).g2g.unwrap()
}
