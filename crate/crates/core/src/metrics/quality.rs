//! Full-reference frame quality: PSNR and SSIM for unit-range frames.

use crate::error::Result;
use crate::grid::RealGrid;
use crate::spectral::Frame;

/// PSNR reported for (near-)identical frames.
pub const PSNR_CAP: f64 = 99.0;
const MSE_FLOOR: f64 = 1e-10;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Mean squared error over all pixels and channels.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_compatible(b)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (ca, cb) in a.channels().iter().zip(b.channels()) {
        for (x, y) in ca.data().iter().zip(cb.data()) {
            sum += (x - y) * (x - y);
        }
        n += ca.len();
    }
    Ok(sum / n as f64)
}

/// `10·log10(1 / MSE)` in dB, capped at [`PSNR_CAP`].
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    let m = mse(a, b)?;
    if m < MSE_FLOOR {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (1.0 / m).log10()).min(PSNR_CAP))
}

/// Normalized 1D Gaussian of `size` taps centered at `(size − 1)/2`.
fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable "valid" filtering of `values` (row-major `h × w`).
fn filter_valid(values: &[f64], h: usize, w: usize, kh: &[f64], kw: &[f64]) -> Vec<f64> {
    let ow = w - kw.len() + 1;
    let oh = h - kh.len() + 1;
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        let row = &values[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = kw.iter().zip(&row[c..]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = kh.iter().enumerate().map(|(i, k)| k * horiz[(r + i) * ow + c]).sum();
        }
    }
    out
}

fn ssim_channel(a: &RealGrid, b: &RealGrid) -> f64 {
    let (h, w) = a.dims();
    // frames smaller than the window use a truncated window
    let kh = gaussian_kernel(SSIM_WINDOW.min(h), SSIM_SIGMA);
    let kw = gaussian_kernel(SSIM_WINDOW.min(w), SSIM_SIGMA);
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);

    let prod = |f: fn(f64, f64) -> f64| -> Vec<f64> { a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect() };
    let mu_a = filter_valid(a.data(), h, w, &kh, &kw);
    let mu_b = filter_valid(b.data(), h, w, &kh, &kw);
    let aa = filter_valid(&prod(|x, _| x * x), h, w, &kh, &kw);
    let bb = filter_valid(&prod(|_, y| y * y), h, w, &kh, &kw);
    let ab = filter_valid(&prod(|x, y| x * y), h, w, &kh, &kw);

    let n = mu_a.len();
    let mut total = 0.0;
    for i in 0..n {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    total / n as f64
}

/// Gaussian-window SSIM (11×11, σ = 1.5, K1 = 0.01, K2 = 0.03, range 1),
/// averaged over valid window positions and channels.
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_compatible(b)?;
    let sum: f64 = a
        .channels()
        .iter()
        .zip(b.channels())
        .map(|(x, y)| ssim_channel(x, y))
        .sum();
    Ok(sum / a.channel_count() as f64)
}
