//! Frame loading and 8-bit grayscale image output.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::spectral::{Frame, FrameGrid};

/// How decoded images are turned into frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelMode {
    /// Three channels; grayscale files are replicated.
    #[default]
    Rgb,
    /// One channel, `0.299R + 0.587G + 0.114B`.
    Luma,
}

impl std::str::FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgb" => Ok(ChannelMode::Rgb),
            "luma" => Ok(ChannelMode::Luma),
            other => Err(Error::InvalidInput(format!(
                "unknown channel mode {other:?} (expected rgb or luma)"
            ))),
        }
    }
}

/// Loads a PNG or binary PPM file as a frame with values in `[0, 1]`.
///
/// 8-bit samples are divided by 255, 16-bit samples by 65535. The alpha
/// channel, if any, is dropped.
pub fn load_frame(path: &Path, mode: ChannelMode) -> Result<Frame> {
    let img = image::open(path)?;
    frame_from_image(&img, mode)
}

pub fn frame_from_image(img: &DynamicImage, mode: ChannelMode) -> Result<Frame> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let rgb: Vec<[f64; 3]> = match img {
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| p.0.map(|s| s as f64 / 65535.0))
            .collect(),
        _ => img.to_rgb8().pixels().map(|p| p.0.map(|s| s as f64 / 255.0)).collect(),
    };
    let channel = |k: usize| FrameGrid::from_vec(h, w, rgb.iter().map(|p| p[k].clamp(0.0, 1.0)).collect());
    let frame = Frame::new(vec![channel(0)?, channel(1)?, channel(2)?])?;
    Ok(match mode {
        ChannelMode::Rgb => frame,
        ChannelMode::Luma => frame.to_luma(),
    })
}

/// Output format for 8-bit grayscale images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageKind {
    /// Binary PGM (`P5`).
    #[default]
    Pgm,
    Png,
}

impl ImageKind {
    pub fn extension(self) -> &'static str {
        match self {
            ImageKind::Pgm => "pgm",
            ImageKind::Png => "png",
        }
    }
}

impl std::str::FromStr for ImageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(ImageKind::Pgm),
            "png" => Ok(ImageKind::Png),
            other => Err(Error::InvalidInput(format!(
                "unknown image format {other:?} (expected pgm or png)"
            ))),
        }
    }
}

/// Encodes row-major 8-bit gray pixels.
pub fn encode_gray8(pixels: &[u8], height: usize, width: usize, kind: ImageKind) -> Result<Vec<u8>> {
    assert_eq!(pixels.len(), height * width);
    match kind {
        ImageKind::Pgm => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(pixels);
            Ok(out)
        }
        ImageKind::Png => {
            let img = image::GrayImage::from_raw(width as u32, height as u32, pixels.to_vec())
                .expect("buffer length checked");
            let mut out = std::io::Cursor::new(Vec::new());
            img.write_to(&mut out, ImageFormat::Png)?;
            Ok(out.into_inner())
        }
    }
}

pub fn write_gray8(path: &Path, pixels: &[u8], height: usize, width: usize, kind: ImageKind) -> Result<()> {
    let bytes = encode_gray8(pixels, height, width, kind)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}
