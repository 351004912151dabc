//! Image file I/O: PNG and binary PPM/PGM, 8-bit, samples mapped to [0, 1].

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use crate::image::{to_luminance, ImagePlane, ImageRgb};

#[derive(Debug, thiserror::Error)]
pub enum ImageIoError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unsupported image format for {path} (expected png, ppm or pgm)")]
    UnsupportedFormat { path: PathBuf },
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("zero-dimension image in {path}")]
    ZeroDimension { path: PathBuf },
    #[error("cannot write {path}: {message}")]
    Unwritable { path: PathBuf, message: String },
}

fn format_for(path: &Path) -> Option<ImageFormat> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "png" => Some(ImageFormat::Png),
        "ppm" | "pgm" => Some(ImageFormat::Pnm),
        _ => None,
    }
}

/// Loads an 8-bit PNG, PPM or PGM into normalized planes (codes divided by
/// 255). Grayscale files replicate into all three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageRgb<f64>, ImageIoError> {
    let path = path.as_ref();
    let format = format_for(path).ok_or_else(|| ImageIoError::UnsupportedFormat {
        path: path.to_path_buf(),
    })?;
    let bytes = fs::read(path).map_err(|source| ImageIoError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let decoded =
        image::load_from_memory_with_format(&bytes, format).map_err(|e| ImageIoError::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    if decoded.width() == 0 || decoded.height() == 0 {
        return Err(ImageIoError::ZeroDimension {
            path: path.to_path_buf(),
        });
    }
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut planes = [
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for px in rgb.pixels() {
        for (plane, &code) in planes.iter_mut().zip(&px.0) {
            plane.push(code as f64 / 255.0);
        }
    }
    let [r, g, b] = planes;
    Ok(ImageRgb::new(
        ImagePlane::new(w, h, r),
        ImagePlane::new(w, h, g),
        ImagePlane::new(w, h, b),
    ))
}

/// Quantizes a normalized sample to an 8-bit code: clamp to [0, 1], scale by
/// 255, round half away from zero.
#[inline]
pub(crate) fn quantize(sample: f64) -> u8 {
    (sample.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Saves as 8-bit PNG or binary PPM (PGM paths store the luminance). Samples
/// are clamped to [0, 1] and quantized by `round(s * 255)`.
pub fn save_image(img: &ImageRgb<f64>, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let format = format_for(path).ok_or_else(|| ImageIoError::UnsupportedFormat {
        path: path.to_path_buf(),
    })?;
    let (w, h) = (img.width(), img.height());
    let unwritable = |message: String| ImageIoError::Unwritable {
        path: path.to_path_buf(),
        message,
    };

    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("pgm"))
        .unwrap_or(false);

    if is_pgm {
        let luma = to_luminance(img);
        let bytes: Vec<u8> = luma.data().iter().map(|&v| quantize(v)).collect();
        let mut out = Vec::new();
        PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, w as u32, h as u32, ExtendedColorType::L8)
            .map_err(|e| unwritable(e.to_string()))?;
        return fs::write(path, out).map_err(|e| unwritable(e.to_string()));
    }

    let mut bytes = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            bytes.push(quantize(img.r().get(x, y)));
            bytes.push(quantize(img.g().get(x, y)));
            bytes.push(quantize(img.b().get(x, y)));
        }
    }
    let mut out = Vec::new();
    match format {
        ImageFormat::Png => {
            let buffer: image::RgbImage =
                image::ImageBuffer::from_raw(w as u32, h as u32, bytes).expect("sized buffer");
            DynamicImage::ImageRgb8(buffer)
                .write_to(&mut Cursor::new(&mut out), ImageFormat::Png)
                .map_err(|e| unwritable(e.to_string()))?;
        }
        _ => {
            PnmEncoder::new(&mut out)
                .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                .write_image(&bytes, w as u32, h as u32, ExtendedColorType::Rgb8)
                .map_err(|e| unwritable(e.to_string()))?;
        }
    }
    fs::write(path, out).map_err(|e| unwritable(e.to_string()))
}
