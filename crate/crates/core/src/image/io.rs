//! Raster file formats.
//!
//! `.lfr` ("linear frame") layout, all little-endian:
//!
//! ```text
//! b"LFR1" | width u32 | height u32 | channels u32 | colorspace tag u32 | f32 samples (planar)
//! ```

use super::{ColorSpace, ImageBuffer};
use crate::{Error, Result};
use image::{DynamicImage, ImageFormat};
use std::io::Cursor;
use std::path::Path;

const LFR_MAGIC: &[u8; 4] = b"LFR1";

pub fn encode_lfr(img: &ImageBuffer) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + img.len() * 4);
    out.extend_from_slice(LFR_MAGIC);
    for v in [
        img.width() as u32,
        img.height() as u32,
        img.channels() as u32,
        img.colorspace().tag(),
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_lfr(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.len() < 20 || &bytes[..4] != LFR_MAGIC {
        return Err(Error::format("lfr", "missing LFR1 header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (w, h, c) = (word(0) as usize, word(1) as usize, word(2) as usize);
    let cs = ColorSpace::from_tag(word(3))
        .ok_or_else(|| Error::format("lfr", format!("unknown colorspace tag {}", word(3))))?;
    let n = w
        .checked_mul(h)
        .and_then(|v| v.checked_mul(c))
        .ok_or_else(|| Error::format("lfr", "dimensions overflow"))?;
    let body = &bytes[20..];
    if body.len() != n * 4 {
        return Err(Error::format(
            "lfr",
            format!("expected {} payload bytes, found {}", n * 4, body.len()),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    ImageBuffer::from_planar(w, h, c, cs, data)
}

pub fn read_lfr(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_lfr(&bytes)
}

pub fn write_lfr(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_lfr(img)).map_err(|e| Error::io(path, e))
}

/// Decodes a PNG or PNM (PGM/PPM) raster, normalizing samples to `[0, 1]`.
///
/// Gray images become [`ColorSpace::LumaOnly`], color images
/// [`ColorSpace::Srgb`]; retag with [`ImageBuffer::with_colorspace`] as needed.
pub fn decode_raster(bytes: &[u8]) -> Result<ImageBuffer> {
    let dynimg = image::load_from_memory(bytes)?;
    from_dynamic(dynimg)
}

fn from_dynamic(dynimg: DynamicImage) -> Result<ImageBuffer> {
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    if dynimg.color().has_color() {
        let rgb = dynimg.into_rgb16();
        let raw = rgb.as_raw();
        let mut data = vec![0.0f32; w * h * 3];
        for (i, px) in raw.chunks_exact(3).enumerate() {
            for c in 0..3 {
                data[c * w * h + i] = px[c] as f32 / 65535.0;
            }
        }
        ImageBuffer::from_planar(w, h, 3, ColorSpace::Srgb, data)
    } else {
        let gray = dynimg.into_luma16();
        let data = gray.as_raw().iter().map(|&v| v as f32 / 65535.0).collect();
        ImageBuffer::from_planar(w, h, 1, ColorSpace::LumaOnly, data)
    }
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raster(&bytes)
}

/// Reads `.lfr` files natively and anything else through [`read_raster`].
pub fn read_any(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(LFR_MAGIC) {
        decode_lfr(&bytes)
    } else {
        decode_raster(&bytes)
    }
}

/// 8-bit PNG of a display-referred image (samples clamped to `[0, 1]`).
pub fn encode_png8(img: &ImageBuffer) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let q = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    let dynimg = if img.channels() == 1 {
        let buf = image::GrayImage::from_raw(w, h, img.data().iter().map(|&v| q(v)).collect())
            .expect("buffer size matches");
        DynamicImage::ImageLuma8(buf)
    } else {
        let n = img.pixel_count();
        let mut raw = Vec::with_capacity(n * 3);
        for i in 0..n {
            for c in 0..3 {
                raw.push(q(img.channel(c)[i]));
            }
        }
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, raw).expect("buffer size matches"))
    };
    let mut out = Cursor::new(Vec::new());
    dynimg.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn write_png8(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png8(img)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// 16-bit PNG, used for Bayer and high bit-depth SDR exports.
pub fn encode_png16(img: &ImageBuffer) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let q = |v: f32| (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
    let dynimg = if img.channels() == 1 {
        DynamicImage::ImageLuma16(
            image::ImageBuffer::from_raw(w, h, img.data().iter().map(|&v| q(v)).collect())
                .expect("buffer size matches"),
        )
    } else {
        let n = img.pixel_count();
        let mut raw = Vec::with_capacity(n * 3);
        for i in 0..n {
            for c in 0..3 {
                raw.push(q(img.channel(c)[i]));
            }
        }
        DynamicImage::ImageRgb16(image::ImageBuffer::from_raw(w, h, raw).expect("buffer size matches"))
    };
    let mut out = Cursor::new(Vec::new());
    dynimg.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}
