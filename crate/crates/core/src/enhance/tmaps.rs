//! `.tmaps` container, all little-endian:
//!
//! ```text
//! b"TMP1" | width u32 | height u32 | w_y | w_c0 | w_c1 | g   (f32 planes, row-major)
//! ```

use super::{GainBounds, ToneMaps};
use crate::image::{ColorSpace, ImageBuffer};
use crate::{Error, Result};
use std::path::Path;

const MAGIC: &[u8; 4] = b"TMP1";

pub fn encode_tmaps(maps: &ToneMaps) -> Vec<u8> {
    let (w, h) = maps.dims();
    let mut out = Vec::with_capacity(12 + 16 * w * h);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for p in [&maps.w_y, &maps.w_c0, &maps.w_c1, &maps.g] {
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decodes and validates against `bounds`.
pub fn decode_tmaps(bytes: &[u8], bounds: GainBounds) -> Result<ToneMaps> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::format("tmaps", "missing TMP1 header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (w, h) = (word(0), word(1));
    let n = w
        .checked_mul(h)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::format("tmaps", "bad dimensions"))?;
    let body = &bytes[12..];
    if body.len() != 16 * n {
        return Err(Error::format(
            "tmaps",
            format!("expected {} payload bytes, found {}", 16 * n, body.len()),
        ));
    }
    let plane = |k: usize| {
        let data: Vec<f32> = body[4 * n * k..4 * n * (k + 1)]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tmaps plane {k}")));
        }
        Ok(ImageBuffer::from_parts_unchecked(w, h, 1, ColorSpace::LumaOnly, data))
    };
    ToneMaps::new(plane(0)?, plane(1)?, plane(2)?, plane(3)?, bounds)
}

pub fn read_tmaps(path: impl AsRef<Path>, bounds: GainBounds) -> Result<ToneMaps> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tmaps(&bytes, bounds)
}

pub fn write_tmaps(maps: &ToneMaps, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_tmaps(maps)).map_err(|e| Error::io(path, e))
}
