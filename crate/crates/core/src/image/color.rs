use super::{ColorSpace, ImageBuffer};
use crate::{Error, Result};

pub const LUMA_R: f64 = 0.299;
pub const LUMA_G: f64 = 0.587;
pub const LUMA_B: f64 = 0.114;

const CB_SCALE: f64 = 1.772; // 2 * (1 - LUMA_B)
const CR_SCALE: f64 = 1.402; // 2 * (1 - LUMA_R)

#[inline]
pub fn luma(r: f32, g: f32, b: f32) -> f64 {
    LUMA_R * r as f64 + LUMA_G * g as f64 + LUMA_B * b as f64
}

#[inline]
pub(crate) fn rgb_to_ycc_px(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = LUMA_R * r + LUMA_G * g + LUMA_B * b;
    (y, (b - y) / CB_SCALE, (r - y) / CR_SCALE)
}

#[inline]
pub(crate) fn ycc_to_rgb_px(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let r = y + CR_SCALE * cr;
    let b = y + CB_SCALE * cb;
    let g = (y - LUMA_R * r - LUMA_B * b) / LUMA_G;
    (r, g, b)
}

/// Luma plane of a 3-channel image, or a copy of a 1-channel image.
pub fn luma_of(img: &ImageBuffer) -> ImageBuffer {
    if img.channels() == 1 {
        return img.channel_plane(0);
    }
    let (r, g, b) = (img.channel(0), img.channel(1), img.channel(2));
    let data = (0..img.pixel_count())
        .map(|i| luma(r[i], g[i], b[i]) as f32)
        .collect();
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), 1, ColorSpace::LumaOnly, data)
}

/// Full-range BT.601 RGB to YCbCr. Cb and Cr are centered on zero.
pub fn rgb_to_ycbcr(img: &ImageBuffer) -> Result<ImageBuffer> {
    if img.channels() != 3 || img.colorspace() == ColorSpace::YCbCr {
        return Err(Error::InvalidInput(format!(
            "rgb_to_ycbcr needs a 3-channel RGB image, got {} channel(s) tagged {:?}",
            img.channels(),
            img.colorspace()
        )));
    }
    Ok(convert(img, ColorSpace::YCbCr, rgb_to_ycc_px))
}

/// Inverse of [`rgb_to_ycbcr`]; the result is tagged linear RGB.
pub fn ycbcr_to_rgb(img: &ImageBuffer) -> Result<ImageBuffer> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "ycbcr_to_rgb needs 3 channels, got {}",
            img.channels()
        )));
    }
    Ok(convert(img, ColorSpace::LinearRgb, ycc_to_rgb_px))
}

fn convert(
    img: &ImageBuffer,
    to: ColorSpace,
    f: impl Fn(f64, f64, f64) -> (f64, f64, f64),
) -> ImageBuffer {
    let n = img.pixel_count();
    let mut out = vec![0.0f32; 3 * n];
    let (a, b, c) = (img.channel(0), img.channel(1), img.channel(2));
    for i in 0..n {
        let (p, q, r) = f(a[i] as f64, b[i] as f64, c[i] as f64);
        out[i] = p as f32;
        out[n + i] = q as f32;
        out[2 * n + i] = r as f32;
    }
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), 3, to, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn px(r: f32, g: f32, b: f32) -> ImageBuffer {
        ImageBuffer::from_planar(1, 1, 3, ColorSpace::LinearRgb, vec![r, g, b]).unwrap()
    }

    fn close(img: &ImageBuffer, expect: [f32; 3]) {
        for (c, e) in expect.iter().enumerate() {
            assert!((img.get(c, 0, 0) - e).abs() < 1e-6, "{:?} vs {expect:?}", img.data());
        }
    }

    #[test]
    fn achromatic_points_have_zero_chroma() {
        close(&rgb_to_ycbcr(&px(1.0, 1.0, 1.0)).unwrap(), [1.0, 0.0, 0.0]);
        close(&rgb_to_ycbcr(&px(0.5, 0.5, 0.5)).unwrap(), [0.5, 0.0, 0.0]);
    }

    #[test]
    fn pure_red_golden() {
        // Y = 0.299, Cb = -0.299 / 1.772, Cr = 0.701 / 1.402
        let ycc = rgb_to_ycbcr(&px(1.0, 0.0, 0.0)).unwrap();
        close(&ycc, [0.299, -0.168_736, 0.5]);
    }

    #[test]
    fn wrong_channel_count_is_rejected() {
        let gray = ImageBuffer::filled(2, 2, 1, ColorSpace::LumaOnly, 0.5).unwrap();
        assert!(matches!(rgb_to_ycbcr(&gray), Err(Error::InvalidInput(_))));
    }

    proptest! {
        #[test]
        fn round_trip(r in 0.0f32..=1.0, g in 0.0f32..=1.0, b in 0.0f32..=1.0) {
            let back = ycbcr_to_rgb(&rgb_to_ycbcr(&px(r, g, b)).unwrap()).unwrap();
            close(&back, [r, g, b]);
        }
    }
}
