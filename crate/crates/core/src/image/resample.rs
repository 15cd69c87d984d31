use super::{ImageBuffer, Rect};
use crate::{Error, Result};

/// Bilinear resize with pixel-center alignment and clamped edge addressing.
pub fn resize_bilinear(img: &ImageBuffer, new_w: usize, new_h: usize) -> Result<ImageBuffer> {
    resize_bilinear_region(img, new_w, new_h, Rect::full(new_w, new_h))
}

/// Evaluates only the `region` window of `resize_bilinear(img, new_w, new_h)`.
///
/// Every sample is bit-identical to the corresponding sample of the full
/// resize, so tiles can be resampled independently.
pub fn resize_bilinear_region(
    img: &ImageBuffer,
    new_w: usize,
    new_h: usize,
    region: Rect,
) -> Result<ImageBuffer> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::InvalidArgument(format!(
            "resize target {new_w}x{new_h} has a zero dimension"
        )));
    }
    if region.x1 > new_w || region.y1 > new_h || region.area() == 0 {
        return Err(Error::InvalidArgument(format!(
            "region {region:?} outside {new_w}x{new_h}"
        )));
    }
    if (new_w, new_h) == img.dims() {
        return img.crop(region);
    }
    let (sw, sh) = img.dims();
    let xs: Vec<(usize, usize, f64)> = (region.x0..region.x1)
        .map(|x| taps(x, sw, new_w))
        .collect();
    let ys: Vec<(usize, usize, f64)> = (region.y0..region.y1)
        .map(|y| taps(y, sh, new_h))
        .collect();
    let (w, h) = (region.width(), region.height());
    let mut out = Vec::with_capacity(w * h * img.channels());
    for c in 0..img.channels() {
        let src = img.channel(c);
        for &(y0, y1, fy) in &ys {
            let r0 = &src[y0 * sw..(y0 + 1) * sw];
            let r1 = &src[y1 * sw..(y1 + 1) * sw];
            for &(x0, x1, fx) in &xs {
                let top = r0[x0] as f64 * (1.0 - fx) + r0[x1] as f64 * fx;
                let bot = r1[x0] as f64 * (1.0 - fx) + r1[x1] as f64 * fx;
                out.push((top * (1.0 - fy) + bot * fy) as f32);
            }
        }
    }
    Ok(ImageBuffer::from_parts_unchecked(
        w,
        h,
        img.channels(),
        img.colorspace(),
        out,
    ))
}

fn taps(dst: usize, src_len: usize, dst_len: usize) -> (usize, usize, f64) {
    let s = (dst as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5;
    let s = s.clamp(0.0, (src_len - 1) as f64);
    let i0 = s.floor() as usize;
    let i1 = (i0 + 1).min(src_len - 1);
    (i0, i1, s - i0 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;

    #[test]
    fn constant_stays_constant() {
        let img = ImageBuffer::filled(100, 100, 3, ColorSpace::LinearRgb, 0.7).unwrap();
        for (w, h) in [(1, 1), (37, 211), (100, 50), (640, 480)] {
            let out = resize_bilinear(&img, w, h).unwrap();
            assert!(out.data().iter().all(|&v| v == 0.7f32), "{w}x{h}");
        }
    }

    #[test]
    fn same_size_is_bitwise_identity() {
        let img = ImageBuffer::from_fn(13, 7, 1, ColorSpace::LumaOnly, |_, x, y| {
            ((x * 31 + y * 17) % 11) as f32 / 11.0
        })
        .unwrap();
        assert_eq!(resize_bilinear(&img, 13, 7).unwrap(), img);
    }

    #[test]
    fn checkerboard_to_single_pixel_is_its_mean() {
        let img = ImageBuffer::plane(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let out = resize_bilinear(&img, 1, 1).unwrap();
        assert_eq!(out.data(), &[0.5]);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let img = ImageBuffer::filled(4, 4, 1, ColorSpace::LumaOnly, 0.0).unwrap();
        assert!(matches!(
            resize_bilinear(&img, 0, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn region_matches_full_resize() {
        let img = ImageBuffer::from_fn(17, 9, 3, ColorSpace::LinearRgb, |c, x, y| {
            (c as f32 + (x as f32 * 0.37).sin() + (y as f32 * 0.21).cos()).abs()
        })
        .unwrap();
        let full = resize_bilinear(&img, 61, 40).unwrap();
        let rect = Rect::new(13, 5, 50, 33);
        assert_eq!(
            resize_bilinear_region(&img, 61, 40, rect).unwrap(),
            full.crop(rect).unwrap()
        );
    }
}
