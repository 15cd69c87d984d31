use crate::image::{ImageBuffer, Rect};
use crate::{Error, Result};
use rayon::prelude::*;

/// 3x3 projective transform, normalized so that `m[2][2] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("homography".into()));
        }
        let s = m[2][2];
        if s.abs() < 1e-12 {
            return Err(Error::InvalidInput(
                "homography with m[2][2] = 0 cannot be normalized".into(),
            ));
        }
        let mut n = m;
        if s != 1.0 {
            n.iter_mut().flatten().for_each(|v| *v /= s);
        }
        let h = Homography { m: n };
        if h.det().abs() <= 1e-12 {
            return Err(Error::InvalidInput(format!(
                "homography is not invertible (det = {:e})",
                h.det()
            )));
        }
        Ok(h)
    }

    pub fn identity() -> Self {
        Homography {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation by `angle` radians and uniform `scale` about `(cx, cy)`,
    /// followed by a translation.
    pub fn similarity(angle: f64, scale: f64, tx: f64, ty: f64, cx: f64, cy: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let (a, b) = (scale * c, scale * s);
        Homography::new([
            [a, -b, cx - a * cx + b * cy + tx],
            [b, a, cy - b * cx - a * cy + ty],
            [0.0, 0.0, 1.0],
        ])
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Homography {
        let m = &self.m;
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        // adjugate is the inverse up to scale; normalization fixes the scale
        Homography::new(adj).expect("inverse of an invertible homography")
    }

    /// `self * other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Homography {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Homography::new(r).expect("product of invertible homographies")
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        (
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        )
    }

    pub fn is_identity(&self) -> bool {
        *self == Homography::identity()
    }

    /// `||a - b||_F / ||b||_F` after both are normalized.
    pub fn relative_frobenius_error(&self, reference: &Homography) -> f64 {
        let diff: f64 = self
            .m
            .iter()
            .flatten()
            .zip(reference.m.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let norm: f64 = reference.m.iter().flatten().map(|v| v * v).sum();
        (diff / norm).sqrt()
    }
}

impl Default for Homography {
    fn default() -> Self {
        Homography::identity()
    }
}

/// Inverse-maps `img` through `h`: `out(q) = img(h^-1 q)`.
///
/// Bilinear sampling; coordinates outside the frame are clamped to the
/// nearest border sample.
pub fn warp(img: &ImageBuffer, h: &Homography) -> Result<ImageBuffer> {
    if h.det().abs() <= 1e-12 {
        return Err(Error::InvalidInput("non-invertible homography".into()));
    }
    if h.is_identity() {
        return Ok(img.clone());
    }
    let inv = h.inverse();
    let (w, ht) = img.dims();
    let n = w * ht;
    let mut out = vec![0.0f32; n * img.channels()];
    for c in 0..img.channels() {
        let src = img.channel(c);
        out[c * n..(c + 1) * n]
            .par_chunks_mut(w)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, o) in row.iter_mut().enumerate() {
                    let (sx, sy) = inv.apply(x as f64, y as f64);
                    *o = sample_bilinear(src, w, ht, sx, sy);
                }
            });
    }
    Ok(ImageBuffer::from_parts_unchecked(
        w,
        ht,
        img.channels(),
        img.colorspace(),
        out,
    ))
}

#[inline]
pub(crate) fn sample_bilinear(src: &[f32], w: usize, h: usize, sx: f64, sy: f64) -> f32 {
    let sx = if sx.is_finite() { sx.clamp(0.0, (w - 1) as f64) } else { 0.0 };
    let sy = if sy.is_finite() { sy.clamp(0.0, (h - 1) as f64) } else { 0.0 };
    let x0 = sx.floor() as usize;
    let y0 = sy.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = sx - x0 as f64;
    let fy = sy - y0 as f64;
    let at = |x: usize, y: usize| src[y * w + x] as f64;
    let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    let bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    (top * (1.0 - fy) + bot * fy) as f32
}

/// Pixels of a `w x h` frame whose pre-image under `h` lands at least
/// `margin` pixels inside the source frame.
pub fn valid_interior(h: &Homography, w: usize, ht: usize, margin: f64) -> Rect {
    // conservative: intersect the frame with a shrink by the largest corner displacement
    let inv = h.inverse();
    let corners = [
        (0.0, 0.0),
        ((w - 1) as f64, 0.0),
        (0.0, (ht - 1) as f64),
        ((w - 1) as f64, (ht - 1) as f64),
    ];
    let shift = corners
        .iter()
        .map(|&(x, y)| {
            let (sx, sy) = inv.apply(x, y);
            (sx - x).abs().max((sy - y).abs())
        })
        .fold(0.0, f64::max);
    let pad = (shift + margin).ceil() as usize;
    let pad = pad.min(w / 2).min(ht / 2);
    Rect::new(pad, pad, w - pad, ht - pad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;

    fn textured(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
            0.5 + 0.4 * ((x as f32 * 0.3 + c as f32).sin() * (y as f32 * 0.17).cos())
        })
        .unwrap()
    }

    #[test]
    fn normalization_and_invertibility() {
        let h = Homography::new([[2.0, 0.0, 4.0], [0.0, 2.0, 6.0], [0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(h, Homography::translation(2.0, 3.0));
        assert!(Homography::new([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        assert!(Homography::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let h = Homography::new([[1.01, 0.02, 3.0], [-0.01, 0.99, -2.0], [1e-5, -2e-5, 1.0]]).unwrap();
        let e = h.compose(&h.inverse()).relative_frobenius_error(&Homography::identity());
        assert!(e < 1e-12);
    }

    #[test]
    fn identity_warp_is_bitwise() {
        let img = textured(31, 17);
        assert_eq!(warp(&img, &Homography::identity()).unwrap(), img);
    }

    #[test]
    fn integer_translation_shifts_interior() {
        let img = textured(40, 20);
        let out = warp(&img, &Homography::translation(3.0, 0.0)).unwrap();
        for c in 0..3 {
            for y in 0..20 {
                for x in 3..40 {
                    assert_eq!(out.get(c, x, y), img.get(c, x - 3, y));
                }
            }
        }
    }

    #[test]
    fn warp_is_linear_in_scale() {
        let img = textured(24, 24);
        let h = Homography::similarity(0.01, 1.0, 1.3, -0.7, 12.0, 12.0).unwrap();
        let a = warp(&img.map(|v| 2.5 * v), &h).unwrap();
        let b = warp(&img, &h).unwrap().map(|v| 2.5 * v);
        for (p, q) in a.data().iter().zip(b.data()) {
            assert!((p - q).abs() < 1e-5);
        }
    }
}
