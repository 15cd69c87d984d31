use super::{ColorSpace, ImageBuffer};
use crate::{Error, Result};

/// A float64 multi-channel plane used for pyramid levels.
///
/// Pyramid arithmetic runs in f64 so that decomposition followed by
/// reconstruction returns the f32 source bit-for-bit in practice.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Band {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Band {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub fn from_image(img: &ImageBuffer) -> Self {
        Band {
            width: img.width(),
            height: img.height(),
            channels: img.channels(),
            data: img.data().iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn from_plane(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Band {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn to_image(&self, colorspace: ColorSpace) -> Result<ImageBuffer> {
        ImageBuffer::from_planar(
            self.width,
            self.height,
            self.channels,
            colorspace,
            self.data.iter().map(|&v| v as f32).collect(),
        )
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    fn map_channels(&self, w: usize, h: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Band {
        let mut data = Vec::with_capacity(w * h * self.channels);
        for c in 0..self.channels {
            data.extend(f(self.channel(c)));
        }
        Band {
            width: w,
            height: h,
            channels: self.channels,
            data,
        }
    }

    /// Blur with the 5-tap binomial kernel and keep every second sample.
    pub fn downsample(&self) -> Band {
        let (w, h) = (self.width, self.height);
        let (dw, dh) = (w.div_ceil(2), h.div_ceil(2));
        self.map_channels(dw, dh, |src| reduce(src, w, h))
    }

    /// Expand to `w x h` (the size of the finer level this band came from).
    pub fn upsample(&self, w: usize, h: usize) -> Band {
        let (cw, ch) = (self.width, self.height);
        self.map_channels(w, h, |src| expand(src, cw, ch, w, h))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

const BINOMIAL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

// Integer taps with a single final division keep constants exact.
fn reduce(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    let dw = w.div_ceil(2);
    let dh = h.div_ceil(2);
    let clampx = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let clampy = |y: isize| y.clamp(0, h as isize - 1) as usize;
    let mut rows = vec![0.0; dw * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for dx in 0..dw {
            let cx = (2 * dx) as isize;
            let mut acc = 0.0;
            for (k, kv) in BINOMIAL.iter().enumerate() {
                acc += kv * row[clampx(cx + k as isize - 2)];
            }
            rows[y * dw + dx] = acc;
        }
    }
    let mut out = vec![0.0; dw * dh];
    for dy in 0..dh {
        let cy = (2 * dy) as isize;
        let dst = &mut out[dy * dw..(dy + 1) * dw];
        for (k, kv) in BINOMIAL.iter().enumerate() {
            let sy = clampy(cy + k as isize - 2);
            for (d, s) in dst.iter_mut().zip(&rows[sy * dw..(sy + 1) * dw]) {
                *d += kv * s;
            }
        }
        dst.iter_mut().for_each(|v| *v /= 256.0);
    }
    out
}

// Zero-insertion followed by the binomial kernel scaled by 2 per axis, written
// out as even/odd phase taps.
fn expand(src: &[f64], cw: usize, ch: usize, w: usize, h: usize) -> Vec<f64> {
    let clampx = |x: isize| x.clamp(0, cw as isize - 1) as usize;
    let clampy = |y: isize| y.clamp(0, ch as isize - 1) as usize;
    let mut rows = vec![0.0; w * ch];
    for y in 0..ch {
        let row = &src[y * cw..(y + 1) * cw];
        for x in 0..w {
            let v = if x % 2 == 0 {
                let c = (x / 2) as isize;
                row[clampx(c - 1)] + 6.0 * row[clampx(c)] + row[clampx(c + 1)]
            } else {
                let c = (x / 2) as isize;
                4.0 * row[clampx(c)] + 4.0 * row[clampx(c + 1)]
            };
            rows[y * w + x] = v;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let c = (y / 2) as isize;
        let taps: &[(isize, f64)] = if y % 2 == 0 {
            &[(c - 1, 1.0), (c, 6.0), (c + 1, 1.0)]
        } else {
            &[(c, 4.0), (c + 1, 4.0)]
        };
        let dst = &mut out[y * w..(y + 1) * w];
        for &(sy, kv) in taps {
            let sy = clampy(sy);
            for (d, s) in dst.iter_mut().zip(&rows[sy * w..(sy + 1) * w]) {
                *d += kv * s;
            }
        }
        dst.iter_mut().for_each(|v| *v /= 64.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    Laplacian,
}

/// Gaussian or Laplacian pyramid. Level 0 is full resolution; each further
/// level halves the previous size, rounding up. For a Laplacian pyramid the
/// last level is the low-pass residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub kind: PyramidKind,
    pub levels: Vec<Band>,
}

/// Deepest pyramid supported for a `w x h` image: `floor(log2(min(w, h)))`,
/// and never less than one level.
pub fn max_levels(w: usize, h: usize) -> usize {
    let m = w.min(h).max(1);
    (usize::BITS - 1 - m.leading_zeros()).max(1) as usize
}

fn check_levels(w: usize, h: usize, n_levels: usize) -> Result<()> {
    let max = max_levels(w, h);
    if n_levels == 0 || n_levels > max {
        return Err(Error::InvalidArgument(format!(
            "{n_levels} pyramid levels requested for {w}x{h}; allowed 1..={max}"
        )));
    }
    Ok(())
}

impl Pyramid {
    pub fn gaussian_from_band(base: Band, n_levels: usize) -> Result<Pyramid> {
        check_levels(base.width, base.height, n_levels)?;
        let mut levels = Vec::with_capacity(n_levels);
        levels.push(base);
        for i in 1..n_levels {
            let next = levels[i - 1].downsample();
            levels.push(next);
        }
        Ok(Pyramid {
            kind: PyramidKind::Gaussian,
            levels,
        })
    }

    pub fn gaussian(img: &ImageBuffer, n_levels: usize) -> Result<Pyramid> {
        Self::gaussian_from_band(Band::from_image(img), n_levels)
    }

    pub fn laplacian_from_band(base: Band, n_levels: usize) -> Result<Pyramid> {
        let gauss = Self::gaussian_from_band(base, n_levels)?;
        let mut levels = gauss.levels;
        for i in 0..n_levels - 1 {
            let up = levels[i + 1].upsample(levels[i].width, levels[i].height);
            for (v, u) in levels[i].data.iter_mut().zip(&up.data) {
                *v -= u;
            }
        }
        Ok(Pyramid {
            kind: PyramidKind::Laplacian,
            levels,
        })
    }

    /// Laplacian decomposition with `n_levels` levels (the last is the residual).
    pub fn laplacian(img: &ImageBuffer, n_levels: usize) -> Result<Pyramid> {
        Self::laplacian_from_band(Band::from_image(img), n_levels)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn residual(&self) -> &Band {
        self.levels.last().expect("pyramid has at least one level")
    }

    /// Collapses a Laplacian pyramid back into a single f64 band.
    pub fn collapse(&self) -> Result<Band> {
        if self.kind != PyramidKind::Laplacian {
            return Err(Error::InvalidArgument(
                "only Laplacian pyramids can be reconstructed".into(),
            ));
        }
        let mut cur = self.residual().clone();
        for band in self.levels.iter().rev().skip(1) {
            let mut up = cur.upsample(band.width, band.height);
            for (u, b) in up.data.iter_mut().zip(&band.data) {
                *u += b;
            }
            cur = up;
        }
        Ok(cur)
    }

    /// Reconstructs the image a Laplacian pyramid was built from.
    pub fn reconstruct(&self, colorspace: ColorSpace) -> Result<ImageBuffer> {
        self.collapse()?.to_image(colorspace)
    }
}
