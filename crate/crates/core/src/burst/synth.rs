use super::{warp, Homography};
use crate::image::{resize_bilinear, ColorSpace, ImageBuffer};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Burst synthesis settings. Noise variance at clean signal `s` is
/// `k_shot * s + sigma_read^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstSpec {
    pub n_frames: usize,
    pub sigma_read: f64,
    pub k_shot: f64,
    /// 1 for the denoising task, 4 for super-resolution inputs.
    pub downscale_factor: usize,
}

impl Default for BurstSpec {
    fn default() -> Self {
        BurstSpec {
            n_frames: 11,
            sigma_read: 0.0,
            k_shot: 0.0,
            downscale_factor: 1,
        }
    }
}

impl BurstSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::InvalidArgument("a burst needs at least one frame".into()));
        }
        for (name, v) in [("sigma_read", self.sigma_read), ("k_shot", self.k_shot)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.downscale_factor == 0 {
            return Err(Error::InvalidArgument("downscale factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// Samples an RGGB mosaic from a 3-channel image.
pub fn mosaic_rggb(rgb: &ImageBuffer) -> Result<ImageBuffer> {
    if rgb.channels() != 3 {
        return Err(Error::InvalidInput("mosaic needs an RGB image".into()));
    }
    let (w, h) = rgb.dims();
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "mosaic needs even dimensions, got {w}x{h}"
        )));
    }
    let data = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| rgb.get(bayer_channel(x, y), x, y))
        .collect();
    ImageBuffer::from_planar(w, h, 1, ColorSpace::BayerMosaic, data)
}

/// Color channel sampled at `(x, y)` in an RGGB layout.
#[inline]
pub fn bayer_channel(x: usize, y: usize) -> usize {
    match (y % 2, x % 2) {
        (0, 0) => 0,
        (1, 1) => 2,
        _ => 1,
    }
}

/// Bilinear demosaic of an RGGB mosaic.
pub fn demosaic_bilinear(raw: &ImageBuffer) -> Result<ImageBuffer> {
    if raw.colorspace() != ColorSpace::BayerMosaic {
        return Err(Error::InvalidInput("demosaic needs a Bayer mosaic".into()));
    }
    let (w, h) = raw.dims();
    let src = raw.channel(0);
    ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
        if bayer_channel(x, y) == c {
            return src[y * w + x];
        }
        let mut acc = 0.0f32;
        let mut n = 0;
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (sx, sy) = (x as isize + dx, y as isize + dy);
                if sx < 0 || sy < 0 || sx >= w as isize || sy >= h as isize {
                    continue;
                }
                let (sx, sy) = (sx as usize, sy as usize);
                if bayer_channel(sx, sy) == c {
                    acc += src[sy * w + sx];
                    n += 1;
                }
            }
        }
        acc / n as f32
    })
}

/// Adds heteroscedastic Gaussian noise, `N(0, k_shot * max(s, 0) + sigma_read^2)`.
pub fn add_sensor_noise(img: &ImageBuffer, sigma_read: f64, k_shot: f64, rng: &mut impl Rng) -> ImageBuffer {
    let read_var = sigma_read * sigma_read;
    let data = img
        .data()
        .iter()
        .map(|&v| {
            let var = k_shot * (v as f64).max(0.0) + read_var;
            if var == 0.0 {
                return v;
            }
            let z: f64 = rng.sample(StandardNormal);
            (v as f64 + z * var.sqrt()) as f32
        })
        .collect();
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), img.channels(), img.colorspace(), data)
}

/// Synthesizes a noisy Bayer burst from a clean linear RGB frame.
///
/// Frame 0 is the reference (no motion); frame `i > 0` is warped by
/// `warps[i - 1]`. Optional downscaling happens before mosaicking. Each frame
/// draws noise from its own ChaCha stream, so the output does not depend on
/// how frames are scheduled.
pub fn synthesize_burst(
    gt: &ImageBuffer,
    warps: &[Homography],
    spec: &BurstSpec,
    seed: u64,
) -> Result<Vec<ImageBuffer>> {
    spec.validate()?;
    if gt.channels() != 3 {
        return Err(Error::InvalidInput("ground truth must be RGB".into()));
    }
    let (w, h) = gt.dims();
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "ground truth must have even dimensions, got {w}x{h}"
        )));
    }
    if warps.len() + 1 != spec.n_frames {
        return Err(Error::InvalidInput(format!(
            "{} frames need {} warps, got {}",
            spec.n_frames,
            spec.n_frames - 1,
            warps.len()
        )));
    }
    let f = spec.downscale_factor;
    let (ow, oh) = (w / f, h / f);
    if w % f != 0 || h % f != 0 || ow % 2 != 0 || oh % 2 != 0 || ow == 0 || oh == 0 {
        return Err(Error::InvalidInput(format!(
            "{w}x{h} cannot be downscaled by {f} into an even-sized mosaic"
        )));
    }
    (0..spec.n_frames)
        .into_par_iter()
        .map(|i| {
            let moved = if i == 0 {
                gt.clone()
            } else {
                warp(gt, &warps[i - 1])?
            };
            let scaled = if f > 1 {
                resize_bilinear(&moved, ow, oh)?
            } else {
                moved
            };
            let raw = mosaic_rggb(&scaled)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            Ok(add_sensor_noise(&raw, spec.sigma_read, spec.k_shot, &mut rng))
        })
        .collect()
}
