//! Reference tone-map: synthetic exposure fusion followed by an optional
//! Laplacian detail boost. It is the slow pipeline the tunable path learns
//! to match, and it renders the dual targets `y0` (detail boost off) and
//! `y1` (on).

use crate::fusion::{auto_levels, mertens_fuse, MertensExponents};
use crate::image::{rgb_to_ycbcr, ycbcr_to_rgb, Band, ColorSpace, ImageBuffer, Pyramid};
use crate::lite::{curve_inverse, render_exposure, GlobalContext};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Deeper pyramids spread the blend of very different exposures over large
/// areas and leave halos around strong highlights.
pub const DEFAULT_MAX_LEVELS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Multipliers on the brightness-anchored gain, strictly increasing.
    pub exposure_gains: Vec<f64>,
    pub contrast_enabled: bool,
    /// Gain per Laplacian detail band, finest first; missing bands use 1.
    pub contrast_boost: Vec<f64>,
    /// Display value the median lands on at gain multiplier 1.
    pub brightness_target: f64,
    pub saturation_gain: f64,
    pub gamma: f64,
    /// `None` uses the deepest pyramid the frame allows, up to
    /// [`DEFAULT_MAX_LEVELS`].
    pub n_levels: Option<usize>,
    pub contrast_weight: f64,
    pub saturation_weight: f64,
    pub exposedness_weight: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            exposure_gains: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            contrast_enabled: true,
            contrast_boost: vec![1.5, 1.3, 1.15],
            brightness_target: 0.5,
            saturation_gain: 1.0,
            gamma: 2.2,
            n_levels: None,
            contrast_weight: 1.0,
            saturation_weight: 1.0,
            exposedness_weight: 1.0,
        }
    }
}

impl ReferenceConfig {
    pub fn n_exposures(&self) -> usize {
        self.exposure_gains.len()
    }

    pub fn exponents(&self) -> MertensExponents {
        MertensExponents {
            contrast: self.contrast_weight,
            saturation: self.saturation_weight,
            exposedness: self.exposedness_weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.exposure_gains.len() < 2 {
            return bad("the reference needs at least 2 exposures".into());
        }
        if self.exposure_gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return bad("exposure gains must be positive".into());
        }
        if self.exposure_gains.windows(2).any(|w| w[1] <= w[0]) {
            return bad("exposure gains must be strictly increasing".into());
        }
        if self.contrast_boost.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return bad("contrast boosts must be finite and non-negative".into());
        }
        if !(self.brightness_target > 0.0 && self.brightness_target < 1.0) {
            return bad(format!("brightness_target must lie in (0, 1), got {}", self.brightness_target));
        }
        if !(self.saturation_gain.is_finite() && self.saturation_gain >= 0.0) {
            return bad("saturation_gain must be non-negative".into());
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad("gamma must be positive".into());
        }
        if self.n_levels == Some(0) {
            return bad("n_levels must be at least 1".into());
        }
        Ok(())
    }
}

/// Gain applied to the scene for each synthetic exposure.
pub fn exposure_ladder(ctx: &GlobalContext, cfg: &ReferenceConfig) -> Vec<f64> {
    let anchor = curve_inverse(cfg.brightness_target, cfg.gamma) / ctx.percentiles.p50;
    cfg.exposure_gains.iter().map(|g| anchor * g).collect()
}

/// The synthetic exposures in display RGB, clamped to `[0, 1]`. Brightness
/// and saturation adjustments are applied here, per exposure.
pub fn synthetic_exposures(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &ReferenceConfig) -> Result<Vec<ImageBuffer>> {
    cfg.validate()?;
    exposure_ladder(ctx, cfg)
        .par_iter()
        .map(|&g| {
            let ycc = render_exposure(hdr, g, cfg.gamma, cfg.saturation_gain);
            Ok(ycbcr_to_rgb(&ycc)?.clamp01().with_colorspace(ColorSpace::Srgb)?)
        })
        .collect()
}

/// Multiplies the Laplacian detail bands of the luma channel by `boost`.
pub fn boost_luma_detail(rgb: &ImageBuffer, boost: &[f64], n_levels: usize) -> Result<ImageBuffer> {
    let ycc = rgb_to_ycbcr(&rgb.clone().with_colorspace(ColorSpace::LinearRgb)?)?;
    let (w, h) = ycc.dims();
    let y: Vec<f64> = ycc.channel(0).iter().map(|&v| v as f64).collect();
    let mut pyr = Pyramid::laplacian_from_band(Band::from_plane(w, h, y), n_levels)?;
    let last = pyr.len() - 1;
    for (i, band) in pyr.levels[..last].iter_mut().enumerate() {
        let b = boost.get(i).copied().unwrap_or(1.0);
        if b != 1.0 {
            band.data.iter_mut().for_each(|v| *v *= b);
        }
    }
    let boosted = pyr.collapse()?;
    let n = w * h;
    let mut data = ycc.into_data();
    for (d, &v) in data[..n].iter_mut().zip(&boosted.data) {
        *d = v as f32;
    }
    let ycc = ImageBuffer::from_planar(w, h, 3, ColorSpace::YCbCr, data)?;
    Ok(ycbcr_to_rgb(&ycc)?)
}

/// [`reference_tonemap`] without the final clamp.
pub fn reference_tonemap_unclamped(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &ReferenceConfig) -> Result<ImageBuffer> {
    let exposures = synthetic_exposures(hdr, ctx, cfg)?;
    let (w, h) = hdr.dims();
    let levels = match cfg.n_levels {
        Some(n) => n,
        None => auto_levels(w, h, DEFAULT_MAX_LEVELS),
    };
    let fused = mertens_fuse(&exposures, cfg.exponents(), levels)?;
    let out = if cfg.contrast_enabled && cfg.contrast_boost.iter().any(|&b| b != 1.0) {
        boost_luma_detail(&fused, &cfg.contrast_boost, levels)?
    } else {
        fused
    };
    out.with_colorspace(ColorSpace::Srgb)
}

pub fn reference_tonemap(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &ReferenceConfig) -> Result<ImageBuffer> {
    Ok(reference_tonemap_unclamped(hdr, ctx, cfg)?.clamp01())
}

/// `(y0, y1)`: the reference with detail boost off and on.
pub fn render_targets(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &ReferenceConfig) -> Result<(ImageBuffer, ImageBuffer)> {
    let off = ReferenceConfig {
        contrast_enabled: false,
        ..cfg.clone()
    };
    let on = ReferenceConfig {
        contrast_enabled: true,
        ..cfg.clone()
    };
    let (y0, y1) = rayon::join(
        || reference_tonemap(hdr, ctx, &off),
        || reference_tonemap(hdr, ctx, &on),
    );
    Ok((y0?, y1?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::luma_of;
    use crate::lite::{compute_global_context, curve};

    fn textured(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
            let (xf, yf) = (x as f32, y as f32);
            let base = 0.05 + 2.0 * (xf / w as f32) * (yf / h as f32);
            base * (1.0 + 0.4 * (xf * 0.7 + c as f32).sin() * (yf * 0.5).cos())
        })
        .unwrap()
    }

    /// Detail concentrated near Nyquist, so it lives in the finest band.
    fn fine_textured(w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
            let base = 0.1 + 0.6 * (x as f32 / w as f32);
            let s = if (x + y) % 2 == 0 { 1.0 } else { -1.0 };
            base * (1.0 + 0.2 * s) * [1.0, 0.95, 0.9][c]
        })
        .unwrap()
    }

    fn finest_band_energy(img: &ImageBuffer, levels: usize) -> f64 {
        let pyr = Pyramid::laplacian(&luma_of(img), levels).unwrap();
        pyr.levels[0].data.iter().map(|v| v * v).sum()
    }

    #[test]
    fn constant_in_constant_out() {
        let hdr = ImageBuffer::filled(48, 48, 3, ColorSpace::LinearRgb, 0.3).unwrap();
        let ctx = compute_global_context(&hdr).unwrap();
        let cfg = ReferenceConfig::default();
        let (y0, y1) = render_targets(&hdr, &ctx, &cfg).unwrap();
        assert_eq!(y0, y1);
        // flat gray frames get equal Mertens weights
        let expect: f64 = exposure_ladder(&ctx, &cfg)
            .iter()
            .map(|g| curve(g * 0.3f32 as f64, 2.2))
            .sum::<f64>()
            / 5.0;
        for &v in y0.data() {
            assert!((v as f64 - expect).abs() < 1e-5, "{v} vs {expect}");
        }
    }

    #[test]
    fn unit_boost_changes_nothing() {
        let hdr = textured(64, 64);
        let ctx = compute_global_context(&hdr).unwrap();
        let cfg = ReferenceConfig {
            contrast_boost: vec![1.0; 6],
            ..Default::default()
        };
        let (y0, y1) = render_targets(&hdr, &ctx, &cfg).unwrap();
        for (a, b) in y0.data().iter().zip(y1.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn boost_scales_finest_band_energy() {
        let hdr = fine_textured(128, 128);
        let ctx = compute_global_context(&hdr).unwrap();
        let base = ReferenceConfig {
            contrast_boost: vec![1.5],
            n_levels: Some(5),
            ..Default::default()
        };
        let y0 = reference_tonemap_unclamped(&hdr, &ctx, &ReferenceConfig { contrast_enabled: false, ..base.clone() }).unwrap();
        let y1 = reference_tonemap_unclamped(&hdr, &ctx, &base).unwrap();
        let ratio = finest_band_energy(&y1, 5) / finest_band_energy(&y0, 5);
        assert!((ratio - 2.25).abs() < 0.225, "{ratio}");
    }

    fn residual_gap(a: &ImageBuffer, b: &ImageBuffer, levels: usize) -> f64 {
        let r0 = Pyramid::laplacian(&luma_of(a), levels).unwrap();
        let r1 = Pyramid::laplacian(&luma_of(b), levels).unwrap();
        r0.residual().data.iter().zip(&r1.residual().data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn enhancement_keeps_low_pass() {
        let hdr = fine_textured(256, 192);
        let ctx = compute_global_context(&hdr).unwrap();
        let cfg = ReferenceConfig::default();
        let y0 = reference_tonemap_unclamped(&hdr, &ctx, &ReferenceConfig { contrast_enabled: false, ..cfg.clone() }).unwrap();
        let y1 = reference_tonemap_unclamped(&hdr, &ctx, &cfg).unwrap();
        let levels = auto_levels(256, 192, 8);
        assert!(residual_gap(&y0, &y1, levels) < 1e-3);
        assert!(finest_band_energy(&y1, levels) > finest_band_energy(&y0, levels));
    }

    #[test]
    fn output_in_range_and_invalid_configs() {
        let hdr = textured(40, 40).map(|v| v * 1000.0);
        let ctx = compute_global_context(&hdr).unwrap();
        let out = reference_tonemap(&hdr, &ctx, &ReferenceConfig::default()).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        let bad = ReferenceConfig {
            exposure_gains: vec![1.0, 0.5],
            ..Default::default()
        };
        assert!(reference_tonemap(&hdr, &ctx, &bad).is_err());
        let single = ReferenceConfig {
            exposure_gains: vec![1.0],
            ..Default::default()
        };
        assert!(reference_tonemap(&hdr, &ctx, &single).is_err());
    }
}
