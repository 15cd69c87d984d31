//! Closed-form map provider used when no oracle targets exist.
//!
//! `w_y` is a smoothstep on the bright exposure's luma, so shadows draw from
//! the bright rendering and highlights from the dark one. `G` is an
//! unsharp-mask detail gain computed on a low-resolution rendering of the
//! whole frame and attenuated linearly with normalized ISO. Because the gain
//! plane is built once per frame and resampled per region, any tiling of the
//! frame reproduces the full-frame maps exactly.

use super::{GainBounds, MetadataFeatures, ToneMaps};
use crate::image::{filter, resize_bilinear, resize_bilinear_region, ColorSpace, ImageBuffer, Rect};
use crate::lite::{tonemap_lite, ExposurePair, GlobalContext, LiteParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicConfig {
    /// Bright-exposure luma where `w_y` starts rising from 0.
    pub weight_low: f32,
    /// Bright-exposure luma where `w_y` reaches 1.
    pub weight_high: f32,
    pub detail_amplitude: f64,
    /// Noise attenuation slope: the detail gain scales by `1 - iso_n * k_noise`.
    pub k_noise: f64,
    /// Blur sigma in map pixels.
    pub detail_sigma: f64,
    /// Floor on the local mean in the relative-detail denominator.
    pub detail_floor: f64,
    /// Long edge of the gain plane before resampling.
    pub map_long_edge: usize,
    pub gain_bounds: GainBounds,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            weight_low: 0.35,
            weight_high: 0.95,
            detail_amplitude: 0.6,
            k_noise: 1.0,
            detail_sigma: 2.0,
            detail_floor: 0.05,
            map_long_edge: 512,
            gain_bounds: GainBounds::default(),
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        self.gain_bounds.validate()?;
        let bad = |m: &str| Err(Error::InvalidArgument(format!("heuristic: {m}")));
        if !(0.0..1.0).contains(&self.weight_low) || !(self.weight_high > self.weight_low && self.weight_high <= 1.0) {
            return bad("weight_low < weight_high must lie in [0, 1]");
        }
        if !(self.detail_amplitude >= 0.0 && self.detail_amplitude.is_finite()) {
            return bad("detail_amplitude must be finite and non-negative");
        }
        if !(self.k_noise >= 0.0 && self.k_noise.is_finite()) {
            return bad("k_noise must be finite and non-negative");
        }
        if !(self.detail_sigma > 0.0 && self.detail_floor > 0.0) {
            return bad("detail_sigma and detail_floor must be positive");
        }
        if self.map_long_edge == 0 {
            return bad("map_long_edge must be positive");
        }
        Ok(())
    }

    pub fn map_dims(&self, w: usize, h: usize) -> (usize, usize) {
        let long = w.max(h);
        if long <= self.map_long_edge {
            return (w, h);
        }
        let s = self.map_long_edge as f64 / long as f64;
        (
            ((w as f64 * s).round() as usize).max(1),
            ((h as f64 * s).round() as usize).max(1),
        )
    }
}

#[inline]
fn smoothstep(e0: f32, e1: f32, x: f32) -> f32 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Per-frame state of the heuristic provider.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicModel {
    cfg: HeuristicConfig,
    full: (usize, usize),
    gain: ImageBuffer,
}

impl HeuristicModel {
    /// Builds the low-resolution gain plane from a downscaled render of `hdr`.
    pub fn from_hdr(
        hdr: &ImageBuffer,
        ctx: &GlobalContext,
        lite: &LiteParams,
        meta: &MetadataFeatures,
        cfg: &HeuristicConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let (w, h) = hdr.dims();
        let (mw, mh) = cfg.map_dims(w, h);
        let small = if (mw, mh) == (w, h) { hdr.clone() } else { resize_bilinear(hdr, mw, mh)? };
        let pair = tonemap_lite(&small, ctx, lite)?;
        let gain = detail_gain(pair.s1_y(), mw, mh, meta.iso_n, cfg);
        Ok(HeuristicModel { cfg: cfg.clone(), full: (w, h), gain })
    }

    pub fn full_dims(&self) -> (usize, usize) {
        self.full
    }

    /// Maps for `region` of the frame; `pair` must be the Lite pair of that region.
    pub fn maps(&self, pair: &ExposurePair, region: Rect) -> Result<ToneMaps> {
        if pair.dims() != (region.width(), region.height()) {
            return Err(Error::ShapeMismatch(format!(
                "exposures {:?} do not match region {region:?}",
                pair.dims()
            )));
        }
        let (w, h) = pair.dims();
        let cfg = &self.cfg;
        let w_y: Vec<f32> = pair
            .s1_y()
            .iter()
            .map(|&y| smoothstep(cfg.weight_low, cfg.weight_high, y))
            .collect();
        let w_c1: Vec<f32> = w_y.iter().map(|&v| 1.0 - v).collect();
        let g = resize_bilinear_region(&self.gain, self.full.0, self.full.1, region)?
            .map(|v| cfg.gain_bounds.clamp(v));
        let p = |d| ImageBuffer::from_parts_unchecked(w, h, 1, ColorSpace::LumaOnly, d);
        ToneMaps::new(p(w_y.clone()), p(w_y), p(w_c1), g, cfg.gain_bounds)
    }
}

/// `1 + amp * max(0, 1 - iso_n * k) * (Y - blur(Y)) / max(blur(Y), floor)`, clamped.
fn detail_gain(y: &[f32], w: usize, h: usize, iso_n: f64, cfg: &HeuristicConfig) -> ImageBuffer {
    let y: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let radius = (3.0 * cfg.detail_sigma).ceil() as usize;
    let blur = filter::separable(&y, w, h, &filter::gaussian_kernel(cfg.detail_sigma, radius));
    let amp = cfg.detail_amplitude * (1.0 - iso_n * cfg.k_noise).max(0.0);
    let g = y
        .iter()
        .zip(&blur)
        .map(|(&v, &b)| {
            let d = (v - b) / b.max(cfg.detail_floor);
            cfg.gain_bounds.clamp((1.0 + amp * d) as f32)
        })
        .collect();
    ImageBuffer::from_parts_unchecked(w, h, 1, ColorSpace::LumaOnly, g)
}
