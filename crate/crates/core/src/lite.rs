//! Global image statistics and the two-exposure lightweight tone-map.
//!
//! Both synthetic exposures share one curve family, `(x / (1 + x))^(1/gamma)`,
//! and differ only in a global gain anchored on the context percentiles. The
//! operator is pointwise, so evaluating a tile with the full-frame context
//! reproduces the full-frame result exactly.

use crate::image::{luma, resize_bilinear, ColorSpace, ImageBuffer};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const HIST_BINS: usize = 256;
/// log2-luma range covered by the histogram; outliers land in the end bins.
pub const HIST_LOG2_RANGE: (f64, f64) = (-20.0, 12.0);
pub const LUMA_FLOOR: f64 = 1e-6;
pub const THUMB_LONG_EDGE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p1: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

/// Once-per-image statistics shared by every tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalContext {
    pub log_luma_histogram: Vec<f64>,
    pub percentiles: Percentiles,
    pub mean_log_luma: f64,
    pub source_size: (usize, usize),
    pub thumb_size: (usize, usize),
}

/// Thumbnail dimensions with the long edge capped at [`THUMB_LONG_EDGE`].
pub fn thumb_dims(w: usize, h: usize) -> (usize, usize) {
    let long = w.max(h);
    if long <= THUMB_LONG_EDGE {
        return (w, h);
    }
    let s = THUMB_LONG_EDGE as f64 / long as f64;
    (
        ((w as f64 * s).round() as usize).max(1),
        ((h as f64 * s).round() as usize).max(1),
    )
}

/// Nearest-rank percentile of sorted data: index `ceil(q * n) - 1`.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

pub fn compute_global_context(hdr: &ImageBuffer) -> Result<GlobalContext> {
    if hdr.is_empty() {
        return Err(Error::InvalidInput("empty image".into()));
    }
    let (w, h) = hdr.dims();
    let (tw, th) = thumb_dims(w, h);
    let thumb = resize_bilinear(hdr, tw, th)?;
    let mut lum: Vec<f64> = if thumb.channels() == 3 {
        let (r, g, b) = (thumb.channel(0), thumb.channel(1), thumb.channel(2));
        (0..thumb.pixel_count()).map(|i| luma(r[i], g[i], b[i])).collect()
    } else {
        thumb.data().iter().map(|&v| v as f64).collect()
    };
    lum.iter_mut().for_each(|v| *v = v.max(LUMA_FLOOR));
    let n = lum.len() as f64;

    let (lo, hi) = HIST_LOG2_RANGE;
    let mut hist = vec![0.0; HIST_BINS];
    let mut logs = Vec::with_capacity(lum.len());
    for &l in &lum {
        let lg = l.log2();
        logs.push(lg);
        let b = (((lg - lo) / (hi - lo)) * HIST_BINS as f64).floor();
        hist[(b.max(0.0) as usize).min(HIST_BINS - 1)] += 1.0;
    }
    hist.iter_mut().for_each(|v| *v /= n);
    let mean_log_luma = crate::image::sum_f64(logs) / n;

    lum.sort_by(f64::total_cmp);
    let percentiles = Percentiles {
        p1: nearest_rank(&lum, 0.01),
        p10: nearest_rank(&lum, 0.10),
        p50: nearest_rank(&lum, 0.50),
        p90: nearest_rank(&lum, 0.90),
        p99: nearest_rank(&lum, 0.99),
    };
    Ok(GlobalContext {
        log_luma_histogram: hist,
        percentiles,
        mean_log_luma,
        source_size: (w, h),
        thumb_size: (tw, th),
    })
}

/// Display curve shared by the lightweight and reference tone-maps.
#[inline]
pub fn curve(x: f64, gamma: f64) -> f64 {
    let x = x.max(0.0);
    (x / (1.0 + x)).powf(1.0 / gamma)
}

/// Scene value that [`curve`] maps to `y`, for `y` in `[0, 1)`.
#[inline]
pub fn curve_inverse(y: f64, gamma: f64) -> f64 {
    let u = y.clamp(0.0, 1.0).powf(gamma);
    u / (1.0 - u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiteParams {
    /// Display value the median lands on in the bright exposure.
    pub bright_p50_target: f64,
    /// Display value the 90th percentile lands on in the dark exposure.
    pub dark_p90_target: f64,
    /// The dark gain is at least this many stops below the bright gain.
    pub min_separation_stops: f64,
    pub gamma: f64,
    pub gain_min: f64,
    pub gain_max: f64,
    /// Chroma multiplier applied to both exposures.
    pub saturation: f64,
}

impl Default for LiteParams {
    fn default() -> Self {
        LiteParams {
            bright_p50_target: 0.75,
            dark_p90_target: 0.6,
            min_separation_stops: 5.0,
            gamma: 2.2,
            gain_min: 2f64.powi(-12),
            gain_max: 2f64.powi(12),
            saturation: 1.0,
        }
    }
}

impl LiteParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        for (n, v) in [("bright_p50_target", self.bright_p50_target), ("dark_p90_target", self.dark_p90_target)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{n} must lie in (0, 1), got {v}"));
            }
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.min_separation_stops.is_finite() && self.min_separation_stops > 0.0) {
            return bad("min_separation_stops must be positive".into());
        }
        if !(self.gain_min > 0.0 && self.gain_max.is_finite() && self.gain_min < self.gain_max) {
            return bad(format!("gain bounds [{}, {}] are invalid", self.gain_min, self.gain_max));
        }
        if !(self.saturation.is_finite() && self.saturation >= 0.0) {
            return bad("saturation must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiteGains {
    pub dark: f64,
    pub bright: f64,
}

pub fn lite_gains(ctx: &GlobalContext, params: &LiteParams) -> Result<LiteGains> {
    params.validate()?;
    let p = &ctx.percentiles;
    let clampg = |g: f64| g.clamp(params.gain_min, params.gain_max);
    let bright = clampg(curve_inverse(params.bright_p50_target, params.gamma) / p.p50);
    let anchored = curve_inverse(params.dark_p90_target, params.gamma) / p.p90;
    let dark = anchored.min(bright / 2f64.powf(params.min_separation_stops));
    let dark = dark.clamp(params.gain_min / 2f64.powf(params.min_separation_stops), params.gain_max);
    Ok(LiteGains { dark, bright })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Lite,
    Reference,
}

/// The dark (`s0`) and bright (`s1`) synthetic exposures, each stored as a
/// full-range YCbCr buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposurePair {
    pub s0: ImageBuffer,
    pub s1: ImageBuffer,
    pub provenance: Provenance,
}

impl ExposurePair {
    pub fn new(s0: ImageBuffer, s1: ImageBuffer, provenance: Provenance) -> Result<Self> {
        s0.ensure_same_shape(&s1, "exposure pair")?;
        if s0.channels() != 3 || s0.colorspace() != ColorSpace::YCbCr || s1.colorspace() != ColorSpace::YCbCr {
            return Err(Error::InvalidInput("exposure pair planes must be YCbCr".into()));
        }
        Ok(ExposurePair { s0, s1, provenance })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.s0.dims()
    }

    pub fn s0_y(&self) -> &[f32] {
        self.s0.channel(0)
    }

    pub fn s1_y(&self) -> &[f32] {
        self.s1.channel(0)
    }

    /// `(Cb, Cr)` of exposure `k`.
    pub fn chroma(&self, k: usize) -> (&[f32], &[f32]) {
        let s = if k == 0 { &self.s0 } else { &self.s1 };
        (s.channel(1), s.channel(2))
    }

    pub fn crop(&self, rect: crate::image::Rect) -> Result<ExposurePair> {
        Ok(ExposurePair {
            s0: self.s0.crop(rect)?,
            s1: self.s1.crop(rect)?,
            provenance: self.provenance,
        })
    }
}

/// Renders one exposure of `hdr` at `gain`: luma through [`curve`], chroma
/// scaled by the same luma ratio times `saturation`.
pub(crate) fn render_exposure(hdr: &ImageBuffer, gain: f64, gamma: f64, saturation: f64) -> ImageBuffer {
    let (w, h) = hdr.dims();
    let n = w * h;
    let mut data = vec![0.0f32; 3 * n];
    let rgb = hdr.channels() == 3;
    for i in 0..n {
        let (l, cb, cr) = if rgb {
            let (r, g, b) = (
                hdr.channel(0)[i].max(0.0) as f64,
                hdr.channel(1)[i].max(0.0) as f64,
                hdr.channel(2)[i].max(0.0) as f64,
            );
            crate::image::rgb_to_ycc_px(r, g, b)
        } else {
            (hdr.data()[i].max(0.0) as f64, 0.0, 0.0)
        };
        let y = curve(gain * l, gamma);
        let k = if l >= 1e-9 { saturation * y / l } else { 0.0 };
        data[i] = y as f32;
        data[n + i] = (k * cb) as f32;
        data[2 * n + i] = (k * cr) as f32;
    }
    ImageBuffer::from_parts_unchecked(w, h, 3, ColorSpace::YCbCr, data)
}

pub fn tonemap_lite(hdr: &ImageBuffer, ctx: &GlobalContext, params: &LiteParams) -> Result<ExposurePair> {
    let g = lite_gains(ctx, params)?;
    if hdr.channels() == 3 && hdr.colorspace() == ColorSpace::YCbCr {
        return Err(Error::InvalidInput("tone-map input must be linear RGB".into()));
    }
    let (s0, s1) = rayon::join(
        || render_exposure(hdr, g.dark, params.gamma, params.saturation),
        || render_exposure(hdr, g.bright, params.gamma, params.saturation),
    );
    ExposurePair::new(s0, s1, Provenance::Lite)
}
