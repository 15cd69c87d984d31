//! EV0/EV- fusion: brightness equalization, deghosting and Mertens
//! multiresolution exposure fusion into one linear HDR frame.

use crate::burst::{self, warp, Homography, MatchParams, RansacParams};
use crate::image::{filter, luma, max_levels, Band, ColorSpace, ImageBuffer, Pyramid, Rect};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A restored capture and its exposure relative to EV0.
#[derive(Debug, Clone)]
pub struct ExposureFrame {
    pub img: ImageBuffer,
    /// 1 for EV0, 1/8 for the short EV- capture.
    pub ev_ratio: f64,
    pub iso: f64,
}

impl ExposureFrame {
    pub fn new(img: ImageBuffer, ev_ratio: f64) -> Self {
        ExposureFrame {
            img,
            ev_ratio,
            iso: 50.0,
        }
    }
}

fn check_ratio(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exposure ratio must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Brings a frame to EV0 brightness; headroom above 1 is kept.
pub fn equalize_exposure(frame: &ExposureFrame) -> Result<ImageBuffer> {
    check_ratio(frame.ev_ratio)?;
    if frame.ev_ratio == 1.0 {
        return Ok(frame.img.clone());
    }
    let inv = 1.0 / frame.ev_ratio;
    Ok(frame.img.map(|v| (v as f64 * inv) as f32))
}

fn luma_plane(img: &ImageBuffer, clip: Option<f32>) -> Vec<f64> {
    let cl = |v: f32| match clip {
        Some(c) => v.clamp(0.0, c),
        None => v,
    };
    if img.channels() == 1 {
        return img.data().iter().map(|&v| cl(v) as f64).collect();
    }
    let (r, g, b) = (img.channel(0), img.channel(1), img.channel(2));
    (0..img.pixel_count())
        .map(|i| luma(cl(r[i]), cl(g[i]), cl(b[i])))
        .collect()
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    if e1 <= e0 {
        return if x > e0 { 1.0 } else { 0.0 };
    }
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Per-pixel fallback weight toward the reference; 1 means "use `reference`".
pub fn ghost_mask(reference: &ImageBuffer, aux: &ImageBuffer, tau: f64, clip: Option<f32>) -> Result<Vec<f64>> {
    reference.ensure_same_shape(aux, "deghost")?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau must lie in [0, 1], got {tau}")));
    }
    let (w, h) = reference.dims();
    let a = luma_plane(reference, clip);
    let b = luma_plane(aux, clip);
    let diff: Vec<f64> = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).collect();
    let smooth = filter::box_mean(&diff, w, h, 2);
    Ok(smooth.iter().map(|&d| smoothstep(tau, 2.0 * tau, d)).collect())
}

/// Replaces `aux` by `reference` where their smoothed lumas disagree.
pub fn deghost(reference: &ImageBuffer, aux: &ImageBuffer, tau: f64) -> Result<ImageBuffer> {
    deghost_clipped(reference, aux, tau, None)
}

/// [`deghost`] with both lumas clamped to `[0, clip]` before comparison, so
/// regions where the reference is saturated do not count as motion.
pub fn deghost_clipped(reference: &ImageBuffer, aux: &ImageBuffer, tau: f64, clip: Option<f32>) -> Result<ImageBuffer> {
    let alpha = ghost_mask(reference, aux, tau, clip)?;
    let n = reference.pixel_count();
    let mut data = Vec::with_capacity(reference.len());
    for c in 0..reference.channels() {
        let (r, x) = (reference.channel(c), aux.channel(c));
        data.extend((0..n).map(|i| {
            let a = alpha[i];
            if a == 0.0 {
                x[i]
            } else if a == 1.0 {
                r[i]
            } else {
                ((1.0 - a) * x[i] as f64 + a * r[i] as f64) as f32
            }
        }));
    }
    Ok(ImageBuffer::from_parts_unchecked(
        reference.width(),
        reference.height(),
        reference.channels(),
        aux.colorspace(),
        data,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MertensExponents {
    pub contrast: f64,
    pub saturation: f64,
    pub exposedness: f64,
}

impl Default for MertensExponents {
    fn default() -> Self {
        MertensExponents {
            contrast: 1.0,
            saturation: 1.0,
            exposedness: 1.0,
        }
    }
}

impl MertensExponents {
    pub fn exposedness_only() -> Self {
        MertensExponents {
            contrast: 0.0,
            saturation: 0.0,
            exposedness: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("contrast", self.contrast),
            ("saturation", self.saturation),
            ("exposedness", self.exposedness),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{n} exponent must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub const EXPOSEDNESS_SIGMA: f64 = 0.2;
const WEIGHT_EPS: f64 = 1e-12;

/// Normalized per-frame weight planes.
#[derive(Debug, Clone)]
pub struct MertensWeights {
    pub width: usize,
    pub height: usize,
    pub planes: Vec<Vec<f64>>,
    pub exponents: MertensExponents,
}

#[inline]
fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

fn raw_weight(img: &ImageBuffer, e: &MertensExponents) -> Vec<f64> {
    let (w, h) = img.dims();
    let n = w * h;
    let contrast = if e.contrast > 0.0 {
        filter::laplacian_abs(&luma_plane(img, None), w, h)
    } else {
        vec![1.0; n]
    };
    let inv2s2 = 1.0 / (2.0 * EXPOSEDNESS_SIGMA * EXPOSEDNESS_SIGMA);
    let chans: Vec<&[f32]> = (0..img.channels()).map(|c| img.channel(c)).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut expo = 1.0;
            let mut mean = 0.0;
            for ch in &chans {
                let v = ch[i] as f64;
                expo *= (-(v - 0.5) * (v - 0.5) * inv2s2).exp();
                mean += v;
            }
            let sat = if chans.len() == 1 {
                1.0
            } else {
                mean /= chans.len() as f64;
                let var = chans
                    .iter()
                    .map(|ch| (ch[i] as f64 - mean).powi(2))
                    .sum::<f64>()
                    / chans.len() as f64;
                var.sqrt()
            };
            pow0(contrast[i], e.contrast) * pow0(sat, e.saturation) * pow0(expo, e.exposedness)
        })
        .collect()
}

fn check_stack(frames: &[ImageBuffer]) -> Result<()> {
    if frames.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "exposure fusion needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    for f in &frames[1..] {
        frames[0].ensure_same_shape(f, "exposure fusion")?;
    }
    Ok(())
}

/// Contrast, saturation and well-exposedness weights computed on
/// display-referred frames (samples nominally in `[0, 1]`).
pub fn mertens_weights(frames: &[ImageBuffer], exponents: MertensExponents) -> Result<MertensWeights> {
    check_stack(frames)?;
    exponents.validate()?;
    let raw: Vec<Vec<f64>> = frames.iter().map(|f| raw_weight(f, &exponents)).collect();
    let n = frames[0].pixel_count();
    let mut planes = vec![vec![0.0; n]; frames.len()];
    for i in 0..n {
        let total: f64 = raw.iter().map(|r| r[i] + WEIGHT_EPS).sum();
        for (p, r) in planes.iter_mut().zip(&raw) {
            p[i] = (r[i] + WEIGHT_EPS) / total;
        }
    }
    Ok(MertensWeights {
        width: frames[0].width(),
        height: frames[0].height(),
        planes,
        exponents,
    })
}

/// Laplacian-pyramid blend of `frames` under Gaussian pyramids of `weights`.
pub fn mertens_blend(frames: &[ImageBuffer], weights: &MertensWeights, n_levels: usize) -> Result<ImageBuffer> {
    check_stack(frames)?;
    if weights.planes.len() != frames.len()
        || (weights.width, weights.height) != frames[0].dims()
    {
        return Err(Error::ShapeMismatch(
            "weight planes do not match the frame stack".into(),
        ));
    }
    let (w, h) = frames[0].dims();
    let ch = frames[0].channels();
    let per_frame: Vec<Pyramid> = frames
        .par_iter()
        .zip(&weights.planes)
        .map(|(f, wp)| -> Result<Pyramid> {
            let lap = Pyramid::laplacian(f, n_levels)?;
            let gw = Pyramid::gaussian_from_band(Band::from_plane(w, h, wp.clone()), n_levels)?;
            let mut levels = lap.levels;
            for (band, g) in levels.iter_mut().zip(&gw.levels) {
                let m = band.width * band.height;
                for c in 0..ch {
                    for (v, &wt) in band.channel_mut(c).iter_mut().zip(&g.data[..m]) {
                        *v *= wt;
                    }
                }
            }
            Ok(Pyramid {
                kind: lap.kind,
                levels,
            })
        })
        .collect::<Result<_>>()?;
    let mut acc = per_frame[0].clone();
    for p in &per_frame[1..] {
        for (a, b) in acc.levels.iter_mut().zip(&p.levels) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
    }
    acc.reconstruct(frames[0].colorspace())
}

/// Weights and blends the same frames.
pub fn mertens_fuse(frames: &[ImageBuffer], exponents: MertensExponents, n_levels: usize) -> Result<ImageBuffer> {
    let wts = mertens_weights(frames, exponents)?;
    mertens_blend(frames, &wts, n_levels)
}

/// Default pyramid depth: as deep as the frame allows, up to `cap`.
pub fn auto_levels(w: usize, h: usize, cap: usize) -> usize {
    max_levels(w, h).min(cap).max(1)
}

/// The fixed display compression used only to compute HDR fusion weights.
#[inline]
pub fn display_compress(v: f32) -> f32 {
    let v = v.max(0.0) as f64;
    (v / (1.0 + v)) as f32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuseParams {
    pub tau: f64,
    pub exponents: MertensExponents,
    /// `None` picks [`auto_levels`] with a cap of 5.
    pub n_levels: Option<usize>,
}

impl Default for FuseParams {
    fn default() -> Self {
        FuseParams {
            tau: 0.1,
            exponents: MertensExponents::default(),
            n_levels: None,
        }
    }
}

/// Full fusion path: align EV-, equalize both frames, deghost against EV0,
/// then Mertens-fuse. Weights are computed on `x / (1 + x)` compressed
/// copies while the blend operates on linear radiance.
pub fn fuse_hdr(ev0: &ExposureFrame, evm: &ExposureFrame, align: &Homography, params: &FuseParams) -> Result<ImageBuffer> {
    check_ratio(ev0.ev_ratio)?;
    check_ratio(evm.ev_ratio)?;
    ev0.img.ensure_same_shape(&evm.img, "fuse_hdr")?;
    let warped = ExposureFrame {
        img: warp(&evm.img, align)?,
        ..evm.clone()
    };
    let reference = equalize_exposure(ev0)?;
    let aux = equalize_exposure(&warped)?;
    // EV0 saturates at 1.0 in its own units
    let clip = (1.0 / ev0.ev_ratio) as f32;
    let aux = deghost_clipped(&reference, &aux, params.tau, Some(clip))?;
    let linear = [reference, aux];
    let display: Vec<ImageBuffer> = linear.iter().map(|f| f.map(display_compress)).collect();
    let (w, h) = linear[0].dims();
    let levels = params.n_levels.unwrap_or_else(|| auto_levels(w, h, 5));
    let weights = mertens_weights(&display, params.exponents)?;
    let fused = mertens_blend(&linear, &weights, levels)?;
    Ok(fused.map(|v| v.max(0.0)))
}

/// Homography aligning `evm` onto `ev0` from matched corner patches.
pub fn estimate_alignment(ev0: &ImageBuffer, evm: &ImageBuffer) -> Result<Homography> {
    let ransac = RansacParams {
        iters: 2000,
        inlier_px: 1.0,
        min_inliers: 8,
        seed: 0,
    };
    burst::align(ev0, evm, &MatchParams::default(), &ransac)
}

/// Mean squared error between `fused` and `truth` over `region`, the
/// residual-ghosting statistic used to compare alignment strategies.
pub fn ghost_energy(fused: &ImageBuffer, truth: &ImageBuffer, region: Rect) -> Result<f64> {
    fused.ensure_same_shape(truth, "ghost_energy")?;
    let (w, h) = fused.dims();
    if !Rect::full(w, h).contains_rect(&region) || region.area() == 0 {
        return Err(Error::InvalidArgument("region outside the frame".into()));
    }
    let mut terms = Vec::with_capacity(region.area() * fused.channels());
    for c in 0..fused.channels() {
        let (a, b) = (fused.channel(c), truth.channel(c));
        for y in region.y0..region.y1 {
            for x in region.x0..region.x1 {
                let d = a[y * w + x] as f64 - b[y * w + x] as f64;
                terms.push(d * d);
            }
        }
    }
    Ok(crate::image::sum_f64(terms.iter().copied()) / terms.len() as f64)
}

/// Tags the HDR result of [`fuse_hdr`] as linear RGB.
pub fn as_linear(img: ImageBuffer) -> Result<ImageBuffer> {
    img.with_colorspace(ColorSpace::LinearRgb)
}
