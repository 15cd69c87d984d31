//! Image quality metrics and the training-side loss functionals.
//!
//! All reductions go through [`sum_f64`](crate::image::sum_f64), so results
//! are bit-stable regardless of thread count.

mod features;
mod loss;

pub use features::{ConvExtractor, ConvStage, FeatureExtractor, IdentityExtractor, LEAKY_SLOPE};
pub use loss::{apl, apl_with, generator_objective, tonemap_loss, AplReduction, LossPairing, LossWeights};

use crate::image::{filter, sum_f64, ImageBuffer};
use crate::{Error, Result};

/// PSNR reported for (near) identical inputs.
pub const PSNR_CAP_DB: f64 = 100.0;
const PSNR_MSE_FLOOR: f64 = 1e-10;

pub const SSIM_WINDOW_RADIUS: usize = 5;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn check(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    a.ensure_same_shape(b, "metric inputs")?;
    if a.is_empty() {
        return Err(Error::InvalidInput("metric on an empty image".into()));
    }
    Ok(())
}

/// Mean absolute difference over every sample.
pub fn l1(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check(a, b)?;
    let s = sum_f64(a.data().iter().zip(b.data()).map(|(&x, &y)| (x as f64 - y as f64).abs()));
    Ok(s / a.len() as f64)
}

pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check(a, b)?;
    let s = sum_f64(a.data().iter().zip(b.data()).map(|(&x, &y)| (x as f64 - y as f64).powi(2)));
    Ok(s / a.len() as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse < PSNR_MSE_FLOOR {
        PSNR_CAP_DB
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
    }
}

/// PSNR in dB for data on a unit dynamic range.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// PSNR restricted to pixels where `mask` is true (all channels of a pixel).
pub fn psnr_masked(a: &ImageBuffer, b: &ImageBuffer, mask: &[bool]) -> Result<f64> {
    check(a, b)?;
    let n = a.pixel_count();
    if mask.len() != n {
        return Err(Error::ShapeMismatch(format!("mask has {} entries for {n} pixels", mask.len())));
    }
    let count = mask.iter().filter(|&&m| m).count() * a.channels();
    if count == 0 {
        return Err(Error::InvalidInput("mask selects no pixels".into()));
    }
    let s = sum_f64((0..a.channels()).flat_map(|c| {
        let (x, y) = (a.channel(c), b.channel(c));
        (0..n).filter(|&p| mask[p]).map(move |p| (x[p] as f64 - y[p] as f64).powi(2))
    }));
    Ok(psnr_from_mse(s / count as f64))
}

/// Mean SSIM over channels and pixels with an 11x11 Gaussian window
/// (sigma 1.5, replicated borders) and unit dynamic range.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    check(a, b)?;
    let (w, h) = a.dims();
    let k = filter::gaussian_kernel(SSIM_SIGMA, SSIM_WINDOW_RADIUS);
    let (c1, c2) = ((SSIM_K1).powi(2), (SSIM_K2).powi(2));
    let mut total = 0.0;
    for c in 0..a.channels() {
        let x: Vec<f64> = a.channel(c).iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = b.channel(c).iter().map(|&v| v as f64).collect();
        let blur = |d: &[f64]| filter::separable(d, w, h, &k);
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
        let (mx, my) = (blur(&x), blur(&y));
        let (sxx, syy, sxy) = (blur(&xx), blur(&yy), blur(&xy));
        let map = (0..w * h).map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        });
        total += sum_f64(map) / (w * h) as f64;
    }
    Ok(total / a.channels() as f64)
}
