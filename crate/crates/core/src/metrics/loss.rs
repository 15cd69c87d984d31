use super::features::image_features;
use super::{l1, ssim, FeatureExtractor};
use crate::image::{sum_f64, ImageBuffer};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-stage reduction of the feature-space L1 distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AplReduction {
    /// Mean over feature elements: resolution independent.
    #[default]
    Mean,
    /// Raw sum over feature elements.
    Sum,
}

/// Adversarial perceptual loss with mean reduction.
pub fn apl(fx: &dyn FeatureExtractor, a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    apl_with(fx, a, b, AplReduction::Mean)
}

pub fn apl_with(fx: &dyn FeatureExtractor, a: &ImageBuffer, b: &ImageBuffer, reduction: AplReduction) -> Result<f64> {
    a.ensure_same_shape(b, "apl inputs")?;
    let (fa, fb) = (image_features(fx, a)?, image_features(fx, b)?);
    let mut total = 0.0;
    for (x, y) in fa.iter().zip(&fb) {
        let s = sum_f64(x.data.iter().zip(&y.data).map(|(p, q)| (p - q).abs()));
        total += match reduction {
            AplReduction::Mean => s / x.data.len().max(1) as f64,
            AplReduction::Sum => s,
        };
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{n} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// `data + lambda1 * gan + lambda2 * apl`.
pub fn generator_objective(data: f64, gan: f64, apl: f64, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    if ![data, gan, apl].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("loss terms".into()));
    }
    Ok(data + w.lambda1 * gan + w.lambda2 * apl)
}

/// Which output each target is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossPairing {
    /// `(I, y0)` and `(I_tilde, y1)`.
    #[default]
    Paired,
    /// `(I, y0)` and `(I, y1)`, ignoring `I_tilde`.
    Strict,
}

fn term(x: &ImageBuffer, y: &ImageBuffer) -> Result<f64> {
    Ok(l1(x, y)? + (1.0 - ssim(x, y)?))
}

/// Dual-target tone-map loss: L1 plus `1 - SSIM` against each target.
pub fn tonemap_loss(
    i: &ImageBuffer,
    i_tilde: &ImageBuffer,
    y0: &ImageBuffer,
    y1: &ImageBuffer,
    pairing: LossPairing,
) -> Result<f64> {
    i.ensure_same_shape(i_tilde, "tone-map outputs")?;
    i.ensure_same_shape(y0, "first target")?;
    i.ensure_same_shape(y1, "second target")?;
    let second = match pairing {
        LossPairing::Paired => i_tilde,
        LossPairing::Strict => i,
    };
    Ok(term(i, y0)? + term(second, y1)?)
}
