//! Inference-time tuning knobs and their file representation.
//!
//! ```toml
//! lut_weight = [[0.0, 0.0], [0.5, 0.6], [1.0, 1.0]]
//! lut_exp0 = [[0.0, 0.0], [1.0, 1.0]]
//! strength = 0.8            # or: strength_map = "mask.png"
//! ```
//!
//! Absent fields mean identity LUTs and the default strength.

use crate::image::{io, luma_of, ImageBuffer, Lut1D, Rect};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_STRENGTH: f32 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Strength {
    Scalar(f32),
    Map(ImageBuffer),
}

impl Strength {
    pub fn validate(&self) -> Result<()> {
        match self {
            Strength::Scalar(s) if (0.0..=1.0).contains(s) => Ok(()),
            Strength::Scalar(s) => Err(Error::InvalidArgument(format!(
                "strength must lie in [0, 1], got {s}"
            ))),
            Strength::Map(m) => {
                if m.channels() != 1 || m.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidArgument(
                        "strength map must be a single plane in [0, 1]".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn at(&self, i: usize) -> f32 {
        match self {
            Strength::Scalar(s) => *s,
            Strength::Map(m) => m.data()[i],
        }
    }

    pub fn crop(&self, rect: Rect) -> Result<Strength> {
        Ok(match self {
            Strength::Scalar(s) => Strength::Scalar(*s),
            Strength::Map(m) => Strength::Map(m.crop(rect)?),
        })
    }
}

/// `G_phi` on the luma weight, `H_theta0`/`H_theta1` on the two exposures,
/// and the gain strength `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningProfile {
    pub lut_weight: Lut1D,
    pub lut_exp0: Lut1D,
    pub lut_exp1: Lut1D,
    pub strength: Strength,
}

impl Default for TuningProfile {
    fn default() -> Self {
        TuningProfile {
            lut_weight: Lut1D::identity(),
            lut_exp0: Lut1D::identity(),
            lut_exp1: Lut1D::identity(),
            strength: Strength::Scalar(DEFAULT_STRENGTH),
        }
    }
}

impl TuningProfile {
    pub fn with_strength(s: f32) -> Self {
        TuningProfile {
            strength: Strength::Scalar(s),
            ..Default::default()
        }
    }

    pub fn crop(&self, rect: Rect) -> Result<TuningProfile> {
        Ok(TuningProfile {
            strength: self.strength.crop(rect)?,
            ..self.clone()
        })
    }
}

/// Serializable (and patchable) form of a [`TuningProfile`]. Every field is
/// optional; merging a patch replaces exactly the fields it sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lut_weight: Option<Lut1D>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lut_exp0: Option<Lut1D>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lut_exp1: Option<Lut1D>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength_map: Option<PathBuf>,
}

impl ProfileSpec {
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format("profile", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile specs always serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_toml(&text)
    }

    /// `self` with every field present in `patch` replaced. Setting a scalar
    /// strength drops a strength map and vice versa.
    pub fn merged(&self, patch: &ProfileSpec) -> ProfileSpec {
        let mut out = self.clone();
        if patch.lut_weight.is_some() {
            out.lut_weight = patch.lut_weight.clone();
        }
        if patch.lut_exp0.is_some() {
            out.lut_exp0 = patch.lut_exp0.clone();
        }
        if patch.lut_exp1.is_some() {
            out.lut_exp1 = patch.lut_exp1.clone();
        }
        if let Some(s) = patch.strength {
            out.strength = Some(s);
            out.strength_map = None;
        }
        if let Some(m) = &patch.strength_map {
            out.strength_map = Some(m.clone());
            out.strength = None;
        }
        out
    }

    /// Resolves into a profile. Relative strength-map paths are taken from
    /// `base_dir`; map images are reduced to luma and resized to `dims`.
    pub fn resolve(&self, base_dir: Option<&Path>, dims: Option<(usize, usize)>) -> Result<TuningProfile> {
        let strength = match (&self.strength_map, self.strength) {
            (Some(p), _) => {
                let path = match base_dir {
                    Some(d) if p.is_relative() => d.join(p),
                    _ => p.clone(),
                };
                let img = io::read_any(&path)?;
                Strength::Map(prepare_map(&img, dims)?)
            }
            (None, Some(s)) => Strength::Scalar(s),
            (None, None) => Strength::Scalar(DEFAULT_STRENGTH),
        };
        strength.validate()?;
        Ok(TuningProfile {
            lut_weight: self.lut_weight.clone().unwrap_or_else(Lut1D::identity),
            lut_exp0: self.lut_exp0.clone().unwrap_or_else(Lut1D::identity),
            lut_exp1: self.lut_exp1.clone().unwrap_or_else(Lut1D::identity),
            strength,
        })
    }
}

fn prepare_map(img: &ImageBuffer, dims: Option<(usize, usize)>) -> Result<ImageBuffer> {
    let plane = luma_of(img).clamp01();
    match dims {
        Some((w, h)) if plane.dims() != (w, h) => crate::image::resize_bilinear(&plane, w, h),
        _ => Ok(plane),
    }
}
