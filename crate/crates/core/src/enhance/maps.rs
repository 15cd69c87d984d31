use crate::image::{ColorSpace, ImageBuffer, Rect};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Allowed range of the luma contrast gain map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBounds {
    pub min: f32,
    pub max: f32,
}

impl Default for GainBounds {
    fn default() -> Self {
        GainBounds { min: 0.25, max: 4.0 }
    }
}

impl GainBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::InvalidArgument(format!(
                "gain bounds [{}, {}] are invalid",
                self.min, self.max
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn clamp(&self, g: f32) -> f32 {
        g.clamp(self.min, self.max)
    }
}

/// Luma weight `w_y`, chroma weights `w_c0`/`w_c1` and contrast gain `g`,
/// all single-channel planes of one size.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneMaps {
    pub w_y: ImageBuffer,
    pub w_c0: ImageBuffer,
    pub w_c1: ImageBuffer,
    pub g: ImageBuffer,
    pub bounds: GainBounds,
}

/// Selects one plane of a [`ToneMaps`] for visualization and transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    WY,
    WC0,
    WC1,
    G,
}

impl std::str::FromStr for MapKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w_y" => Ok(MapKind::WY),
            "w_c0" => Ok(MapKind::WC0),
            "w_c1" => Ok(MapKind::WC1),
            "g" => Ok(MapKind::G),
            other => Err(Error::UnknownCategory {
                field: "map kind".into(),
                value: other.into(),
            }),
        }
    }
}

impl ToneMaps {
    pub fn new(w_y: ImageBuffer, w_c0: ImageBuffer, w_c1: ImageBuffer, g: ImageBuffer, bounds: GainBounds) -> Result<Self> {
        bounds.validate()?;
        for (name, p) in [("w_y", &w_y), ("w_c0", &w_c0), ("w_c1", &w_c1), ("g", &g)] {
            if p.channels() != 1 {
                return Err(Error::InvalidInput(format!("{name} must be a single plane")));
            }
            p.ensure_same_size(&w_y, name)?;
        }
        for (name, p) in [("w_y", &w_y), ("w_c0", &w_c0), ("w_c1", &w_c1)] {
            if p.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidInput(format!("{name} has values outside [0, 1]")));
            }
        }
        if g.data().iter().any(|&v| v < bounds.min || v > bounds.max) {
            return Err(Error::InvalidInput(format!(
                "gain map leaves [{}, {}]",
                bounds.min, bounds.max
            )));
        }
        Ok(ToneMaps { w_y, w_c0, w_c1, g, bounds })
    }

    /// Constant maps: useful as a neutral starting point.
    pub fn uniform(w: usize, h: usize, w_y: f32, w_c0: f32, w_c1: f32, g: f32) -> Result<Self> {
        let p = |v| ImageBuffer::filled(w, h, 1, ColorSpace::LumaOnly, v);
        ToneMaps::new(p(w_y)?, p(w_c0)?, p(w_c1)?, p(g)?, GainBounds::default())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.w_y.dims()
    }

    pub fn plane(&self, kind: MapKind) -> &ImageBuffer {
        match kind {
            MapKind::WY => &self.w_y,
            MapKind::WC0 => &self.w_c0,
            MapKind::WC1 => &self.w_c1,
            MapKind::G => &self.g,
        }
    }

    pub fn crop(&self, rect: Rect) -> Result<ToneMaps> {
        Ok(ToneMaps {
            w_y: self.w_y.crop(rect)?,
            w_c0: self.w_c0.crop(rect)?,
            w_c1: self.w_c1.crop(rect)?,
            g: self.g.crop(rect)?,
            bounds: self.bounds,
        })
    }
}
