//! Capture metadata and its fixed-layout feature encoding.
//!
//! Layout of [`MetadataRegistry::encode`]:
//!
//! ```text
//! [ one-hot sensor type (|sensors|) | one-hot pipeline type (|pipelines|) | iso_n | exp_n ]
//! iso_n = clamp(log2(iso / 50) / 6, 0, 1)
//! exp_n = clamp((log2(exposure_time) + 10) / 10, 0, 1)
//! ```

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const ISO_BASE: f64 = 50.0;
pub const ISO_SPAN_STOPS: f64 = 6.0;
pub const EXPOSURE_MIN_LOG2: f64 = -10.0;
pub const EXPOSURE_SPAN_STOPS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureMetadata {
    pub sensor_type: String,
    pub pipeline_type: String,
    pub iso: f64,
    /// Seconds.
    pub exposure_time: f64,
}

impl Default for CaptureMetadata {
    fn default() -> Self {
        CaptureMetadata {
            sensor_type: "main".into(),
            pipeline_type: "photo".into(),
            iso: ISO_BASE,
            exposure_time: 1.0 / 60.0,
        }
    }
}

impl CaptureMetadata {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("iso", self.iso), ("exposure_time", self.exposure_time)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

pub fn normalize_iso(iso: f64) -> f64 {
    ((iso / ISO_BASE).log2() / ISO_SPAN_STOPS).clamp(0.0, 1.0)
}

pub fn normalize_exposure(t: f64) -> f64 {
    ((t.log2() - EXPOSURE_MIN_LOG2) / EXPOSURE_SPAN_STOPS).clamp(0.0, 1.0)
}

/// The closed category sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRegistry {
    pub sensors: Vec<String>,
    pub pipelines: Vec<String>,
}

impl Default for MetadataRegistry {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        MetadataRegistry {
            sensors: s(&["main", "ultrawide", "tele"]),
            pipelines: s(&["photo", "night", "portrait", "video"]),
        }
    }
}

/// Encoded metadata. `iso_n` and `exp_n` are kept alongside the raw vector
/// since map providers key on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataFeatures {
    pub vector: Vec<f64>,
    pub iso_n: f64,
    pub exp_n: f64,
}

impl MetadataRegistry {
    pub fn feature_len(&self) -> usize {
        self.sensors.len() + self.pipelines.len() + 2
    }

    pub fn encode(&self, meta: &CaptureMetadata) -> Result<MetadataFeatures> {
        meta.validate()?;
        let idx = |set: &[String], field: &str, v: &str| {
            set.iter().position(|s| s == v).ok_or_else(|| Error::UnknownCategory {
                field: field.into(),
                value: v.into(),
            })
        };
        let si = idx(&self.sensors, "sensor_type", &meta.sensor_type)?;
        let pi = idx(&self.pipelines, "pipeline_type", &meta.pipeline_type)?;
        let mut vector = vec![0.0; self.feature_len()];
        vector[si] = 1.0;
        vector[self.sensors.len() + pi] = 1.0;
        let (iso_n, exp_n) = (normalize_iso(meta.iso), normalize_exposure(meta.exposure_time));
        let n = vector.len();
        vector[n - 2] = iso_n;
        vector[n - 1] = exp_n;
        Ok(MetadataFeatures { vector, iso_n, exp_n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_layout() {
        let reg = MetadataRegistry::default();
        let f = reg.encode(&CaptureMetadata::default()).unwrap();
        assert_eq!(&f.vector[..3], &[1.0, 0.0, 0.0]);
        assert_eq!(&f.vector[3..7], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.vector.len(), reg.feature_len());
        assert_eq!(f.iso_n, 0.0);
    }

    #[test]
    fn scalar_normalization() {
        assert_eq!(normalize_iso(50.0), 0.0);
        assert!((normalize_iso(400.0) - 0.5).abs() < 1e-12);
        assert_eq!(normalize_iso(1e6), 1.0);
        assert_eq!(normalize_exposure(1.0), 1.0);
        assert!((normalize_exposure(2f64.powi(-5)) - 0.5).abs() < 1e-12);
        assert_eq!(normalize_exposure(1e-9), 0.0);
    }

    #[test]
    fn unknown_categories_and_bad_scalars_fail() {
        let reg = MetadataRegistry::default();
        let meta = CaptureMetadata {
            sensor_type: "tele9".into(),
            ..Default::default()
        };
        assert!(matches!(reg.encode(&meta), Err(Error::UnknownCategory { .. })));
        let meta = CaptureMetadata {
            iso: f64::NAN,
            ..Default::default()
        };
        assert!(reg.encode(&meta).is_err());
    }
}
