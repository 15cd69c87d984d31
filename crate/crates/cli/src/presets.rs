//! Named tuning presets stored as one TOML file per preset.

use chrono::{DateTime, Utc};
use drift_core::enhance::{CaptureMetadata, ProfileSpec};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum PresetError {
    #[error("invalid preset name {0:?}: use letters, digits, '-' and '_'")]
    InvalidName(String),
    #[error("preset {0:?} already exists (use --force to overwrite)")]
    Exists(String),
    #[error("preset {0:?} not found")]
    NotFound(String),
    #[error("preset {name:?} is malformed: {message}")]
    Malformed { name: String, message: String },
    #[error("{path}: {cause}")]
    Io { path: PathBuf, cause: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata_overrides: Option<CaptureMetadata>,
}

impl Preset {
    pub fn new(name: impl Into<String>, profile: ProfileSpec) -> Self {
        Preset {
            name: name.into(),
            created_at: Utc::now(),
            profile,
            metadata_overrides: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("presets always serialize")
    }

    pub fn parse_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

pub fn validate_name(name: &str) -> Result<(), PresetError> {
    let ok = !name.is_empty()
        && name.len() <= 64
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(PresetError::InvalidName(name.into()))
    }
}

/// A directory of `<name>.toml` files.
#[derive(Debug, Clone)]
pub struct PresetStore {
    dir: PathBuf,
}

impl PresetStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PresetStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.toml"))
    }

    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PresetError + '_ {
        move |cause| PresetError::Io {
            path: path.to_path_buf(),
            cause,
        }
    }

    pub fn save(&self, preset: &Preset, force: bool) -> Result<(), PresetError> {
        validate_name(&preset.name)?;
        std::fs::create_dir_all(&self.dir).map_err(Self::io(&self.dir))?;
        let path = self.path(&preset.name);
        let mut opts = std::fs::OpenOptions::new();
        opts.write(true);
        if force {
            opts.create(true).truncate(true);
        } else {
            opts.create_new(true);
        }
        let mut file = opts.open(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::AlreadyExists => PresetError::Exists(preset.name.clone()),
            _ => PresetError::Io { path: path.clone(), cause: e },
        })?;
        file.write_all(preset.to_toml().as_bytes()).map_err(Self::io(&path))
    }

    pub fn load(&self, name: &str) -> Result<Preset, PresetError> {
        validate_name(name)?;
        let path = self.path(name);
        let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => PresetError::NotFound(name.into()),
            _ => PresetError::Io { path: path.clone(), cause: e },
        })?;
        Preset::parse_toml(&text).map_err(|e| PresetError::Malformed {
            name: name.into(),
            message: e.to_string(),
        })
    }

    /// Preset names in lexical order; a missing directory is an empty store.
    pub fn list(&self) -> Result<Vec<String>, PresetError> {
        let entries = match std::fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Self::io(&self.dir)(e)),
        };
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let p = e.path();
                (p.extension()? == "toml")
                    .then(|| p.file_stem()?.to_str().map(String::from))
                    .flatten()
            })
            .filter(|n| validate_name(n).is_ok())
            .collect();
        names.sort();
        Ok(names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use drift_core::Lut1D;

    fn sample() -> Preset {
        let pts: Vec<(f32, f32)> = (0..17).map(|i| (i as f32 / 16.0, (i as f32 / 16.0).sqrt())).collect();
        Preset {
            metadata_overrides: Some(CaptureMetadata {
                iso: 800.0,
                ..Default::default()
            }),
            ..Preset::new(
                "night-soft",
                ProfileSpec {
                    lut_exp1: Some(Lut1D::new(pts).unwrap()),
                    strength: Some(0.4),
                    ..Default::default()
                },
            )
        }
    }

    #[test]
    fn save_load_round_trip_and_collisions() {
        let dir = tempfile::tempdir().unwrap();
        let store = PresetStore::new(dir.path());
        let p = sample();
        store.save(&p, false).unwrap();
        let back = store.load("night-soft").unwrap();
        assert_eq!(back, p);
        assert_eq!(back.profile.lut_exp1.unwrap().points().len(), 17);
        assert!(matches!(store.save(&p, false), Err(PresetError::Exists(_))));
        store.save(&p, true).unwrap();
        assert_eq!(store.list().unwrap(), vec!["night-soft".to_string()]);
        assert!(matches!(store.load("x"), Err(PresetError::NotFound(_))));
    }

    #[test]
    fn names_cannot_escape_the_store() {
        assert!(validate_name("../etc").is_err());
        assert!(validate_name("").is_err());
        assert!(validate_name("ok_name-2").is_ok());
    }
}
