//! Handshake homography pools.
//!
//! Text format, one record per group:
//!
//! ```text
//! group <id>
//! h00 h01 h02 h10 h11 h12 h20 h21 h22     (x10, row-major)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use super::Homography;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::path::Path;

/// Warps per group: one for each non-reference frame of an 11-frame burst.
pub const GROUP_LEN: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct HandshakeGroup {
    pub id: String,
    pub warps: Vec<Homography>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HandshakePool {
    groups: Vec<HandshakeGroup>,
}

impl HandshakePool {
    pub fn new(groups: Vec<HandshakeGroup>) -> Result<Self> {
        for g in &groups {
            if g.warps.len() != GROUP_LEN {
                return Err(Error::InvalidInput(format!(
                    "group {} has {} homographies, expected {GROUP_LEN}",
                    g.id,
                    g.warps.len()
                )));
            }
        }
        Ok(HandshakePool { groups })
    }

    pub fn groups(&self) -> &[HandshakeGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::format("pool", format!("line {line}: {msg}"));
        let mut groups = Vec::new();
        let mut current: Option<HandshakeGroup> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(id) = line.strip_prefix("group") {
                if let Some(g) = current.take() {
                    groups.push(g);
                }
                let id = id.trim();
                if id.is_empty() {
                    return Err(bad(i + 1, "group without id".into()));
                }
                current = Some(HandshakeGroup {
                    id: id.to_string(),
                    warps: Vec::with_capacity(GROUP_LEN),
                });
                continue;
            }
            let g = current
                .as_mut()
                .ok_or_else(|| bad(i + 1, "matrix before any group header".into()))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(i + 1, e.to_string()))?;
            if vals.len() != 9 {
                return Err(bad(i + 1, format!("expected 9 values, got {}", vals.len())));
            }
            let m = [
                [vals[0], vals[1], vals[2]],
                [vals[3], vals[4], vals[5]],
                [vals[6], vals[7], vals[8]],
            ];
            g.warps
                .push(Homography::new(m).map_err(|e| bad(i + 1, e.to_string()))?);
        }
        if let Some(g) = current {
            groups.push(g);
        }
        HandshakePool::new(groups)
    }

    /// Serializes with shortest round-trip float formatting, so
    /// `parse(to_text())` reproduces every matrix bit-exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            writeln!(out, "group {}", g.id).unwrap();
            for h in &g.warps {
                let row: Vec<String> = h.matrix().iter().flatten().map(|v| v.to_string()).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Draws one whole group uniformly at random; deterministic for a seed.
pub fn sample_handshake_group(pool: &HandshakePool, seed: u64) -> Result<Vec<Homography>> {
    if pool.is_empty() {
        return Err(Error::InvalidInput("handshake pool is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = rng.random_range(0..pool.len());
    Ok(pool.groups[i].warps.clone())
}

/// Limits for the synthetic handshake generator.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticShake {
    pub max_shift_px: f64,
    pub max_rotation_deg: f64,
    /// Velocity persistence in `[0, 1)`; higher is smoother.
    pub smoothness: f64,
}

impl Default for SyntheticShake {
    fn default() -> Self {
        SyntheticShake {
            max_shift_px: 8.0,
            max_rotation_deg: 0.5,
            smoothness: 0.7,
        }
    }
}

/// Temporally correlated random-walk handshake about the frame center.
pub fn synthetic_pool(
    n_groups: usize,
    width: usize,
    height: usize,
    shake: SyntheticShake,
    seed: u64,
) -> HandshakePool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let max_rot = shake.max_rotation_deg.to_radians();
    let groups = (0..n_groups)
        .map(|gi| {
            let mut pos = [0.0f64; 3];
            let mut vel = [0.0f64; 3];
            let limits = [shake.max_shift_px, shake.max_shift_px, max_rot];
            let warps = (0..GROUP_LEN)
                .map(|_| {
                    for k in 0..3 {
                        let kick: f64 = rng.sample(StandardNormal);
                        vel[k] = shake.smoothness * vel[k] + 0.25 * limits[k] * kick;
                        pos[k] = (pos[k] + vel[k]).clamp(-limits[k], limits[k]);
                    }
                    Homography::similarity(pos[2], 1.0, pos[0], pos[1], cx, cy)
                        .expect("rigid motion is invertible")
                })
                .collect();
            HandshakeGroup {
                id: format!("synthetic-{gi}"),
                warps,
            }
        })
        .collect();
    HandshakePool { groups }
}
