//! Layered feature extractors for the perceptual loss.
//!
//! `.fxw` weight files (little-endian):
//!
//! ```text
//! b"FXW1" | stage count u32
//! per stage: out_ch u32 | in_ch u32 | kernel u32 | stride u32 | f32 weights [out][in][ky][kx]
//! ```
//!
//! Stages are bias-free convolutions with replicated borders. Stage `i > 0`
//! reads the leaky-ReLU activation of stage `i - 1`; the features returned
//! are the pre-activation outputs.

use crate::image::{Band, ImageBuffer};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;

pub const LEAKY_SLOPE: f64 = 0.2;
const MAGIC: &[u8; 4] = b"FXW1";

pub trait FeatureExtractor: Send + Sync {
    fn n_stages(&self) -> usize;
    /// Pre-activation features of every stage, in order.
    fn features(&self, img: &Band) -> Result<Vec<Band>>;
}

/// One stage that returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityExtractor;

impl FeatureExtractor for IdentityExtractor {
    fn n_stages(&self) -> usize {
        1
    }

    fn features(&self, img: &Band) -> Result<Vec<Band>> {
        Ok(vec![img.clone()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvStage {
    pub out_ch: usize,
    pub in_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub weights: Vec<f32>,
}

impl ConvStage {
    fn validate(&self) -> Result<()> {
        if self.out_ch == 0 || self.in_ch == 0 || self.stride == 0 || self.kernel % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "conv stage {}x{}x{} stride {} is invalid",
                self.out_ch, self.in_ch, self.kernel, self.stride
            )));
        }
        let n = self.out_ch * self.in_ch * self.kernel * self.kernel;
        if self.weights.len() != n {
            return Err(Error::InvalidArgument(format!(
                "conv stage expects {n} weights, has {}",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("conv weights".into()));
        }
        Ok(())
    }

    fn apply(&self, x: &Band) -> Result<Band> {
        if x.channels != self.in_ch {
            return Err(Error::ShapeMismatch(format!(
                "stage expects {} channels, got {}",
                self.in_ch, x.channels
            )));
        }
        let (w, h) = (x.width, x.height);
        let (ow, oh) = (w.div_ceil(self.stride), h.div_ceil(self.stride));
        let k = self.kernel;
        let r = (k / 2) as isize;
        let mut out = Band::zeros(ow, oh, self.out_ch);
        let clampx = |v: isize| v.clamp(0, w as isize - 1) as usize;
        let clampy = |v: isize| v.clamp(0, h as isize - 1) as usize;
        for o in 0..self.out_ch {
            let dst = out.channel_mut(o);
            for i in 0..self.in_ch {
                let src = x.channel(i);
                let wbase = (o * self.in_ch + i) * k * k;
                for oy in 0..oh {
                    let cy = (oy * self.stride) as isize;
                    for ox in 0..ow {
                        let cx = (ox * self.stride) as isize;
                        let mut acc = 0.0;
                        for ky in 0..k {
                            let row = clampy(cy + ky as isize - r) * w;
                            for kx in 0..k {
                                let sx = clampx(cx + kx as isize - r);
                                acc += self.weights[wbase + ky * k + kx] as f64 * src[row + sx];
                            }
                        }
                        dst[oy * ow + ox] += acc;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Fixed stack of convolution stages, standing in for a trained discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvExtractor {
    stages: Vec<ConvStage>,
}

impl ConvExtractor {
    pub fn new(stages: Vec<ConvStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("extractor needs at least one stage".into()));
        }
        for (i, s) in stages.iter().enumerate() {
            s.validate()?;
            if i > 0 && s.in_ch != stages[i - 1].out_ch {
                return Err(Error::InvalidArgument(format!(
                    "stage {i} reads {} channels but stage {} writes {}",
                    s.in_ch,
                    i - 1,
                    stages[i - 1].out_ch
                )));
            }
        }
        Ok(ConvExtractor { stages })
    }

    /// He-style normal weights from a ChaCha8 stream. `layout` lists
    /// `(out_ch, kernel, stride)` per stage.
    pub fn seeded(seed: u64, in_ch: usize, layout: &[(usize, usize, usize)]) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stages = Vec::with_capacity(layout.len());
        let mut c = in_ch;
        for &(out_ch, kernel, stride) in layout {
            let fan_in = (c * kernel * kernel) as f64;
            let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
            let weights = (0..out_ch * c * kernel * kernel)
                .map(|_| normal.sample(&mut rng) as f32)
                .collect();
            stages.push(ConvStage { out_ch, in_ch: c, kernel, stride, weights });
            c = out_ch;
        }
        ConvExtractor::new(stages)
    }

    /// The default three-stage RGB extractor.
    pub fn standard() -> Self {
        ConvExtractor::seeded(0x5EED, 3, &[(8, 3, 1), (16, 3, 2), (32, 3, 2)]).expect("valid layout")
    }

    pub fn stages(&self) -> &[ConvStage] {
        &self.stages
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.stages.len() as u32).to_le_bytes());
        for s in &self.stages {
            for v in [s.out_ch, s.in_ch, s.kernel, s.stride] {
                out.extend_from_slice(&(v as u32).to_le_bytes());
            }
            for w in &s.weights {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::format("fxw", m.to_string());
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(bad("missing FXW1 header"));
        }
        let mut pos = 4;
        let word = |pos: &mut usize| -> Result<usize> {
            let b = bytes.get(*pos..*pos + 4).ok_or_else(|| bad("truncated"))?;
            *pos += 4;
            Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
        };
        let n = word(&mut pos)?;
        let mut stages = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            let (out_ch, in_ch, kernel, stride) = (word(&mut pos)?, word(&mut pos)?, word(&mut pos)?, word(&mut pos)?);
            let count = out_ch
                .checked_mul(in_ch)
                .and_then(|v| v.checked_mul(kernel * kernel))
                .ok_or_else(|| bad("dimensions overflow"))?;
            let body = bytes.get(pos..pos + 4 * count).ok_or_else(|| bad("truncated weights"))?;
            pos += 4 * count;
            let weights = body.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
            stages.push(ConvStage { out_ch, in_ch, kernel, stride, weights });
        }
        if pos != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        ConvExtractor::new(stages)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        ConvExtractor::decode(&bytes)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }
}

fn leaky(b: &Band) -> Band {
    Band {
        data: b.data.iter().map(|&v| if v >= 0.0 { v } else { LEAKY_SLOPE * v }).collect(),
        ..b.clone()
    }
}

impl FeatureExtractor for ConvExtractor {
    fn n_stages(&self) -> usize {
        self.stages.len()
    }

    fn features(&self, img: &Band) -> Result<Vec<Band>> {
        let mut out: Vec<Band> = Vec::with_capacity(self.stages.len());
        for (i, s) in self.stages.iter().enumerate() {
            let pre = if i == 0 { s.apply(img)? } else { s.apply(&leaky(&out[i - 1]))? };
            out.push(pre);
        }
        Ok(out)
    }
}

/// Convenience for image inputs.
pub(crate) fn image_features(fx: &dyn FeatureExtractor, img: &ImageBuffer) -> Result<Vec<Band>> {
    fx.features(&Band::from_image(img))
}
