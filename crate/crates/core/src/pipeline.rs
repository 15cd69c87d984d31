//! Pipeline configuration and the end-to-end tone path.
//!
//! A configuration file is TOML with one optional table per stage:
//!
//! ```toml
//! [lite]
//! bright_p50_target = 0.75
//! [reference]
//! contrast_boost = [1.5, 1.3, 1.15]
//! [heuristic]
//! k_noise = 1.0
//! [fusion]
//! tau = 0.1
//! [metadata]
//! sensor_type = "main"
//! pipeline_type = "photo"
//! iso = 100.0
//! exposure_time = 0.01
//! [tiling]
//! overlap = 50
//! budget_mb = 256
//! ```

use crate::enhance::{
    fuse_tone, solve_oracle_maps, CaptureMetadata, GainBounds, HeuristicConfig, HeuristicModel, MetadataRegistry,
    ToneMaps, TuningProfile,
};
use crate::fusion::FuseParams;
use crate::image::{ImageBuffer, Rect};
use crate::lite::{tonemap_lite, ExposurePair, GlobalContext, LiteParams};
use crate::reference::{render_targets, ReferenceConfig};
use crate::tiling::{run_tiled, TilePlan, MIN_AUTO_OVERLAP};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TilingConfig {
    pub overlap: usize,
    pub budget_mb: usize,
}

impl Default for TilingConfig {
    fn default() -> Self {
        TilingConfig {
            overlap: MIN_AUTO_OVERLAP,
            budget_mb: 256,
        }
    }
}

impl TilingConfig {
    pub fn budget_bytes(&self) -> usize {
        self.budget_mb << 20
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub lite: LiteParams,
    pub reference: ReferenceConfig,
    pub heuristic: HeuristicConfig,
    pub fusion: FuseParams,
    pub metadata: CaptureMetadata,
    pub tiling: TilingConfig,
}

impl PipelineConfig {
    pub fn parse_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::format("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        self.lite.validate()?;
        self.reference.validate()?;
        self.heuristic.validate()?;
        self.fusion.exponents.validate()?;
        self.metadata.validate()
    }
}

/// Supplies maps for any region of a frame, consistent with the full-frame maps.
pub trait MapsProvider: Sync {
    /// `pair` is the Lite pair of `region`.
    fn maps(&self, pair: &ExposurePair, region: Rect) -> Result<ToneMaps>;
}

impl MapsProvider for HeuristicModel {
    fn maps(&self, pair: &ExposurePair, region: Rect) -> Result<ToneMaps> {
        HeuristicModel::maps(self, pair, region)
    }
}

/// Full-frame maps computed ahead of time (oracle solve or a `.tmaps` file).
#[derive(Debug, Clone, PartialEq)]
pub struct FixedMaps(pub ToneMaps);

impl MapsProvider for FixedMaps {
    fn maps(&self, pair: &ExposurePair, region: Rect) -> Result<ToneMaps> {
        let m = self.0.crop(region)?;
        if m.dims() != pair.dims() {
            return Err(Error::ShapeMismatch(format!(
                "maps crop {:?} vs exposures {:?}",
                m.dims(),
                pair.dims()
            )));
        }
        Ok(m)
    }
}

/// Which of the two fused renders a tiled run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToneOutput {
    /// `I`: fused without the contrast gain.
    Base,
    /// `I_tilde`: with the modulated contrast gain.
    #[default]
    Enhanced,
}

/// Heuristic map provider for `hdr`, keyed on the configured metadata.
pub fn heuristic_provider(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &PipelineConfig) -> Result<HeuristicModel> {
    let features = MetadataRegistry::default().encode(&cfg.metadata)?;
    HeuristicModel::from_hdr(hdr, ctx, &cfg.lite, &features, &cfg.heuristic)
}

/// Maps that reproduce the reference renders of `hdr` as closely as possible.
pub fn oracle_maps(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &PipelineConfig, bounds: GainBounds) -> Result<ToneMaps> {
    let pair = tonemap_lite(hdr, ctx, &cfg.lite)?;
    let (y0, y1) = render_targets(hdr, ctx, &cfg.reference)?;
    solve_oracle_maps(&pair, &y0, &y1, bounds)
}

/// `(I, I_tilde)` for one region of the frame.
pub fn render_region(
    hdr_region: &ImageBuffer,
    region: Rect,
    ctx: &GlobalContext,
    lite: &LiteParams,
    provider: &dyn MapsProvider,
    profile: &TuningProfile,
) -> Result<(ImageBuffer, ImageBuffer)> {
    let pair = tonemap_lite(hdr_region, ctx, lite)?;
    let maps = provider.maps(&pair, region)?;
    fuse_tone(&pair, &maps, &profile.crop(region)?)
}

/// Untiled tone path.
pub fn tonemap(
    hdr: &ImageBuffer,
    ctx: &GlobalContext,
    lite: &LiteParams,
    provider: &dyn MapsProvider,
    profile: &TuningProfile,
) -> Result<(ImageBuffer, ImageBuffer)> {
    render_region(hdr, Rect::full(hdr.width(), hdr.height()), ctx, lite, provider, profile)
}

/// Tiled tone path; each tile runs the whole chain on its outer rect.
pub fn tonemap_tiled(
    hdr: &ImageBuffer,
    plan: &TilePlan,
    ctx: &GlobalContext,
    lite: &LiteParams,
    provider: &dyn MapsProvider,
    profile: &TuningProfile,
    output: ToneOutput,
) -> Result<ImageBuffer> {
    run_tiled(hdr, plan, None, |tile, input| {
        let (i, t) = render_region(input, tile.outer, ctx, lite, provider, profile)?;
        Ok(match output {
            ToneOutput::Base => i,
            ToneOutput::Enhanced => t,
        })
    })
}
