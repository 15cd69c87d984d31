//! Tuning session state: the loaded frame, its cached exposures and maps,
//! and the mutable profile.

use super::error::ApiError;
use crate::render::{preview_inputs, preview_scale, visualize_map, PreviewInputs, Provider, PREVIEW_MAX_PIXELS};
use drift_core::enhance::{fuse_tone, MapKind, ProfileSpec, ToneMaps, TuningProfile};
use drift_core::image::io::encode_png8;
use drift_core::lite::{compute_global_context, GlobalContext};
use drift_core::pipeline::{tonemap_tiled, PipelineConfig, ToneOutput};
use drift_core::tiling::{plan_tiles, GridSpec};
use drift_core::{ImageBuffer, Lut1D};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

/// How a new session obtains its maps.
#[derive(Debug, Clone)]
pub enum MapsChoice {
    Heuristic,
    Oracle,
    Supplied(ToneMaps),
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub preview_width: usize,
    pub preview_height: usize,
    pub preview_scale: usize,
    pub provider: &'static str,
    pub version: u64,
    pub profile: ProfileSpec,
}

pub struct Session {
    id: String,
    hdr: Arc<ImageBuffer>,
    ctx: GlobalContext,
    cfg: PipelineConfig,
    provider: Arc<Provider>,
    preview: PreviewInputs,
    spec: ProfileSpec,
    profile: TuningProfile,
    version: u64,
    rendered: Option<Arc<Vec<u8>>>,
}

/// Parses a JSON profile patch field by field so errors can name the field.
pub fn parse_patch(value: &serde_json::Value) -> Result<ProfileSpec, ApiError> {
    let obj = value
        .as_object()
        .ok_or_else(|| ApiError::bad_request("profile patch must be a JSON object"))?;
    let mut spec = ProfileSpec::default();
    for (key, v) in obj {
        if v.is_null() {
            continue;
        }
        let lut = |v: &serde_json::Value| {
            serde_json::from_value::<Lut1D>(v.clone()).map_err(|e| ApiError::validation(key, e.to_string()))
        };
        match key.as_str() {
            "lut_weight" => spec.lut_weight = Some(lut(v)?),
            "lut_exp0" => spec.lut_exp0 = Some(lut(v)?),
            "lut_exp1" => spec.lut_exp1 = Some(lut(v)?),
            "strength" => {
                let s = v
                    .as_f64()
                    .filter(|s| (0.0..=1.0).contains(s))
                    .ok_or_else(|| ApiError::validation(key, format!("strength must be a number in [0, 1], got {v}")))?;
                spec.strength = Some(s as f32);
            }
            "strength_map" => {
                let p = v
                    .as_str()
                    .ok_or_else(|| ApiError::validation(key, "strength_map must be a path string"))?;
                spec.strength_map = Some(PathBuf::from(p));
            }
            other => {
                return Err(ApiError::new(
                    axum::http::StatusCode::UNPROCESSABLE_ENTITY,
                    "unknown_field",
                    format!("unknown profile field {other:?}"),
                )
                .with_field(other))
            }
        }
    }
    Ok(spec)
}

impl Session {
    pub fn create(id: String, hdr: ImageBuffer, cfg: PipelineConfig, maps: MapsChoice) -> Result<Self, ApiError> {
        let ctx = compute_global_context(&hdr)?;
        let provider = match maps {
            MapsChoice::Heuristic => Provider::heuristic(&hdr, &ctx, &cfg)?,
            MapsChoice::Oracle => Provider::oracle(&hdr, &ctx, &cfg)?,
            MapsChoice::Supplied(m) => Provider::from_maps(m, &hdr)?,
        };
        let (w, h) = hdr.dims();
        let preview = preview_inputs(&hdr, &ctx, &cfg, &provider, preview_scale(w, h, PREVIEW_MAX_PIXELS))?;
        let spec = ProfileSpec::default();
        let profile = spec.resolve(None, Some(preview.dims()))?;
        Ok(Session {
            id,
            hdr: Arc::new(hdr),
            ctx,
            cfg,
            provider: Arc::new(provider),
            preview,
            spec,
            profile,
            version: 0,
            rendered: None,
        })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn info(&self) -> SessionInfo {
        let (w, h) = self.hdr.dims();
        let (pw, ph) = self.preview.dims();
        SessionInfo {
            id: self.id.clone(),
            width: w,
            height: h,
            preview_width: pw,
            preview_height: ph,
            preview_scale: self.preview.scale,
            provider: self.provider.name(),
            version: self.version,
            profile: self.spec.clone(),
        }
    }

    /// Applies `patch` over the current profile. Nothing changes on error.
    pub fn apply_patch(&mut self, patch: &ProfileSpec) -> Result<u64, ApiError> {
        let merged = self.spec.merged(patch);
        let profile = merged.resolve(None, Some(self.preview.dims())).map_err(|e| {
            let field = if merged.strength_map.is_some() { "strength_map" } else { "strength" };
            ApiError::validation(field, e.to_string())
        })?;
        if profile != self.profile {
            self.rendered = None;
        }
        self.spec = merged;
        self.profile = profile;
        self.version += 1;
        Ok(self.version)
    }

    /// `(I, I_tilde)` at preview size for the current profile.
    pub fn preview_images(&self) -> Result<(ImageBuffer, ImageBuffer), ApiError> {
        Ok(fuse_tone(&self.preview.pair, &self.preview.maps, &self.profile)?)
    }

    /// PNG of the enhanced preview and the version it reflects.
    pub fn preview_png(&mut self) -> Result<(u64, Arc<Vec<u8>>), ApiError> {
        if let Some(png) = &self.rendered {
            return Ok((self.version, png.clone()));
        }
        let (_, enhanced) = self.preview_images()?;
        let png = Arc::new(encode_png8(&enhanced)?);
        self.rendered = Some(png.clone());
        Ok((self.version, png))
    }

    pub fn maps_png(&self, kind: MapKind) -> Result<Vec<u8>, ApiError> {
        Ok(encode_png8(&visualize_map(&self.preview.maps, kind))?)
    }

    pub fn export(&self, req: &ExportRequest) -> Result<ExportJob, ApiError> {
        let grid = match req.tiles.as_deref() {
            Some(t) => Some(t.parse::<GridSpec>().map_err(|e| ApiError::validation("tiles", e.to_string()))?),
            None => None,
        };
        Ok(ExportJob {
            hdr: self.hdr.clone(),
            ctx: self.ctx.clone(),
            cfg: self.cfg.clone(),
            provider: self.provider.clone(),
            spec: self.spec.clone(),
            version: self.version,
            output: req.output.unwrap_or_default(),
            grid,
            overlap: req.overlap,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRequest {
    #[serde(default)]
    pub output: Option<ToneOutput>,
    /// `RxC` or `auto`; untiled when absent.
    #[serde(default)]
    pub tiles: Option<String>,
    #[serde(default)]
    pub overlap: Option<usize>,
}

/// Snapshot of a session for a full-resolution render.
pub struct ExportJob {
    hdr: Arc<ImageBuffer>,
    ctx: GlobalContext,
    cfg: PipelineConfig,
    provider: Arc<Provider>,
    spec: ProfileSpec,
    pub version: u64,
    output: ToneOutput,
    grid: Option<GridSpec>,
    overlap: Option<usize>,
}

impl ExportJob {
    pub fn render(&self) -> drift_core::Result<ImageBuffer> {
        let (w, h) = self.hdr.dims();
        let profile = self.spec.resolve(None, Some((w, h)))?;
        let overlap = self.overlap.unwrap_or(self.cfg.tiling.overlap);
        let plan = match self.grid {
            Some(g) => g.plan(w, h, overlap, self.cfg.tiling.budget_bytes())?,
            None => plan_tiles(w, h, 1, 1, 0)?,
        };
        tonemap_tiled(&self.hdr, &plan, &self.ctx, &self.cfg.lite, self.provider.as_dyn(), &profile, self.output)
    }

    pub fn run(&self) -> drift_core::Result<Vec<u8>> {
        encode_png8(&self.render()?)
    }
}
