//! Input loading and the map-provider and preview plumbing shared by the CLI
//! and the tuning service.

use drift_core::burst::demosaic_bilinear;
use drift_core::enhance::{read_tmaps, HeuristicModel, MapKind, ProfileSpec, ToneMaps};
use drift_core::image::{io, resize_bilinear, Rect};
use drift_core::lite::{tonemap_lite, ExposurePair, GlobalContext};
use drift_core::pipeline::{heuristic_provider, oracle_maps, FixedMaps, MapsProvider, PipelineConfig};
use drift_core::{ColorSpace, Error, ImageBuffer, Result};
use std::path::Path;

/// Interactive previews stay at or below this many pixels.
pub const PREVIEW_MAX_PIXELS: usize = 1_000_000;

/// Interprets raw image data as linear RGB: `.lfr` as stored, Bayer mosaics
/// demosaicked, 16-bit PNG samples taken as linear values.
pub fn as_linear_rgb(img: ImageBuffer) -> Result<ImageBuffer> {
    let img = match img.colorspace() {
        ColorSpace::BayerMosaic => demosaic_bilinear(&img)?,
        _ => img,
    };
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "expected an RGB or Bayer frame, got {} channel(s)",
            img.channels()
        )));
    }
    match img.colorspace() {
        ColorSpace::YCbCr => Err(Error::InvalidInput("expected RGB data, got YCbCr".into())),
        _ => img.with_colorspace(ColorSpace::LinearRgb),
    }
}

pub fn load_linear(path: &Path) -> Result<ImageBuffer> {
    as_linear_rgb(io::read_any(path)?)
}

pub fn decode_linear(bytes: &[u8]) -> Result<ImageBuffer> {
    let img = if bytes.starts_with(b"LFR1") {
        io::decode_lfr(bytes)?
    } else {
        io::decode_raster(bytes)?
    };
    as_linear_rgb(img)
}

/// Where the tone maps come from.
#[derive(Debug, Clone)]
pub enum Provider {
    Heuristic(HeuristicModel),
    /// Oracle solve or a `.tmaps` file, at full resolution.
    Fixed { name: &'static str, maps: FixedMaps },
}

impl Provider {
    pub fn heuristic(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &PipelineConfig) -> Result<Self> {
        Ok(Provider::Heuristic(heuristic_provider(hdr, ctx, cfg)?))
    }

    pub fn oracle(hdr: &ImageBuffer, ctx: &GlobalContext, cfg: &PipelineConfig) -> Result<Self> {
        let maps = oracle_maps(hdr, ctx, cfg, cfg.heuristic.gain_bounds)?;
        Ok(Provider::Fixed {
            name: "oracle",
            maps: FixedMaps(maps),
        })
    }

    pub fn from_maps(maps: ToneMaps, hdr: &ImageBuffer) -> Result<Self> {
        if maps.dims() != hdr.dims() {
            return Err(Error::ShapeMismatch(format!(
                "maps are {:?}, image is {:?}",
                maps.dims(),
                hdr.dims()
            )));
        }
        Ok(Provider::Fixed {
            name: "file",
            maps: FixedMaps(maps),
        })
    }

    pub fn from_tmaps_file(path: &Path, hdr: &ImageBuffer, cfg: &PipelineConfig) -> Result<Self> {
        Self::from_maps(read_tmaps(path, cfg.heuristic.gain_bounds)?, hdr)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Provider::Heuristic(_) => "heuristic",
            Provider::Fixed { name, .. } => name,
        }
    }

    pub fn as_dyn(&self) -> &dyn MapsProvider {
        match self {
            Provider::Heuristic(m) => m,
            Provider::Fixed { maps, .. } => maps,
        }
    }
}

/// Smallest integer divisor that brings the frame under `max_pixels`.
pub fn preview_scale(w: usize, h: usize, max_pixels: usize) -> usize {
    let mut s = 1;
    while w.div_ceil(s) * h.div_ceil(s) > max_pixels {
        s += 1;
    }
    s
}

/// Cached inputs of a preview render: everything except the profile.
#[derive(Debug, Clone)]
pub struct PreviewInputs {
    pub scale: usize,
    pub pair: ExposurePair,
    pub maps: ToneMaps,
}

impl PreviewInputs {
    pub fn dims(&self) -> (usize, usize) {
        self.pair.dims()
    }
}

fn resize_maps(maps: &ToneMaps, w: usize, h: usize) -> Result<ToneMaps> {
    let r = |p: &ImageBuffer| resize_bilinear(p, w, h);
    ToneMaps::new(r(&maps.w_y)?, r(&maps.w_c0)?, r(&maps.w_c1)?, r(&maps.g)?, maps.bounds)
}

/// Downscales `hdr` by `scale` and derives the Lite pair and maps at that
/// size, using the full-frame context.
pub fn preview_inputs(
    hdr: &ImageBuffer,
    ctx: &GlobalContext,
    cfg: &PipelineConfig,
    provider: &Provider,
    scale: usize,
) -> Result<PreviewInputs> {
    let (w, h) = hdr.dims();
    let (pw, ph) = (w.div_ceil(scale), h.div_ceil(scale));
    let small = if scale == 1 { hdr.clone() } else { resize_bilinear(hdr, pw, ph)? };
    let pair = tonemap_lite(&small, ctx, &cfg.lite)?;
    let maps = match provider {
        Provider::Heuristic(_) => {
            let model = heuristic_provider(&small, ctx, cfg)?;
            model.maps(&pair, Rect::full(pw, ph))?
        }
        Provider::Fixed { maps, .. } if scale == 1 => maps.0.clone(),
        Provider::Fixed { maps, .. } => resize_maps(&maps.0, pw, ph)?,
    };
    Ok(PreviewInputs { scale, pair, maps })
}

/// Loads an optional profile file; relative strength maps resolve next to it.
pub fn load_profile_spec(path: Option<&Path>) -> Result<ProfileSpec> {
    match path {
        Some(p) => {
            let mut spec = ProfileSpec::load(p)?;
            if let (Some(m), Some(dir)) = (&spec.strength_map, p.parent()) {
                if m.is_relative() {
                    spec.strength_map = Some(dir.join(m));
                }
            }
            Ok(spec)
        }
        None => Ok(ProfileSpec::default()),
    }
}

/// Grayscale rendering of one map plane. Weights display as is; the gain is
/// shown on a log scale over its bounds, so `G = 1` is mid-gray for
/// symmetric bounds.
pub fn visualize_map(maps: &ToneMaps, kind: MapKind) -> ImageBuffer {
    let plane = maps.plane(kind);
    match kind {
        MapKind::G => {
            let (lo, hi) = ((maps.bounds.min as f64).ln(), (maps.bounds.max as f64).ln());
            let span = (hi - lo).max(f64::EPSILON);
            plane.map(|g| (((g as f64).ln() - lo) / span).clamp(0.0, 1.0) as f32)
        }
        _ => plane.clone(),
    }
}
