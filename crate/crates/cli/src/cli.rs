//! Command-line definitions and the per-subcommand drivers.

use crate::presets::{Preset, PresetStore};
use crate::render::{load_linear, load_profile_spec, Provider};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use drift_core::burst::{sample_handshake_group, synthesize_burst, synthetic_pool, BurstSpec, HandshakePool, Homography, SyntheticShake, GROUP_LEN};
use drift_core::enhance::{encode_tmaps, CaptureMetadata, MapKind};
use drift_core::fusion::{as_linear, estimate_alignment, fuse_hdr, ExposureFrame};
use drift_core::image::io;
use drift_core::lite::compute_global_context;
use drift_core::metrics::{apl, l1, psnr, ssim, ConvExtractor, FeatureExtractor};
use drift_core::pipeline::{tonemap_tiled, PipelineConfig, ToneOutput};
use drift_core::reference::render_targets;
use drift_core::scene::synthetic_hdr;
use drift_core::tiling::{mean_gradient, plan_tiles, seam_energy, GridSpec};
use drift_core::ImageBuffer;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "drift", version, about = "HDR fusion and tunable tone-mapping pipeline")]
pub struct Cli {
    /// Seed for every random draw (noise, pool sampling).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a noisy handheld Bayer burst from a clean frame.
    Synth(SynthArgs),
    /// Fuse an EV0/EV- pair into a linear HDR frame.
    Fuse(FuseArgs),
    /// Render the reference tone-map targets.
    Reference(ReferenceArgs),
    /// Tone-map an HDR frame through the tunable path.
    Tonemap(TonemapArgs),
    /// Compare two images.
    Eval(EvalArgs),
    /// Run the tuning service.
    Serve(ServeArgs),
    /// Solve the maps that reproduce the reference targets.
    OracleMaps(OracleArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["gt", "scene"]))]
pub struct SynthArgs {
    /// Clean linear RGB ground truth.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Generate a synthetic ground truth of this size instead, e.g. 512x384.
    #[arg(long, value_parser = parse_dims)]
    pub scene: Option<(usize, usize)>,
    /// Handshake pool; a synthetic pool is generated (and saved) when absent.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u32).range(1..=(GROUP_LEN as i64 + 1)))]
    pub frames: u32,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_read: f64,
    #[arg(long, default_value_t = 0.0)]
    pub k_shot: f64,
    /// Downscale by 4 before mosaicking (super-resolution inputs).
    #[arg(long)]
    pub sr4: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub ev0: PathBuf,
    #[arg(long)]
    pub evm: PathBuf,
    /// Exposure of EV- relative to EV0.
    #[arg(long, default_value_t = 0.125)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// `auto`, `identity`, or a file with 9 matrix entries.
    #[arg(long, default_value = "auto")]
    pub align: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target without contrast enhancement.
    #[arg(long)]
    pub out: PathBuf,
    /// Target with contrast enhancement.
    #[arg(long)]
    pub out_enhanced: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapSource {
    Heuristic,
    Oracle,
}

#[derive(Debug, Args)]
pub struct TonemapArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// PNG by default, `.lfr` keeps float samples. Defaults to the input path with a `.png` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "preset")]
    pub profile: Option<PathBuf>,
    /// Load the profile (and metadata overrides) from a stored preset.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value = "presets")]
    pub preset_dir: PathBuf,
    /// Store the profile in use as a preset.
    #[arg(long)]
    pub save_preset: Option<String>,
    /// Overwrite an existing preset of the same name.
    #[arg(long)]
    pub force: bool,
    /// `RxC` or `auto`; untiled when absent.
    #[arg(long)]
    pub tiles: Option<GridSpec>,
    #[arg(long)]
    pub overlap: Option<usize>,
    #[arg(long)]
    pub check_seams: bool,
    /// Precomputed `.tmaps` file.
    #[arg(long, conflicts_with = "maps_from")]
    pub maps: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MapSource::Heuristic)]
    pub maps_from: MapSource,
    #[arg(long, value_enum, default_value_t = OutputKind::Enhanced)]
    pub output: OutputKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputKind {
    Base,
    Enhanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Psnr,
    Ssim,
    L1,
    Apl,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Metric::Psnr, Metric::Ssim])]
    pub metrics: Vec<Metric>,
    /// Feature extractor weights for `apl`; the built-in seeded extractor when absent.
    #[arg(long)]
    pub extractor: Option<PathBuf>,
    /// Write the built-in extractor to this path and exit.
    #[arg(long, hide = true)]
    pub write_extractor: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "presets")]
    pub preset_dir: PathBuf,
    /// Directory of UI assets served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Bind, report the address, and exit.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `.tmaps` output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write grayscale PNGs of each map into this directory.
    #[arg(long)]
    pub viz: Option<PathBuf>,
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    let (w, h) = (p(w)?, p(h)?);
    if w == 0 || h == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((w, h))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(PipelineConfig::default()),
    }
}

fn write_image(img: &ImageBuffer, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "lfr") {
        io::write_lfr(img, path)?;
    } else {
        io::write_png8(img, path)?;
    }
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Synth(a) => synth(a, seed),
        Command::Fuse(a) => fuse(a),
        Command::Reference(a) => reference(a),
        Command::Tonemap(a) => tonemap(a),
        Command::Eval(a) => eval(a, seed),
        Command::Serve(a) => crate::service::serve(a),
        Command::OracleMaps(a) => oracle(a),
    }
}

fn synth(a: SynthArgs, seed: u64) -> Result<()> {
    let gt = match (&a.gt, a.scene) {
        (Some(p), _) => load_linear(p)?,
        (None, Some((w, h))) => synthetic_hdr(w, h, seed)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    if a.gt.is_none() {
        io::write_lfr(&gt, a.out.join("gt.lfr"))?;
    }
    let pool = match &a.pool {
        Some(p) => HandshakePool::load(p)?,
        None => {
            let pool = synthetic_pool(16, gt.width(), gt.height(), SyntheticShake::default(), seed);
            pool.save(a.out.join("pool.txt"))?;
            pool
        }
    };
    let mut warps = sample_handshake_group(&pool, seed)?;
    warps.truncate(a.frames as usize - 1);
    let spec = BurstSpec {
        n_frames: a.frames as usize,
        sigma_read: a.sigma_read,
        k_shot: a.k_shot,
        downscale_factor: if a.sr4 { 4 } else { 1 },
    };
    let frames = synthesize_burst(&gt, &warps, &spec, seed)?;
    for (i, f) in frames.iter().enumerate() {
        io::write_lfr(f, a.out.join(format!("frame_{i:02}.lfr")))?;
    }
    let used = HandshakePool::new(vec![drift_core::burst::HandshakeGroup {
        id: "sampled".into(),
        warps: warps.clone(),
    }]);
    // a truncated group no longer satisfies the pool invariant
    if let Ok(p) = used {
        p.save(a.out.join("warps.txt"))?;
    }
    println!(
        "wrote {} frames of {}x{} to {}",
        frames.len(),
        frames[0].width(),
        frames[0].height(),
        a.out.display()
    );
    Ok(())
}

fn read_matrix(path: &Path) -> Result<Homography> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {}", path.display()))?;
    if vals.len() != 9 {
        bail!("{}: expected 9 matrix entries, found {}", path.display(), vals.len());
    }
    let m = [[vals[0], vals[1], vals[2]], [vals[3], vals[4], vals[5]], [vals[6], vals[7], vals[8]]];
    Ok(Homography::new(m)?)
}

fn fuse(a: FuseArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let ev0 = load_linear(&a.ev0)?;
    let evm = load_linear(&a.evm)?;
    let h = match a.align.as_str() {
        "identity" => Homography::identity(),
        "auto" => match estimate_alignment(&ev0, &evm) {
            Ok(h) => h,
            Err(e) => {
                eprintln!("warning: alignment failed ({e}); using identity");
                Homography::identity()
            }
        },
        path => read_matrix(Path::new(path))?,
    };
    let params = drift_core::fusion::FuseParams { tau: a.tau, ..cfg.fusion };
    let hdr = fuse_hdr(&ExposureFrame::new(ev0, 1.0), &ExposureFrame::new(evm, a.ratio), &h, &params)?;
    io::write_lfr(&as_linear(hdr)?, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn reference(a: ReferenceArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let hdr = load_linear(&a.input)?;
    let ctx = compute_global_context(&hdr)?;
    let (y0, y1) = render_targets(&hdr, &ctx, &cfg.reference)?;
    write_image(&y0, &a.out)?;
    if let Some(p) = &a.out_enhanced {
        write_image(&y1, p)?;
    }
    Ok(())
}

fn tonemap(a: TonemapArgs) -> Result<()> {
    let hdr = load_linear(&a.input)?;
    let mut cfg = load_config(a.config.as_deref())?;
    let store = PresetStore::new(&a.preset_dir);
    let spec = match &a.preset {
        Some(name) => {
            let p = store.load(name)?;
            if let Some(m) = p.metadata_overrides {
                cfg.metadata = m;
            }
            p.profile
        }
        None => load_profile_spec(a.profile.as_deref())?,
    };
    let (w, h) = hdr.dims();
    let profile = spec.resolve(None, Some((w, h)))?;
    let ctx = compute_global_context(&hdr)?;
    let provider = match (&a.maps, a.maps_from) {
        (Some(p), _) => Provider::from_tmaps_file(p, &hdr, &cfg)?,
        (None, MapSource::Oracle) => Provider::oracle(&hdr, &ctx, &cfg)?,
        (None, MapSource::Heuristic) => Provider::heuristic(&hdr, &ctx, &cfg)?,
    };
    let overlap = a.overlap.unwrap_or(cfg.tiling.overlap);
    let plan = match a.tiles {
        Some(g) => g.plan(w, h, overlap, cfg.tiling.budget_bytes())?,
        None => plan_tiles(w, h, 1, 1, 0)?,
    };
    let output = match a.output {
        OutputKind::Base => ToneOutput::Base,
        OutputKind::Enhanced => ToneOutput::Enhanced,
    };
    let img = tonemap_tiled(&hdr, &plan, &ctx, &cfg.lite, provider.as_dyn(), &profile, output)?;
    let out = a.out.clone().unwrap_or_else(|| a.input.with_extension("png"));
    write_image(&img, &out)?;
    println!(
        "wrote {} ({}x{}, {} tile(s), maps: {})",
        out.display(),
        w,
        h,
        plan.len(),
        provider.name()
    );
    if a.check_seams {
        let e = seam_energy(&img, &plan)?;
        let g = mean_gradient(&img);
        let rel = if g > 0.0 { e / g } else { 0.0 };
        println!("seam_energy {e:.6e} mean_gradient {g:.6e} relative {rel:.6e}");
    }
    if let Some(name) = &a.save_preset {
        let mut preset = Preset::new(name.clone(), spec);
        if cfg.metadata != CaptureMetadata::default() {
            preset.metadata_overrides = Some(cfg.metadata.clone());
        }
        store.save(&preset, a.force)?;
        println!("saved preset {name:?} to {}", store.dir().display());
    }
    Ok(())
}

fn eval(a: EvalArgs, seed: u64) -> Result<()> {
    if let Some(p) = &a.write_extractor {
        ConvExtractor::standard().write(p)?;
        println!("wrote {}", p.display());
        return Ok(());
    }
    let img_a = io::read_any(&a.a)?;
    let img_b = io::read_any(&a.b)?;
    let mut results: Vec<(&'static str, f64)> = Vec::new();
    for m in &a.metrics {
        let v = match m {
            Metric::Psnr => ("psnr", psnr(&img_a, &img_b)?),
            Metric::Ssim => ("ssim", ssim(&img_a, &img_b)?),
            Metric::L1 => ("l1", l1(&img_a, &img_b)?),
            Metric::Apl => {
                let fx: Box<dyn FeatureExtractor> = match &a.extractor {
                    Some(p) => Box::new(ConvExtractor::read(p)?),
                    None if seed == 0 => Box::new(ConvExtractor::standard()),
                    None => Box::new(ConvExtractor::seeded(seed, img_a.channels(), &[(8, 3, 1), (16, 3, 2), (32, 3, 2)])?),
                };
                ("apl", apl(fx.as_ref(), &img_a, &img_b)?)
            }
        };
        results.push(v);
    }
    if a.json {
        let obj: serde_json::Map<String, serde_json::Value> =
            results.iter().map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect();
        println!("{}", serde_json::Value::Object(obj));
    } else {
        for (k, v) in results {
            println!("{k} {v:.6}");
        }
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let hdr = load_linear(&a.input)?;
    let ctx = compute_global_context(&hdr)?;
    let maps = drift_core::pipeline::oracle_maps(&hdr, &ctx, &cfg, cfg.heuristic.gain_bounds)?;
    std::fs::write(&a.out, encode_tmaps(&maps)).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(dir) = &a.viz {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, kind) in [("w_y", MapKind::WY), ("w_c0", MapKind::WC0), ("w_c1", MapKind::WC1), ("g", MapKind::G)] {
            io::write_png8(&crate::render::visualize_map(&maps, kind), dir.join(format!("{name}.png")))?;
        }
    }
    println!("wrote {}", a.out.display());
    Ok(())
}
