//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use drift_core::burst::{
    add_sensor_noise, estimate_homography, reprojection_error, sample_handshake_group, synthesize_burst,
    synthetic_pool, valid_interior, warp, BurstSpec, HandshakePool, Homography, Point, RansacParams,
    SyntheticShake, GROUP_LEN,
};
use drift_core::enhance::{
    decode_tmaps, encode_tmaps, fuse_tone, fuse_tone_ycc, modulate, non_degenerate, solve_oracle_maps, GainBounds,
    Strength, ToneMaps, TuningProfile,
};
use drift_core::fusion::{deghost, fuse_hdr, ghost_mask, ExposureFrame, FuseParams};
use drift_core::image::io::{decode_lfr, encode_lfr, read_lfr};
use drift_core::image::{ColorSpace, ImageBuffer, Lut1D, Pyramid, Rect};
use drift_core::lite::{compute_global_context, tonemap_lite, ExposurePair, Provenance};
use drift_core::metrics::{
    apl, generator_objective, l1, psnr, psnr_masked, ssim, tonemap_loss, ConvExtractor, IdentityExtractor,
    LossPairing, LossWeights,
};
use drift_core::pipeline::{heuristic_provider, oracle_maps, tonemap, tonemap_tiled, FixedMaps, PipelineConfig, ToneOutput};
use drift_core::reference::render_targets;
use drift_core::scene::synthetic_hdr;
use drift_core::tiling::{mean_gradient, plan_tiles, run_tiled, seam_energy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn max_abs(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> ImageBuffer {
    let data = (0..w * h * c).map(|_| rng.random::<f32>()).collect();
    ImageBuffer::from_planar(w, h, c, if c == 3 { ColorSpace::LinearRgb } else { ColorSpace::LumaOnly }, data).unwrap()
}

fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize, lo: f32, hi: f32) -> ImageBuffer {
    ImageBuffer::plane(w, h, (0..w * h).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Monotone LUT with random interior knots.
fn random_lut(rng: &mut ChaCha8Rng) -> Lut1D {
    let n = rng.random_range(2..9usize);
    let mut ys: Vec<f32> = (0..n).map(|_| rng.random::<f32>()).collect();
    ys.sort_by(f32::total_cmp);
    let pts = (0..n).map(|i| (i as f32 / (n - 1) as f32, ys[i])).collect();
    Lut1D::new(pts).unwrap()
}

/// Piecewise-linear interpolation over the knots, clamped at the ends.
fn interp(points: &[(f32, f32)], x: f32) -> f64 {
    let x = x as f64;
    let (x0, y0) = (points[0].0 as f64, points[0].1 as f64);
    if x <= x0 {
        return y0;
    }
    for win in points.windows(2) {
        let (a, b) = ((win[0].0 as f64, win[0].1 as f64), (win[1].0 as f64, win[1].1 as f64));
        if x <= b.0 {
            return a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
        }
    }
    points[points.len() - 1].1 as f64
}

fn random_pair(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ExposurePair {
    let mk = |rng: &mut ChaCha8Rng| {
        let n = w * h;
        let mut d: Vec<f32> = (0..n).map(|_| rng.random::<f32>()).collect();
        d.extend((0..2 * n).map(|_| rng.random_range(-0.5f32..0.5)));
        ImageBuffer::from_planar(w, h, 3, ColorSpace::YCbCr, d).unwrap()
    };
    let (s0, s1) = (mk(rng), mk(rng));
    ExposurePair::new(s0, s1, Provenance::Lite).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = Instant::now();
    let mut worst = 0.0f32;
    for _ in 0..50 {
        let x = random_image(&mut rng, 256, 256, 3);
        let back = ok(ok(Pyramid::laplacian(&x, 5))?.reconstruct(ColorSpace::LinearRgb))?;
        worst = worst.max(max_abs(back.data(), x.data()));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure!(worst < 1e-6, "max error {worst:e}");
    ensure!(secs < 10.0, "took {secs:.2} s");
    Ok(format!("50 images, max error {worst:.2e}, {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (w, h) = (100, 100);
    let n = w * h;
    let pair = random_pair(&mut rng, w, h);
    let maps = ok(ToneMaps::new(
        random_plane(&mut rng, w, h, 0.0, 1.0),
        random_plane(&mut rng, w, h, 0.0, 1.0),
        random_plane(&mut rng, w, h, 0.0, 1.0),
        random_plane(&mut rng, w, h, 0.25, 4.0),
        GainBounds::default(),
    ))?;
    let prof = TuningProfile {
        lut_weight: random_lut(&mut rng),
        lut_exp0: random_lut(&mut rng),
        lut_exp1: random_lut(&mut rng),
        strength: Strength::Map(random_plane(&mut rng, w, h, 0.0, 1.0)),
    };

    // luma fusion against an independent evaluation of the blend
    let (i, t) = ok(fuse_tone_ycc(&pair, &maps, &prof))?;
    for p in 0..n {
        let wy = interp(prof.lut_weight.points(), maps.w_y.data()[p]);
        let a = interp(prof.lut_exp0.points(), pair.s0_y()[p]);
        let b = interp(prof.lut_exp1.points(), pair.s1_y()[p]);
        let expect = wy * a + (1.0 - wy) * b;
        let got = i.channel(0)[p] as f64;
        ensure!((got - expect).abs() < 1e-5, "pixel {p}: I_y {got} vs {expect}");
        // convex combination bound
        ensure!(
            got >= a.min(b) - 1e-6 && got <= a.max(b) + 1e-6,
            "pixel {p}: I_y {got} outside [{}, {}]",
            a.min(b),
            a.max(b)
        );
        let s = prof.strength.at(p) as f64;
        let g = (1.0 - s) + s * maps.g.data()[p] as f64;
        let gt = t.channel(0)[p] as f64;
        ensure!((gt - got * g).abs() < 1e-5, "pixel {p}: I~_y {gt} vs {}", got * g);
    }
    // chroma never sees the gain
    for c in 1..3 {
        ensure!(i.channel(c) == t.channel(c), "chroma channel {c} differs between I and I~");
    }

    // endpoints of the luma weight
    for (wv, which) in [(0.0f32, 1usize), (1.0, 0)] {
        let m = ok(ToneMaps::new(
            ok(ImageBuffer::filled(w, h, 1, ColorSpace::LumaOnly, wv))?,
            maps.w_c0.clone(),
            maps.w_c1.clone(),
            maps.g.clone(),
            GainBounds::default(),
        ))?;
        let (iw, _) = ok(fuse_tone_ycc(&pair, &m, &TuningProfile::default()))?;
        let src = if which == 0 { pair.s0_y() } else { pair.s1_y() };
        ensure!(iw.channel(0) == src, "w_y = {wv} does not select exposure {which}");
    }

    // S = 0 gives I~ = I, S = 1 gives G~ = G
    let zero = TuningProfile {
        strength: Strength::Scalar(0.0),
        ..prof.clone()
    };
    let (i0, t0) = ok(fuse_tone(&pair, &maps, &zero))?;
    ensure!(i0.data() == t0.data(), "S = 0 changes the output");
    let one = TuningProfile {
        strength: Strength::Scalar(1.0),
        ..prof.clone()
    };
    let m1 = ok(modulate(&maps, &pair, &one))?;
    ensure!(m1.g.as_slice() == maps.g.data(), "S = 1 alters the gain");
    Ok(format!("{n} pixels per property, random LUTs and strength map"))
}

fn criterion_3() -> Outcome {
    let cfg = PipelineConfig::default();
    let mut worst = f64::INFINITY;
    for seed in 0..20u64 {
        let hdr = ok(synthetic_hdr(96, 64, 100 + seed))?;
        let ctx = ok(compute_global_context(&hdr))?;
        let pair = ok(tonemap_lite(&hdr, &ctx, &cfg.lite))?;
        let (w, h) = pair.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let maps = ok(ToneMaps::new(
            random_plane(&mut rng, w, h, 0.0, 1.0),
            random_plane(&mut rng, w, h, 0.0, 1.0),
            random_plane(&mut rng, w, h, 0.0, 1.0),
            random_plane(&mut rng, w, h, 0.5, 2.0),
            GainBounds::default(),
        ))?;
        let prof = TuningProfile::default();
        let (y0, y1) = ok(fuse_tone(&pair, &maps, &prof))?;
        let solved = ok(solve_oracle_maps(&pair, &y0, &y1, GainBounds::default()))?;
        let (r0, r1) = ok(fuse_tone(&pair, &solved, &prof))?;
        let mask = non_degenerate(&pair);
        for (name, r, y) in [("I", &r0, &y0), ("I~", &r1, &y1)] {
            let p = ok(psnr_masked(r, y, &mask))?;
            ensure!(p >= 50.0, "scene {seed} {name}: {p:.2} dB");
            worst = worst.min(p);
        }
    }
    Ok(format!("20 scenes, worst {worst:.2} dB"))
}

fn criterion_4() -> Outcome {
    let cfg = PipelineConfig::default();
    let (mut wp, mut ws) = (f64::INFINITY, f64::INFINITY);
    for seed in 0..10u64 {
        let hdr = ok(synthetic_hdr(384, 256, seed))?;
        let ctx = ok(compute_global_context(&hdr))?;
        let maps = ok(oracle_maps(&hdr, &ctx, &cfg, GainBounds::default()))?;
        let (i, t) = ok(tonemap(&hdr, &ctx, &cfg.lite, &FixedMaps(maps), &TuningProfile::default()))?;
        let (y0, y1) = ok(render_targets(&hdr, &ctx, &cfg.reference))?;
        for (name, out, target) in [("I", &i, &y0), ("I~", &t, &y1)] {
            let p = ok(psnr(out, target))?;
            let s = ok(ssim(out, target))?;
            ensure!(p >= 45.0 && s >= 0.99, "scene {seed} {name}: {p:.2} dB, ssim {s:.4}");
            wp = wp.min(p);
            ws = ws.min(s);
        }
    }
    Ok(format!("10 scenes, worst {wp:.2} dB, worst ssim {ws:.4}"))
}

/// Low-frequency HDR radiance spanning about eight stops, with nothing
/// aligned to any tile grid.
fn smooth_hdr(w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
        let (u, v) = (x as f32 / w as f32, y as f32 / h as f32);
        let stops = 4.0 * (2.1 * u + 1.3 * v + 0.4 * c as f32).sin() + 2.0 * (3.3 * v - 1.7 * u).cos();
        0.08 * 2f32.powf(stops * 0.7)
    })
    .unwrap()
}

fn criterion_5() -> Outcome {
    let cfg = PipelineConfig::default();
    let (w, h) = (512, 384);
    let plan = ok(plan_tiles(w, h, 4, 4, 50))?;
    let prof = TuningProfile::with_strength(0.8);
    let mut worst = 0.0f32;
    let mut rel = 0.0f64;
    let mut added = 0.0f64;
    let mut hard_full = None;
    for (hard, hdr) in [(true, ok(synthetic_hdr(w, h, 5))?), (false, smooth_hdr(w, h))] {
        let ctx = ok(compute_global_context(&hdr))?;
        let fixed = FixedMaps(ok(oracle_maps(&hdr, &ctx, &cfg, GainBounds::default()))?);
        let heuristic = ok(heuristic_provider(&hdr, &ctx, &cfg))?;
        for provider in [&fixed as &dyn drift_core::pipeline::MapsProvider, &heuristic] {
            let (_, full) = ok(tonemap(&hdr, &ctx, &cfg.lite, provider, &prof))?;
            let tiled = ok(tonemap_tiled(&hdr, &plan, &ctx, &cfg.lite, provider, &prof, ToneOutput::Enhanced))?;
            let err = max_abs(tiled.data(), full.data());
            ensure!(err < 1e-6, "tiled vs full frame differ by {err:e}");
            worst = worst.max(err);
            let mg = mean_gradient(&tiled);
            let e = ok(seam_energy(&tiled, &plan))?;
            if hard {
                // content crossing the grid scores on its own; tiling must add nothing
                let base = ok(seam_energy(&full, &plan))?;
                ensure!(e - base < 1e-3 * mg, "tiling adds seam energy {:e}", e - base);
                added = added.max(e - base);
                hard_full.get_or_insert(base / mg);
            } else {
                ensure!(e.abs() < 1e-3 * mg, "seam energy {e:e} vs threshold {:e}", 1e-3 * mg);
                rel = rel.max(e.abs() / mg);
            }
        }
    }

    // per-tile offsets must be caught
    let hdr = smooth_hdr(w, h);
    let ctx = ok(compute_global_context(&hdr))?;
    let model = ok(heuristic_provider(&hdr, &ctx, &cfg))?;
    let (_, full) = ok(tonemap(&hdr, &ctx, &cfg.lite, &model, &prof))?;
    let hard = ok(plan_tiles(w, h, 4, 4, 0))?;
    let offset = |p: &drift_core::tiling::TilePlan| {
        run_tiled(&full, p, None, |tile, input| Ok(input.map(|v| v + tile.index as f32 / 100.0)))
    };
    let adv = ok(offset(&hard))?;
    let thr = 1e-3 * mean_gradient(&adv);
    let e = ok(seam_energy(&adv, &hard))?;
    ensure!(e > 5.0 * thr, "adversarial seam energy {e:e} not above {:e}", 5.0 * thr);
    let feathered = ok(offset(&plan))?;
    let ef = ok(seam_energy(&feathered, &plan))? / (1e-3 * mean_gradient(&feathered));
    Ok(format!(
        "max diff {worst:.1e}; smooth scene seam/grad {rel:.1e}; hard scene {:.1e} from content, {added:.1e} added by tiling; \
         offsets {:.0}x threshold (feathered: {ef:.1}x)",
        hard_full.unwrap_or(0.0),
        e / thr
    ))
}

fn highlight_scene(w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
        let (xf, yf) = (x as f32, y as f32);
        let tex = 0.5 + 0.5 * (xf * 0.19 + c as f32).sin() * (yf * 0.23).cos();
        if x >= w / 2 {
            (1.5 + 1.5 * tex) * [1.0, 0.9, 0.8][c]
        } else {
            0.1 + 0.5 * tex
        }
    })
    .unwrap()
}

fn criterion_6() -> Outcome {
    let gt = highlight_scene(256, 256);
    let ev0 = gt.map(|v| v.min(1.0));
    let evm = gt.map(|v| v * 0.125);
    let out = ok(fuse_hdr(
        &ExposureFrame::new(ev0, 1.0),
        &ExposureFrame::new(evm, 0.125),
        &Homography::identity(),
        &FuseParams::default(),
    ))?;
    let mut worst = 0.0f64;
    for c in 0..3 {
        for y in 24..232 {
            for x in 152..232 {
                let g = gt.get(c, x, y) as f64;
                worst = worst.max((out.get(c, x, y) as f64 - g).abs() / g);
            }
        }
    }
    ensure!(worst < 0.05, "highlight error {:.2}%", worst * 100.0);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = random_image(&mut rng, 64, 48, 3);
    ensure!(ok(deghost(&a, &a, 0.1))?.data() == a.data(), "identical inputs are not passed through");
    let b = a.map(|v| v * 0.999 + 0.0005);
    ensure!(ok(deghost(&a, &b, 0.0))?.data() == a.data(), "tau = 0 does not fall back to the reference");

    // a mismatched block is replaced; pixels far from it are untouched
    let mut moved = a.clone();
    let block = Rect::new(20, 16, 36, 30);
    for c in 0..3 {
        for y in block.y0..block.y1 {
            for x in block.x0..block.x1 {
                moved.set(c, x, y, 1.0 - a.get(c, x, y));
            }
        }
    }
    let mask = ok(ghost_mask(&a, &moved, 0.1, None))?;
    let outside_margin = |x: usize, y: usize| {
        x + 4 < block.x0 || x >= block.x1 + 4 || y + 4 < block.y0 || y >= block.y1 + 4
    };
    let (mut inside, mut stray) = (0usize, 0usize);
    for y in 0..48 {
        for x in 0..64 {
            let m = mask[y * 64 + x];
            if outside_margin(x, y) && m > 0.0 {
                stray += 1;
            }
            if x >= block.x0 + 3 && x + 3 < block.x1 && y >= block.y0 + 3 && y + 3 < block.y1 && m >= 1.0 {
                inside += 1;
            }
        }
    }
    let core = (block.width() - 6) * (block.height() - 6);
    ensure!(stray == 0, "{stray} pixels flagged away from the block");
    ensure!(inside * 10 >= core * 9, "only {inside}/{core} block pixels flagged");
    Ok(format!("highlight error {:.2}%, deghost passthrough/fallback/localization ok", worst * 100.0))
}

fn criterion_7() -> Outcome {
    // warp round trip
    let hdr = ok(synthetic_hdr(256, 192, 7))?;
    let img = hdr.map(|v| v / (1.0 + v));
    let hm = ok(Homography::similarity(0.01, 1.01, 3.5, -2.25, 128.0, 96.0))?;
    let back = ok(warp(&ok(warp(&img, &hm))?, &hm.inverse()))?;
    let roi = valid_interior(&hm, 256, 192, 8.0);
    let rt = ok(psnr(&ok(back.crop(roi))?, &ok(img.crop(roi))?))?;
    ensure!(rt > 40.0, "round trip {rt:.2} dB");

    // RANSAC with 20% outliers
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let truth = ok(Homography::new([[1.02, 0.03, 4.0], [-0.02, 0.99, -3.0], [1e-5, -2e-5, 1.0]]))?;
    let n = 200;
    let src: Vec<Point> = (0..n).map(|_| (rng.random_range(0.0..640.0), rng.random_range(0.0..480.0))).collect();
    let dst: Vec<Point> = src
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            if i % 5 == 0 {
                (rng.random_range(0.0..640.0), rng.random_range(0.0..480.0))
            } else {
                let (u, v) = truth.apply(x, y);
                (u + rng.random_range(-0.2..0.2), v + rng.random_range(-0.2..0.2))
            }
        })
        .collect();
    let est = ok(estimate_homography(&src, &dst, &RansacParams::default()))?;
    let reproj = src
        .iter()
        .map(|&s| reprojection_error(&est, s, truth.apply(s.0, s.1)))
        .fold(0.0, f64::max);
    ensure!(reproj < 0.5, "RANSAC reprojection {reproj:.3} px");

    // noise variance
    let (s, k, sr) = (0.3f64, 0.01, 0.02);
    let flat = ok(ImageBuffer::filled(400, 250, 1, ColorSpace::LumaOnly, s as f32))?;
    let noisy = add_sensor_noise(&flat, sr, k, &mut ChaCha8Rng::seed_from_u64(77));
    let d = noisy.data();
    let mean = d.iter().map(|&v| v as f64).sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
    let expect = k * s + sr * sr;
    ensure!((var / expect - 1.0).abs() < 0.1, "variance {var:e} vs {expect:e}");

    // burst structure
    let pool = synthetic_pool(4, 128, 96, SyntheticShake::default(), 7);
    ensure!(pool.groups().iter().all(|g| g.warps.len() == GROUP_LEN && GROUP_LEN == 10), "group length");
    let warps = ok(sample_handshake_group(&pool, 3))?;
    let gt = ok(synthetic_hdr(128, 96, 8))?;
    let frames = ok(synthesize_burst(&gt, &warps, &BurstSpec { sigma_read: 0.01, k_shot: 0.001, ..Default::default() }, 1))?;
    ensure!(frames.len() == 11, "burst has {} frames", frames.len());
    let mut short = pool.to_text();
    let last = short.trim_end().rfind('\n').unwrap();
    short.truncate(last);
    ensure!(HandshakePool::parse(&short).is_err(), "pool with a 9-warp group accepted");
    Ok(format!(
        "round trip {rt:.1} dB, RANSAC {reproj:.3} px, variance ratio {:.3}, 11 frames / 10 warps",
        var / expect
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_image(&mut rng, 48, 40, 3);
    let y = random_image(&mut rng, 48, 40, 3);
    let fx = ConvExtractor::standard();
    let self_apl = ok(apl(&fx, &x, &x))?;
    ensure!(self_apl == 0.0, "apl(x, x) = {self_apl}");
    let (ai, l) = (ok(apl(&IdentityExtractor, &x, &y))?, ok(l1(&x, &y))?);
    ensure!((ai - l).abs() < 1e-9, "identity apl {ai} vs l1 {l}");
    let zero = ok(ImageBuffer::filled(16, 16, 3, ColorSpace::Srgb, 0.0))?;
    let tenth = ok(ImageBuffer::filled(16, 16, 3, ColorSpace::Srgb, 0.1))?;
    let p = ok(psnr(&zero, &tenth))?;
    ensure!((p - 20.0).abs() < 1e-6, "psnr(0, 0.1) = {p}");
    let s = ok(ssim(&x, &x))?;
    ensure!((s - 1.0).abs() < 1e-12, "ssim(x, x) = {s}");
    let fid = ok(generator_objective(1.0, 0.5, 2.0, &LossWeights { lambda1: 0.0, lambda2: 0.0 }))?;
    let full = ok(generator_objective(1.0, 0.5, 2.0, &LossWeights { lambda1: 0.1, lambda2: 0.01 }))?;
    ensure!(fid == 1.0 && (full - 1.07).abs() < 1e-12, "objective {fid}, {full}");

    let t = random_image(&mut rng, 48, 40, 3);
    let paired0 = ok(tonemap_loss(&x, &t, &x, &t, LossPairing::Paired))?;
    ensure!(paired0.abs() < 1e-12, "paired loss at perfect match {paired0}");
    let strict0 = ok(tonemap_loss(&x, &t, &x, &x, LossPairing::Strict))?;
    ensure!(strict0.abs() < 1e-12, "strict loss ignoring I~ {strict0}");
    let paired_off = ok(tonemap_loss(&x, &t, &x, &x, LossPairing::Paired))?;
    let strict_off = ok(tonemap_loss(&x, &t, &x, &t, LossPairing::Strict))?;
    ensure!(paired_off > 0.1 && strict_off > 0.1, "mismatched pairings not penalized");
    Ok("apl, psnr, ssim, objective and both loss pairings ok".into())
}

fn drift(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_drift")).args(args).output().expect("spawn drift");
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

fn criterion_9() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let d = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let run = |args: &[&str], want: i32| -> Result<String, String> {
        let (code, text) = drift(args);
        if code == want {
            Ok(text)
        } else {
            Err(format!("`drift {}` exited {code}, expected {want}: {}", args.join(" "), text.trim()))
        }
    };
    let read = |p: &str| std::fs::read(p).map_err(|e| format!("{p}: {e}"));

    run(&["synth", "--scene", "192x128", "--frames", "11", "--sigma-read", "0.01", "--out", &d("burst")], 0)?;
    let scene = d("scene.lfr");
    std::fs::write(&scene, encode_lfr(&ok(synthetic_hdr(192, 128, 9))?)).map_err(|e| e.to_string())?;
    let ev0 = d("ev0.lfr");
    let evm = d("evm.lfr");
    let hdr = ok(read_lfr(&scene))?;
    std::fs::write(&ev0, encode_lfr(&hdr.map(|v| v.min(1.0)))).map_err(|e| e.to_string())?;
    std::fs::write(&evm, encode_lfr(&hdr.map(|v| (v * 0.125).min(1.0)))).map_err(|e| e.to_string())?;
    run(&["fuse", "--ev0", &ev0, "--evm", &evm, "--align", "identity", "--out", &d("fused.lfr")], 0)?;
    run(&["reference", "--in", &scene, "--out", &d("y0.png"), "--out-enhanced", &d("y1.png")], 0)?;
    run(&["oracle-maps", "--in", &scene, "--out", &d("maps.tmaps")], 0)?;
    let presets = d("presets");
    run(
        &[
            "tonemap", "--in", &scene, "--out", &d("out.png"), "--maps", &d("maps.tmaps"), "--tiles", "4x4",
            "--overlap", "50", "--preset-dir", &presets, "--save-preset", "acc",
        ],
        0,
    )?;
    run(&["eval", "--a", &d("out.png"), "--b", &d("y1.png"), "--metrics", "psnr,ssim,l1,apl", "--json"], 0)?;
    run(&["serve", "--check", "--addr", "127.0.0.1:0", "--preset-dir", &presets], 0)?;

    // processing failures exit 1, usage errors exit 2
    run(&["tonemap", "--in", &d("missing.lfr")], 1)?;
    run(&["fuse", "--ev0", &scene, "--evm", &d("maps.tmaps"), "--out", &d("x.lfr")], 1)?;
    run(&["tonemap", "--in", &scene, "--out", &d("o2.png"), "--preset-dir", &presets, "--save-preset", "acc"], 1)?;
    run(&["tonemap", "--in", &scene, "--preset", "nope", "--preset-dir", &presets], 1)?;
    run(&["eval", "--a", &d("out.png"), "--b", &d("burst/frame_00.lfr")], 1)?;
    run(&["bogus"], 2)?;
    run(&["synth", "--out", &d("b2")], 2)?;
    run(&["synth", "--scene", "64x64", "--frames", "12", "--out", &d("b3")], 2)?;
    run(&["tonemap", "--in", &scene, "--maps", &d("maps.tmaps"), "--maps-from", "oracle"], 2)?;
    run(&["eval", "--a", &scene, "--b", &scene, "--metrics", "psnr,bogus"], 2)?;

    // files written by the tool re-encode to the same bytes
    for f in ["burst/frame_00.lfr", "burst/frame_10.lfr", "fused.lfr", "scene.lfr"] {
        let bytes = read(&d(f))?;
        ensure!(encode_lfr(&ok(decode_lfr(&bytes))?) == bytes, "{f} does not round-trip");
    }
    let tm = read(&d("maps.tmaps"))?;
    ensure!(encode_tmaps(&ok(decode_tmaps(&tm, GainBounds::default()))?) == tm, ".tmaps does not round-trip");
    let preset_text = ok(std::fs::read_to_string(Path::new(&presets).join("acc.toml")))?;
    let preset = ok(drift_cli::presets::Preset::parse_toml(&preset_text))?;
    ensure!(preset.to_toml() == preset_text, "preset does not round-trip");
    let pool_text = ok(std::fs::read_to_string(d("burst/pool.txt")))?;
    ensure!(ok(HandshakePool::parse(&pool_text))?.to_text() == pool_text, "pool does not round-trip");
    Ok("7 subcommands exit 0; 5 processing failures exit 1; 5 usage errors exit 2; 4 formats round-trip".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("pyramid round-trip", criterion_1),
        ("tunable fusion algebra", criterion_2),
        ("oracle inversion", criterion_3),
        ("reference matching", criterion_4),
        ("tiling equivalence and seams", criterion_5),
        ("HDR fusion and deghosting", criterion_6),
        ("burst synthesis and alignment", criterion_7),
        ("metrics and losses", criterion_8),
        ("CLI contract", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {} {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
