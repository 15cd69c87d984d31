//! Per-pixel inversion of the fusion algebra against rendered targets.
//!
//! Stands in for the map predictor: given the Lite pair and the two reference
//! renders, it recovers the maps that reproduce them as closely as the map
//! ranges allow. Where an RGB target is clipped to `[0, 1]`, a per-pixel
//! refinement fits the clipped render directly.

use super::{GainBounds, ToneMaps};
use crate::image::{rgb_to_ycbcr, ycc_to_rgb_px, ColorSpace, ImageBuffer};
use crate::lite::ExposurePair;
use crate::{Error, Result};
use rayon::prelude::*;

/// Exposures closer than this in luma carry no information about `w_y`.
pub const DEGENERACY_EPS: f64 = 1e-3;
/// `w_y` used where the exposures agree.
pub const FALLBACK_WEIGHT: f64 = 0.5;
/// Pull of the chroma solve towards `(w_y, 1 - w_y)`; only decides among
/// equally good solutions.
const CHROMA_PRIOR: f64 = 1e-9;
const REFINE_ITERS: usize = 40;

/// True where `|S0_y - S1_y| >= eps`.
pub fn non_degenerate(pair: &ExposurePair) -> Vec<bool> {
    pair.s0_y()
        .iter()
        .zip(pair.s1_y())
        .map(|(&a, &b)| ((a - b) as f64).abs() >= DEGENERACY_EPS)
        .collect()
}

fn as_ycc(img: &ImageBuffer) -> Result<ImageBuffer> {
    match (img.channels(), img.colorspace()) {
        (3, ColorSpace::YCbCr) => Ok(img.clone()),
        (3, _) => rgb_to_ycbcr(img),
        (c, _) => Err(Error::InvalidInput(format!("targets need 3 channels, got {c}"))),
    }
}

pub fn solve_oracle_maps(pair: &ExposurePair, y0: &ImageBuffer, y1: &ImageBuffer, bounds: GainBounds) -> Result<ToneMaps> {
    bounds.validate()?;
    let (w, h) = pair.dims();
    for (name, t) in [("y0", y0), ("y1", y1)] {
        if t.dims() != (w, h) {
            return Err(Error::ShapeMismatch(format!(
                "{name} is {:?}, exposures {:?}",
                t.dims(),
                (w, h)
            )));
        }
    }
    // RGB targets tell us where the display clamp was active
    let clip_targets = (y0.colorspace() != ColorSpace::YCbCr && y1.colorspace() != ColorSpace::YCbCr)
        .then(|| (y0.clone(), y1.clone()));
    let (y0, y1) = (as_ycc(y0)?, as_ycc(y1)?);
    let n = w * h;
    let (s0, s1) = (pair.s0_y(), pair.s1_y());
    let (c0b, c0r) = pair.chroma(0);
    let (c1b, c1r) = pair.chroma(1);
    let (t0y, t0b, t0r) = (y0.channel(0), y0.channel(1), y0.channel(2));
    let t1y = y1.channel(0);

    let solved: Vec<[f32; 4]> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (a, b) = (s0[p] as f64, s1[p] as f64);
            let wy = if (a - b).abs() >= DEGENERACY_EPS {
                ((t0y[p] as f64 - b) / (a - b)).clamp(0.0, 1.0)
            } else {
                FALLBACK_WEIGHT
            };
            let (w0, w1) = solve_chroma(
                [c0b[p] as f64, c0r[p] as f64],
                [c1b[p] as f64, c1r[p] as f64],
                [t0b[p] as f64, t0r[p] as f64],
                (wy, 1.0 - wy),
            );
            // I_Y exactly as the renderer computes it
            let wy32 = wy as f32;
            let iy = (wy32 as f64 * a + (1.0 - wy32 as f64) * b) as f32;
            let g = (t1y[p] as f64 / (iy as f64).max(DEGENERACY_EPS)) as f32;
            let linear = [wy32, w0 as f32, w1 as f32, bounds.clamp(g)];
            match &clip_targets {
                Some((r0, r1)) => {
                    let px = |img: &ImageBuffer| [img.channel(0)[p], img.channel(1)[p], img.channel(2)[p]].map(f64::from);
                    let t = [px(r0), px(r1)];
                    if t.iter().flatten().any(|&v| v <= 0.0 || v >= 1.0) {
                        let ex = Exposures {
                            s0: [a, c0b[p] as f64, c0r[p] as f64],
                            s1: [b, c1b[p] as f64, c1r[p] as f64],
                            free_wy: (a - b).abs() >= DEGENERACY_EPS,
                        };
                        refine_clipped(&ex, &t, linear.map(f64::from), bounds).map(|v| v as f32)
                    } else {
                        linear
                    }
                }
                None => linear,
            }
        })
        .collect();

    let plane = |k: usize| {
        ImageBuffer::from_parts_unchecked(w, h, 1, ColorSpace::LumaOnly, solved.iter().map(|v| v[k]).collect())
    };
    ToneMaps::new(plane(0), plane(1), plane(2), plane(3), bounds)
}

struct Exposures {
    /// `(Y, Cb, Cr)` of each exposure.
    s0: [f64; 3],
    s1: [f64; 3],
    free_wy: bool,
}

/// Clamped display RGB of `(I, I_tilde)` for maps `m = [w_y, w_c0, w_c1, g]`.
fn render_clipped(ex: &Exposures, m: [f64; 4]) -> [[f64; 3]; 2] {
    let iy = m[0] * ex.s0[0] + (1.0 - m[0]) * ex.s1[0];
    let cb = m[1] * ex.s0[1] + m[2] * ex.s1[1];
    let cr = m[1] * ex.s0[2] + m[2] * ex.s1[2];
    let rgb = |y: f64| {
        let (r, g, b) = ycc_to_rgb_px(y, cb, cr);
        [r, g, b].map(|v| v.clamp(0.0, 1.0))
    };
    [rgb(iy), rgb(iy * m[3])]
}

fn clipped_cost(ex: &Exposures, t: &[[f64; 3]; 2], m: [f64; 4]) -> f64 {
    let r = render_clipped(ex, m);
    (0..2).flat_map(|k| (0..3).map(move |c| (r[k][c] - t[k][c]).powi(2))).sum()
}

/// Damped Gauss-Newton on the clamped render error, projected onto the map
/// ranges. Channels whose render sits beyond the clamp contribute no
/// gradient, so targets at 0 or 1 only constrain from one side. Returns
/// `start` unless it finds a strictly better fit.
fn refine_clipped(ex: &Exposures, t: &[[f64; 3]; 2], start: [f64; 4], bounds: GainBounds) -> [f64; 4] {
    let lo = [0.0, 0.0, 0.0, bounds.min as f64];
    let hi = [1.0, 1.0, 1.0, bounds.max as f64];
    // d(R, G, B) / d(Y, Cb, Cr)
    let basis = [ycc_to_rgb_px(1.0, 0.0, 0.0), ycc_to_rgb_px(0.0, 1.0, 0.0), ycc_to_rgb_px(0.0, 0.0, 1.0)]
        .map(|(r, g, b)| [r, g, b]);
    let mut m = start;
    let mut cost = clipped_cost(ex, t, m);
    let mut mu = 1e-6;
    for _ in 0..REFINE_ITERS {
        if cost < 1e-24 {
            break;
        }
        let iy = m[0] * ex.s0[0] + (1.0 - m[0]) * ex.s1[0];
        let cb = m[1] * ex.s0[1] + m[2] * ex.s1[1];
        let cr = m[1] * ex.s0[2] + m[2] * ex.s1[2];
        let dy = ex.s0[0] - ex.s1[0];
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        for k in 0..2 {
            let gain = if k == 0 { 1.0 } else { m[3] };
            let y = iy * gain;
            for c in 0..3 {
                let v = basis[0][c] * y + basis[1][c] * cb + basis[2][c] * cr;
                if !(0.0..=1.0).contains(&v) {
                    continue;
                }
                let j = [
                    if ex.free_wy { basis[0][c] * gain * dy } else { 0.0 },
                    basis[1][c] * ex.s0[1] + basis[2][c] * ex.s0[2],
                    basis[1][c] * ex.s1[1] + basis[2][c] * ex.s1[2],
                    if k == 1 { basis[0][c] * iy } else { 0.0 },
                ];
                let r = v - t[k][c];
                for a in 0..4 {
                    jtr[a] += j[a] * r;
                    for b in 0..4 {
                        jtj[a][b] += j[a] * j[b];
                    }
                }
            }
        }
        let mut improved = false;
        while mu < 1e6 {
            let mut sys = jtj;
            for (a, row) in sys.iter_mut().enumerate() {
                row[a] += mu * (1.0 + jtj[a][a]);
            }
            let Some(step) = solve4(sys, jtr.map(|v| -v)) else {
                mu *= 10.0;
                continue;
            };
            let mut cand = m;
            for a in 0..4 {
                cand[a] = (m[a] + step[a]).clamp(lo[a], hi[a]);
            }
            let c = clipped_cost(ex, t, cand);
            if c < cost {
                m = cand;
                cost = c;
                mu = (mu * 0.1).max(1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    m
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Minimizes `|w0*u + w1*v - t|^2 + lambda*|w - prior|^2` over `[0, 1]^2`.
///
/// The objective is a strictly convex quadratic, so the minimum is either the
/// unconstrained stationary point or lies on one of the four box edges.
fn solve_chroma(u: [f64; 2], v: [f64; 2], t: [f64; 2], prior: (f64, f64)) -> (f64, f64) {
    let lam = CHROMA_PRIOR;
    let dot = |x: [f64; 2], y: [f64; 2]| x[0] * y[0] + x[1] * y[1];
    let (uu, uv, vv) = (dot(u, u) + lam, dot(u, v), dot(v, v) + lam);
    let (ut, vt) = (dot(u, t) + lam * prior.0, dot(v, t) + lam * prior.1);
    let cost = |w0: f64, w1: f64| {
        let r0 = w0 * u[0] + w1 * v[0] - t[0];
        let r1 = w0 * u[1] + w1 * v[1] - t[1];
        r0 * r0 + r1 * r1 + lam * ((w0 - prior.0).powi(2) + (w1 - prior.1).powi(2))
    };
    let det = uu * vv - uv * uv;
    if det > 0.0 {
        let w0 = (ut * vv - vt * uv) / det;
        let w1 = (vt * uu - ut * uv) / det;
        if (0.0..=1.0).contains(&w0) && (0.0..=1.0).contains(&w1) {
            return (w0, w1);
        }
    }
    let mut best = (prior.0, prior.1);
    let mut best_cost = f64::INFINITY;
    for fixed in [0.0, 1.0] {
        let cand = [
            (fixed, ((vt - fixed * uv) / vv).clamp(0.0, 1.0)),
            (((ut - fixed * uv) / uu).clamp(0.0, 1.0), fixed),
        ];
        for (w0, w1) in cand {
            let c = cost(w0, w1);
            if c < best_cost {
                best_cost = c;
                best = (w0, w1);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enhance::{fuse_tone, TuningProfile};
    use crate::lite::Provenance;
    use crate::metrics::psnr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pair(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ExposurePair {
        let n = w * h;
        let mut s0 = vec![0.0f32; 3 * n];
        let mut s1 = vec![0.0f32; 3 * n];
        for p in 0..n {
            let y0: f32 = rng.random_range(0.05..0.6);
            let y1: f32 = (y0 + rng.random_range(0.0..0.35)).min(0.98);
            let cb: f32 = rng.random_range(-0.15..0.15);
            let cr: f32 = rng.random_range(-0.15..0.15);
            s0[p] = y0;
            s1[p] = y1;
            s0[n + p] = cb * y0;
            s0[2 * n + p] = cr * y0;
            s1[n + p] = cb * y1;
            s1[2 * n + p] = cr * y1;
        }
        let mk = |d| ImageBuffer::from_planar(w, h, 3, ColorSpace::YCbCr, d).unwrap();
        ExposurePair::new(mk(s0), mk(s1), Provenance::Lite).unwrap()
    }

    #[test]
    fn chroma_solve_is_exact_inside_the_box() {
        let (w0, w1) = solve_chroma([0.1, 0.02], [-0.03, 0.05], [0.1 * 0.3 - 0.03 * 0.6, 0.02 * 0.3 + 0.05 * 0.6], (0.5, 0.5));
        assert!((w0 - 0.3).abs() < 1e-6 && (w1 - 0.6).abs() < 1e-6);
        // collinear chroma: any point on the solution line works, the prior picks one
        let (w0, w1) = solve_chroma([0.1, 0.05], [0.2, 0.1], [0.1, 0.05], (0.2, 0.8));
        // projection of the prior onto 0.1 w0 + 0.2 w1 = 0.1
        assert!((w0 - 0.04).abs() < 1e-6 && (w1 - 0.48).abs() < 1e-6);
        // gray pixel keeps the prior
        let (w0, w1) = solve_chroma([0.0; 2], [0.0; 2], [0.0; 2], (0.3, 0.7));
        assert!((w0 - 0.3).abs() < 1e-12 && (w1 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn chroma_solve_respects_the_box() {
        let (w0, w1) = solve_chroma([0.1, 0.0], [0.0, 0.1], [0.5, -0.2], (0.5, 0.5));
        assert_eq!((w0, w1), (1.0, 0.0));
    }

    #[test]
    fn midpoint_targets_give_half_weights_and_unit_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pair = random_pair(&mut rng, 16, 12);
        let maps = ToneMaps::uniform(16, 12, 0.5, 0.5, 0.5, 1.0).unwrap();
        let prof = TuningProfile::with_strength(0.0);
        let (y0, _) = super::super::fuse_tone_ycc(&pair, &maps, &prof).unwrap();
        let solved = solve_oracle_maps(&pair, &y0, &y0, GainBounds::default()).unwrap();
        let ok = non_degenerate(&pair);
        for p in 0..16 * 12 {
            if ok[p] {
                assert!((solved.w_y.data()[p] - 0.5).abs() < 1e-4);
                assert!((solved.g.data()[p] - 1.0).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn clipped_targets_are_still_matched() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (w, h) = (32, 24);
        let pair = random_pair(&mut rng, w, h);
        let rand_plane = |rng: &mut ChaCha8Rng, lo: f32, hi: f32| {
            ImageBuffer::plane(w, h, (0..w * h).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
        };
        let maps = ToneMaps::new(
            rand_plane(&mut rng, 0.0, 1.0),
            rand_plane(&mut rng, 0.0, 1.0),
            rand_plane(&mut rng, 0.0, 1.0),
            rand_plane(&mut rng, 1.5, 4.0),
            GainBounds::default(),
        )
        .unwrap();
        let prof = TuningProfile::default();
        let (y0, y1) = fuse_tone(&pair, &maps, &prof).unwrap();
        assert!(y1.data().iter().filter(|&&v| v >= 1.0).count() > w * h / 10);
        let solved = solve_oracle_maps(&pair, &y0, &y1, GainBounds::default()).unwrap();
        let (r0, r1) = fuse_tone(&pair, &solved, &prof).unwrap();
        assert!(psnr(&r0, &y0).unwrap() >= 50.0);
        assert!(psnr(&r1, &y1).unwrap() >= 50.0);
    }

    #[test]
    fn random_maps_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (w, h) = (32, 24);
        let pair = random_pair(&mut rng, w, h);
        let rand_plane = |rng: &mut ChaCha8Rng, lo: f32, hi: f32| {
            ImageBuffer::plane(w, h, (0..w * h).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
        };
        let maps = ToneMaps::new(
            rand_plane(&mut rng, 0.0, 1.0),
            rand_plane(&mut rng, 0.0, 1.0),
            rand_plane(&mut rng, 0.0, 1.0),
            rand_plane(&mut rng, 0.8, 1.4),
            GainBounds::default(),
        )
        .unwrap();
        let prof = TuningProfile::default();
        let (y0, y1) = fuse_tone(&pair, &maps, &prof).unwrap();
        let solved = solve_oracle_maps(&pair, &y0, &y1, GainBounds::default()).unwrap();
        let (r0, r1) = fuse_tone(&pair, &solved, &prof).unwrap();
        assert!(psnr(&r0, &y0).unwrap() >= 50.0);
        assert!(psnr(&r1, &y1).unwrap() >= 50.0);
    }

    #[test]
    fn mismatched_targets_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pair = random_pair(&mut rng, 8, 8);
        let t = ImageBuffer::filled(8, 4, 3, ColorSpace::Srgb, 0.5).unwrap();
        assert!(solve_oracle_maps(&pair, &t, &t, GainBounds::default()).is_err());
    }
}
