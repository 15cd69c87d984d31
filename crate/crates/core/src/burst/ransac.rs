//! Homography estimation: normalized 4-point DLT hypotheses inside RANSAC,
//! refined by least squares over the consensus set.

use super::Homography;
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Point = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    pub iters: usize,
    /// Maximum forward reprojection error for an inlier, in pixels.
    pub inlier_px: f64,
    pub min_inliers: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            iters: 1000,
            inlier_px: 1.0,
            min_inliers: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomographyFit {
    pub homography: Homography,
    pub inliers: Vec<bool>,
}

impl HomographyFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

pub fn estimate_homography(src: &[Point], dst: &[Point], params: &RansacParams) -> Result<Homography> {
    fit_homography(src, dst, params).map(|f| f.homography)
}

/// RANSAC fit mapping `src` points onto `dst` points.
pub fn fit_homography(src: &[Point], dst: &[Point], params: &RansacParams) -> Result<HomographyFit> {
    if src.len() != dst.len() {
        return Err(Error::InvalidInput(format!(
            "{} source points vs {} destination points",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 4 {
        return Err(Error::EstimationFailed(format!(
            "need at least 4 correspondences, got {}",
            src.len()
        )));
    }
    let n = src.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(usize, f64, Homography)> = None;
    for _ in 0..params.iters.max(1) {
        let idx: Vec<usize> = if n == 4 {
            (0..4).collect()
        } else {
            sample(&mut rng, n, 4).into_vec()
        };
        let s: Vec<Point> = idx.iter().map(|&i| src[i]).collect();
        let d: Vec<Point> = idx.iter().map(|&i| dst[i]).collect();
        if degenerate(&s) || degenerate(&d) {
            continue;
        }
        let Some(h) = dlt(&s, &d) else { continue };
        let (count, err) = score(&h, src, dst, params.inlier_px);
        let better = match &best {
            None => true,
            Some((c, e, _)) => count > *c || (count == *c && err < *e),
        };
        if better {
            best = Some((count, err, h));
        }
        if n == 4 {
            break;
        }
    }
    let Some((_, _, mut h)) = best else {
        return Err(Error::EstimationFailed(
            "every sample was degenerate (collinear points)".into(),
        ));
    };
    let mut inliers = mask(&h, src, dst, params.inlier_px);
    for _ in 0..10 {
        let (s, d): (Vec<Point>, Vec<Point>) = inliers
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (src[i], dst[i]))
            .unzip();
        if s.len() < 4 {
            break;
        }
        let Some(refined) = dlt(&s, &d) else { break };
        let next = mask(&refined, src, dst, params.inlier_px);
        let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
        if count(&next) < count(&inliers) {
            break;
        }
        let converged = next == inliers;
        h = refined;
        inliers = next;
        if converged {
            break;
        }
    }
    let count = inliers.iter().filter(|&&b| b).count();
    if count < params.min_inliers.max(4) {
        return Err(Error::EstimationFailed(format!(
            "only {count} inliers, need {}",
            params.min_inliers.max(4)
        )));
    }
    Ok(HomographyFit {
        homography: h,
        inliers,
    })
}

pub fn reprojection_error(h: &Homography, s: Point, d: Point) -> f64 {
    let (x, y) = h.apply(s.0, s.1);
    ((x - d.0).powi(2) + (y - d.1).powi(2)).sqrt()
}

fn mask(h: &Homography, src: &[Point], dst: &[Point], tol: f64) -> Vec<bool> {
    src.iter()
        .zip(dst)
        .map(|(&s, &d)| reprojection_error(h, s, d) <= tol)
        .collect()
}

fn score(h: &Homography, src: &[Point], dst: &[Point], tol: f64) -> (usize, f64) {
    let mut count = 0;
    let mut err = 0.0;
    for (&s, &d) in src.iter().zip(dst) {
        let e = reprojection_error(h, s, d);
        if e <= tol {
            count += 1;
            err += e;
        }
    }
    (count, err)
}

/// True when any three of the points are (nearly) collinear.
fn degenerate(p: &[Point]) -> bool {
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            for c in b + 1..p.len() {
                let (ux, uy) = (p[b].0 - p[a].0, p[b].1 - p[a].1);
                let (vx, vy) = (p[c].0 - p[a].0, p[c].1 - p[a].1);
                let cross = (ux * vy - uy * vx).abs();
                let scale = (ux.hypot(uy) * vx.hypot(vy)).max(1e-300);
                if cross <= 1e-9 * scale {
                    return true;
                }
            }
        }
    }
    false
}

/// Similarity that moves the centroid to the origin with mean distance sqrt(2).
fn normalizer(p: &[Point]) -> [[f64; 3]; 3] {
    let n = p.len() as f64;
    let cx = p.iter().map(|q| q.0).sum::<f64>() / n;
    let cy = p.iter().map(|q| q.1).sum::<f64>() / n;
    let mean_d = p.iter().map(|q| (q.0 - cx).hypot(q.1 - cy)).sum::<f64>() / n;
    let s = if mean_d > 0.0 {
        std::f64::consts::SQRT_2 / mean_d
    } else {
        1.0
    };
    [[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]]
}

fn apply3(m: &[[f64; 3]; 3], p: Point) -> Point {
    (
        m[0][0] * p.0 + m[0][1] * p.1 + m[0][2],
        m[1][0] * p.0 + m[1][1] * p.1 + m[1][2],
    )
}

/// Normalized direct linear transform over all given correspondences.
pub fn dlt(src: &[Point], dst: &[Point]) -> Option<Homography> {
    let ts = normalizer(src);
    let td = normalizer(dst);
    let rows = (2 * src.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (&s, &d)) in src.iter().zip(dst).enumerate() {
        let (x, y) = apply3(&ts, s);
        let (u, v) = apply3(&td, d);
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let h = v_t.row(k);
    let hn = [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], h[8]]];
    // denormalize: H = Td^-1 * Hn * Ts
    let s = td[0][0];
    let td_inv = [
        [1.0 / s, 0.0, -td[0][2] / s],
        [0.0, 1.0 / s, -td[1][2] / s],
        [0.0, 0.0, 1.0],
    ];
    let m = mul(&mul(&td_inv, &hn), &ts);
    Homography::new(m).ok()
}

fn mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}
