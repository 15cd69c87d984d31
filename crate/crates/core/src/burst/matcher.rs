//! Corner-patch correspondences: Harris corners on the reference, ZNCC block
//! search in the moving frame, parabolic subpixel refinement.

use super::ransac::Point;
use crate::image::{filter, luma_of, ImageBuffer};
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct MatchParams {
    /// Corners are picked one per cell of a `grid x grid` layout.
    pub grid: usize,
    pub patch_radius: usize,
    pub search_radius: usize,
    pub min_zncc: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            grid: 12,
            patch_radius: 5,
            search_radius: 16,
            min_zncc: 0.8,
        }
    }
}

/// Returns `(moving, reference)` point pairs, so a homography fitted from
/// the first to the second aligns `moving` to `reference` via [`super::warp`].
pub fn match_corners(
    reference: &ImageBuffer,
    moving: &ImageBuffer,
    params: &MatchParams,
) -> Result<(Vec<Point>, Vec<Point>)> {
    reference.ensure_same_size(moving, "match_corners")?;
    if params.grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let (w, h) = reference.dims();
    let margin = params.patch_radius + params.search_radius + 1;
    if w <= 2 * margin || h <= 2 * margin {
        return Err(Error::InvalidInput(format!(
            "{w}x{h} frame is too small for corner matching"
        )));
    }
    let to_f64 = |img: &ImageBuffer| -> Vec<f64> {
        let y = if img.channels() == 3 { luma_of(img) } else { img.clone() };
        y.data().iter().map(|&v| v as f64).collect()
    };
    let a = to_f64(reference);
    let b = to_f64(moving);
    let corners = select_corners(&a, w, h, margin, params.grid);
    let found: Vec<(Point, Point)> = corners
        .par_iter()
        .filter_map(|&(x, y)| {
            track(&a, &b, w, x, y, params).map(|(mx, my)| ((mx, my), (x as f64, y as f64)))
        })
        .collect();
    Ok(found.into_iter().unzip())
}

fn harris(img: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut ix = vec![0.0; w * h];
    let mut iy = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            ix[i] = 0.5 * (img[i + 1] - img[i - 1]);
            iy[i] = 0.5 * (img[i + w] - img[i - w]);
        }
    }
    let k = filter::gaussian_kernel(1.5, 4);
    let sxx = filter::separable(&ix.iter().map(|v| v * v).collect::<Vec<_>>(), w, h, &k);
    let syy = filter::separable(&iy.iter().map(|v| v * v).collect::<Vec<_>>(), w, h, &k);
    let sxy = filter::separable(
        &ix.iter().zip(&iy).map(|(a, b)| a * b).collect::<Vec<_>>(),
        w,
        h,
        &k,
    );
    (0..w * h)
        .map(|i| {
            let tr = sxx[i] + syy[i];
            sxx[i] * syy[i] - sxy[i] * sxy[i] - 0.04 * tr * tr
        })
        .collect()
}

fn select_corners(img: &[f64], w: usize, h: usize, margin: usize, grid: usize) -> Vec<(usize, usize)> {
    let r = harris(img, w, h);
    let (iw, ih) = (w - 2 * margin, h - 2 * margin);
    let mut out = Vec::new();
    for gy in 0..grid {
        for gx in 0..grid {
            let x0 = margin + gx * iw / grid;
            let x1 = margin + (gx + 1) * iw / grid;
            let y0 = margin + gy * ih / grid;
            let y1 = margin + (gy + 1) * ih / grid;
            let mut best: Option<(f64, usize, usize)> = None;
            for y in y0..y1 {
                for x in x0..x1 {
                    let v = r[y * w + x];
                    if best.is_none_or(|(b, _, _)| v > b) {
                        best = Some((v, x, y));
                    }
                }
            }
            if let Some((v, x, y)) = best {
                if v > 1e-10 {
                    out.push((x, y));
                }
            }
        }
    }
    out
}

fn patch(img: &[f64], w: usize, cx: usize, cy: usize, r: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity((2 * r + 1).pow(2));
    for y in cy - r..=cy + r {
        p.extend_from_slice(&img[y * w + cx - r..=y * w + cx + r]);
    }
    p
}

fn zncc(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (p, q) = (x - ma, y - mb);
        num += p * q;
        da += p * p;
        db += q * q;
    }
    let den = (da * db).sqrt();
    if den < 1e-18 {
        0.0
    } else {
        num / den
    }
}

fn track(a: &[f64], b: &[f64], w: usize, x: usize, y: usize, p: &MatchParams) -> Option<Point> {
    let r = p.patch_radius;
    let s = p.search_radius as isize;
    let tpl = patch(a, w, x, y, r);
    let side = 2 * s as usize + 1;
    let mut scores = vec![f64::NEG_INFINITY; side * side];
    let mut best = (f64::NEG_INFINITY, 0isize, 0isize);
    for dy in -s..=s {
        for dx in -s..=s {
            let (mx, my) = ((x as isize + dx) as usize, (y as isize + dy) as usize);
            let v = zncc(&tpl, &patch(b, w, mx, my, r));
            scores[((dy + s) as usize) * side + (dx + s) as usize] = v;
            if v > best.0 {
                best = (v, dx, dy);
            }
        }
    }
    let (score, dx, dy) = best;
    if score < p.min_zncc {
        return None;
    }
    let at = |dx: isize, dy: isize| scores[((dy + s) as usize) * side + (dx + s) as usize];
    let refine = |m: f64, c: f64, pl: f64| {
        let den = m - 2.0 * c + pl;
        if den < 0.0 {
            (0.5 * (m - pl) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let fx = if dx.abs() < s { refine(at(dx - 1, dy), score, at(dx + 1, dy)) } else { 0.0 };
    let fy = if dy.abs() < s { refine(at(dx, dy - 1), score, at(dx, dy + 1)) } else { 0.0 };
    Some((x as f64 + dx as f64 + fx, y as f64 + dy as f64 + fy))
}
