use super::TilePlan;
use crate::image::{sum_f64, ImageBuffer};
use crate::{Error, Result};

/// Mean absolute one-pixel gradient across inner tile boundaries minus the
/// mean absolute gradient one pixel to either side of them.
///
/// Boundary differences are `I(b) - I(b-1)`; the matched off-boundary
/// differences are `I(b-1) - I(b-2)` and `I(b+1) - I(b)`, sampled on the same
/// rows (columns). A tile-wise step shows up as a positive excess while smooth
/// content cancels to second order. Boundaries closer than two pixels to the
/// frame edge are skipped.
pub fn seam_energy(img: &ImageBuffer, plan: &TilePlan) -> Result<f64> {
    if img.dims() != (plan.width, plan.height) {
        return Err(Error::ShapeMismatch(format!(
            "plan is {}x{}, image {:?}",
            plan.width,
            plan.height,
            img.dims()
        )));
    }
    let (w, h) = img.dims();
    let xs: Vec<usize> = plan.column_boundaries().into_iter().filter(|&b| b >= 2 && b + 1 < w).collect();
    let ys: Vec<usize> = plan.row_boundaries().into_iter().filter(|&b| b >= 2 && b + 1 < h).collect();
    let mut on = Vec::new();
    let mut off = Vec::new();
    for c in 0..img.channels() {
        let p = img.channel(c);
        let at = |x: usize, y: usize| p[y * w + x] as f64;
        for &b in &xs {
            for y in 0..h {
                on.push((at(b, y) - at(b - 1, y)).abs());
                off.push(0.5 * ((at(b - 1, y) - at(b - 2, y)).abs() + (at(b + 1, y) - at(b, y)).abs()));
            }
        }
        for &b in &ys {
            for x in 0..w {
                on.push((at(x, b) - at(x, b - 1)).abs());
                off.push(0.5 * ((at(x, b - 1) - at(x, b - 2)).abs() + (at(x, b + 1) - at(x, b)).abs()));
            }
        }
    }
    if on.is_empty() {
        return Ok(0.0);
    }
    let n = on.len() as f64;
    Ok((sum_f64(on) - sum_f64(off)) / n)
}

/// Mean absolute one-pixel gradient over the whole frame (both axes).
pub fn mean_gradient(img: &ImageBuffer) -> f64 {
    let (w, h) = img.dims();
    let mut total = 0.0;
    let mut count = 0usize;
    for c in 0..img.channels() {
        let p = img.channel(c);
        let dx = (0..h).flat_map(|y| (1..w).map(move |x| (p[y * w + x] - p[y * w + x - 1]).abs() as f64));
        let dy = (1..h).flat_map(|y| (0..w).map(move |x| (p[y * w + x] - p[(y - 1) * w + x]).abs() as f64));
        total += sum_f64(dx) + sum_f64(dy);
        count += h * (w.saturating_sub(1)) + w * (h.saturating_sub(1));
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}
