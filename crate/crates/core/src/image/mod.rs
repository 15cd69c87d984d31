//! Raster types and the shared image-processing machinery: color conversion,
//! piecewise-linear LUTs, resampling, separable filters and pyramids.

mod buffer;
mod color;
pub mod filter;
pub mod io;
mod lut;
mod pyramid;
mod resample;

pub use buffer::{ColorSpace, ImageBuffer, Rect};
pub use color::{luma, luma_of, rgb_to_ycbcr, ycbcr_to_rgb, LUMA_B, LUMA_G, LUMA_R};
pub(crate) use color::{rgb_to_ycc_px, ycc_to_rgb_px};
pub use lut::Lut1D;
pub use pyramid::{max_levels, Band, Pyramid, PyramidKind};
pub use resample::{resize_bilinear, resize_bilinear_region};

/// Deterministic blocked pairwise summation.
///
/// The result depends only on the sequence of values, never on scheduling.
pub fn sum_f64(values: impl IntoIterator<Item = f64>) -> f64 {
    const BLOCK: usize = 256;
    let mut partials = Vec::new();
    let mut acc = 0.0;
    let mut n = 0;
    for v in values {
        acc += v;
        n += 1;
        if n == BLOCK {
            partials.push(acc);
            acc = 0.0;
            n = 0;
        }
    }
    if n > 0 {
        partials.push(acc);
    }
    pairwise(&partials)
}

fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise(&xs[..n / 2]) + pairwise(&xs[n / 2..]),
    }
}
