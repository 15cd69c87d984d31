//! Handheld burst synthesis and homography alignment.

mod homography;
mod matcher;
mod pool;
mod ransac;
mod synth;

pub use homography::{valid_interior, warp, Homography};
pub use matcher::{match_corners, MatchParams};
pub use pool::{sample_handshake_group, synthetic_pool, HandshakeGroup, HandshakePool, SyntheticShake, GROUP_LEN};
pub use ransac::{dlt, estimate_homography, fit_homography, reprojection_error, HomographyFit, Point, RansacParams};
pub use synth::{add_sensor_noise, bayer_channel, demosaic_bilinear, mosaic_rggb, synthesize_burst, BurstSpec};

use crate::image::ImageBuffer;
use crate::Result;

/// Estimates the homography that aligns `moving` onto `reference` from
/// matched corner patches.
pub fn align(reference: &ImageBuffer, moving: &ImageBuffer, matching: &MatchParams, ransac: &RansacParams) -> Result<Homography> {
    let (src, dst) = match_corners(reference, moving, matching)?;
    estimate_homography(&src, &dst, ransac)
}
