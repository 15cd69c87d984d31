//! Core algorithms for a camera pipeline that fuses EV0/EV- exposures into a
//! linear HDR frame and tone-maps it with inference-time tunable enhancement.
//!
//! The crate is organised bottom-up:
//!
//! * [`image`]: planar rasters, color conversion, LUTs, resampling and pyramids.
//! * [`burst`]: handshake homography pools, burst synthesis, RANSAC alignment.
//! * [`fusion`]: exposure equalization, deghosting and Mertens fusion.
//! * [`lite`]: global image statistics and the two-exposure lightweight tone-map.
//! * [`reference`]: the slow synthetic-exposure-fusion tone-map used as a target.
//! * [`enhance`]: weight/gain maps, tuning LUTs and the luma/chroma fusion algebra.
//! * [`metrics`]: PSNR, SSIM, the adversarial perceptual loss and composite losses.
//! * [`tiling`]: tile planning, tiled execution with feathered overlaps, seam checks.
//! * [`pipeline`]: configuration file and the end-to-end tone path.
//! * [`scene`]: seeded synthetic HDR test scenes.

pub mod burst;
pub mod enhance;
mod error;
pub mod fusion;
pub mod image;
pub mod lite;
pub mod metrics;
pub mod pipeline;
pub mod reference;
pub mod scene;
pub mod tiling;

pub use error::{Error, Result};
pub use image::{ColorSpace, ImageBuffer, Lut1D, Pyramid};
