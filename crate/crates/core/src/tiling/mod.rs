//! Tile planning, tiled execution with feathered overlaps, and a seam check.
//!
//! Stages that are pointwise given a shared [`GlobalContext`]
//! (crate::lite::GlobalContext) and full-frame-consistent maps produce the same
//! output tiled as untiled: every overlap pixel is a convex combination of
//! identical values.

mod plan;
mod run;
mod seams;

pub use plan::{
    feather_weight, plan_auto, plan_tiles, Margins, Tile, TilePlan, BYTES_PER_TILE_PIXEL, DEFAULT_BUDGET_BYTES,
    MIN_AUTO_OVERLAP,
};
pub use run::run_tiled;
pub use seams::{mean_gradient, seam_energy};

/// Grid selection as written on the command line: `RxC` or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpec {
    Auto,
    Fixed { rows: usize, cols: usize },
}

impl std::str::FromStr for GridSpec {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        if s == "auto" {
            return Ok(GridSpec::Auto);
        }
        let bad = || crate::Error::InvalidArgument(format!("tile grid {s:?} is not RxC or auto"));
        let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let dim = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(bad);
        Ok(GridSpec::Fixed {
            rows: dim(r)?,
            cols: dim(c)?,
        })
    }
}

impl GridSpec {
    pub fn plan(&self, w: usize, h: usize, overlap: usize, budget_bytes: usize) -> crate::Result<TilePlan> {
        match *self {
            GridSpec::Auto => plan_auto(w, h, overlap, budget_bytes),
            GridSpec::Fixed { rows, cols } => plan_tiles(w, h, rows, cols, overlap),
        }
    }
}
