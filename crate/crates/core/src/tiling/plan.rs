use crate::image::Rect;
use crate::{Error, Result};

/// Minimum overlap picked by automatic planning.
pub const MIN_AUTO_OVERLAP: usize = 50;
/// Default per-tile working-set budget for automatic planning.
pub const DEFAULT_BUDGET_BYTES: usize = 256 << 20;
/// Working-set estimate per outer-tile pixel: the HDR input, both Lite
/// exposures, four map planes, two outputs and scratch, all f32.
pub const BYTES_PER_TILE_PIXEL: usize = 24 * 4;

/// Per-edge overlap actually granted to a tile (zero at frame borders).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Margins {
    pub left: usize,
    pub top: usize,
    pub right: usize,
    pub bottom: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub inner: Rect,
    pub outer: Rect,
    pub margins: Margins,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    pub width: usize,
    pub height: usize,
    pub rows: usize,
    pub cols: usize,
    pub overlap: usize,
    pub tiles: Vec<Tile>,
}

/// Splits `n` into `parts` near-equal runs, remainder going to the leading runs.
fn split(n: usize, parts: usize) -> Vec<(usize, usize)> {
    let (q, r) = (n / parts, n % parts);
    let mut out = Vec::with_capacity(parts);
    let mut at = 0;
    for i in 0..parts {
        let len = q + usize::from(i < r);
        out.push((at, at + len));
        at += len;
    }
    out
}

pub fn plan_tiles(w: usize, h: usize, rows: usize, cols: usize, overlap: usize) -> Result<TilePlan> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!("tile grid {rows}x{cols} is empty")));
    }
    if cols > w || rows > h {
        return Err(Error::InvalidArgument(format!(
            "tile grid {rows}x{cols} is larger than the {w}x{h} frame"
        )));
    }
    let overlap = if rows == 1 && cols == 1 { 0 } else { overlap };
    let xs = split(w, cols);
    let ys = split(h, rows);
    let mut tiles = Vec::with_capacity(rows * cols);
    for (row, &(y0, y1)) in ys.iter().enumerate() {
        for (col, &(x0, x1)) in xs.iter().enumerate() {
            let outer = Rect::new(
                x0.saturating_sub(overlap),
                y0.saturating_sub(overlap),
                (x1 + overlap).min(w),
                (y1 + overlap).min(h),
            );
            let margins = Margins {
                left: x0 - outer.x0,
                top: y0 - outer.y0,
                right: outer.x1 - x1,
                bottom: outer.y1 - y1,
            };
            tiles.push(Tile {
                index: tiles.len(),
                row,
                col,
                inner: Rect::new(x0, y0, x1, y1),
                outer,
                margins,
            });
        }
    }
    Ok(TilePlan { width: w, height: h, rows, cols, overlap, tiles })
}

/// Smallest square grid whose largest outer tile fits `budget_bytes`.
pub fn plan_auto(w: usize, h: usize, overlap: usize, budget_bytes: usize) -> Result<TilePlan> {
    let overlap = overlap.max(MIN_AUTO_OVERLAP);
    let mut n = 1;
    loop {
        let plan = plan_tiles(w, h, n.min(h), n.min(w), overlap)?;
        let worst = plan.tiles.iter().map(|t| t.outer.area()).max().unwrap_or(0);
        if worst * BYTES_PER_TILE_PIXEL <= budget_bytes || (n >= w && n >= h) {
            return Ok(plan);
        }
        n += 1;
    }
}

impl TilePlan {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Inner boundaries: x positions where a column of tiles starts (excluding 0).
    pub fn column_boundaries(&self) -> Vec<usize> {
        self.tiles.iter().filter(|t| t.row == 0 && t.col > 0).map(|t| t.inner.x0).collect()
    }

    pub fn row_boundaries(&self) -> Vec<usize> {
        self.tiles.iter().filter(|t| t.col == 0 && t.row > 0).map(|t| t.inner.y0).collect()
    }
}

/// Blend weight of `tile` at frame pixel `(x, y)` inside its outer rect.
///
/// Along each axis the weight ramps linearly across twice the granted
/// margin, so two neighbors crossfade over the full overlap band and sum to 1.
pub fn feather_weight(tile: &Tile, x: usize, y: usize) -> f64 {
    ramp(x, tile.outer.x0, tile.outer.x1, tile.margins.left, tile.margins.right)
        * ramp(y, tile.outer.y0, tile.outer.y1, tile.margins.top, tile.margins.bottom)
}

fn ramp(v: usize, lo: usize, hi: usize, m_lo: usize, m_hi: usize) -> f64 {
    let c = v as f64 + 0.5;
    let a = if m_lo == 0 { 1.0 } else { ((c - lo as f64) / (2 * m_lo) as f64).min(1.0) };
    let b = if m_hi == 0 { 1.0 } else { ((hi as f64 - c) / (2 * m_hi) as f64).min(1.0) };
    a * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_grid_of_a_twelve_megapixel_frame() {
        let p = plan_tiles(4000, 3000, 4, 4, 50).unwrap();
        assert_eq!(p.len(), 16);
        for t in &p.tiles {
            assert_eq!(t.inner.width(), 1000);
            assert_eq!(t.inner.height(), 750);
        }
        assert_eq!(p.tiles[5].outer, Rect::new(950, 700, 2050, 1550));
    }

    #[test]
    fn remainder_goes_to_leading_tiles() {
        let p = plan_tiles(100, 100, 3, 3, 10).unwrap();
        let widths: Vec<usize> = p.tiles[..3].iter().map(|t| t.inner.width()).collect();
        assert_eq!(widths, vec![34, 33, 33]);
        assert_eq!(p.tiles[0].outer, Rect::new(0, 0, 44, 44));
        assert_eq!(p.tiles[8].outer, Rect::new(57, 57, 100, 100));
    }

    #[test]
    fn single_tile_ignores_overlap() {
        let p = plan_tiles(64, 48, 1, 1, 50).unwrap();
        assert_eq!(p.tiles[0].outer, Rect::full(64, 48));
        assert_eq!(p.overlap, 0);
    }

    #[test]
    fn oversized_grid_is_rejected() {
        assert!(plan_tiles(3, 100, 2, 4, 0).is_err());
        assert!(plan_tiles(10, 10, 0, 1, 0).is_err());
    }

    #[test]
    fn auto_plan_honors_budget() {
        let p = plan_auto(4000, 3000, 0, DEFAULT_BUDGET_BYTES).unwrap();
        assert!(p.overlap >= MIN_AUTO_OVERLAP);
        let worst = p.tiles.iter().map(|t| t.outer.area()).max().unwrap();
        assert!(worst * BYTES_PER_TILE_PIXEL <= DEFAULT_BUDGET_BYTES);
        let smaller = plan_tiles(4000, 3000, p.rows - 1, p.cols - 1, p.overlap).unwrap();
        assert!(smaller.tiles.iter().map(|t| t.outer.area()).max().unwrap() * BYTES_PER_TILE_PIXEL > DEFAULT_BUDGET_BYTES);
    }

    #[test]
    fn neighbor_weights_sum_to_one() {
        let p = plan_tiles(40, 10, 1, 2, 6).unwrap();
        for x in 0..40 {
            let s: f64 = p
                .tiles
                .iter()
                .filter(|t| t.outer.contains(x, 5))
                .map(|t| feather_weight(t, x, 5))
                .sum();
            assert!((s - 1.0).abs() < 1e-12, "x={x} sum={s}");
        }
    }
}
