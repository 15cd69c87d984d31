use super::{feather_weight, Tile, TilePlan};
use crate::image::{ColorSpace, ImageBuffer};
use crate::{Error, Result};
use rayon::prelude::*;

/// Runs `stage` on every outer tile of `plan` and feather-blends the results.
///
/// `stage` receives the tile and the crop of `input` under its outer rect and
/// must return an image of the outer rect's size. Tiles run in parallel in
/// batches of `batch` (the current rayon pool size when `None`); accumulation
/// happens in tile order after each batch, so the output does not depend on
/// scheduling.
pub fn run_tiled<F>(input: &ImageBuffer, plan: &TilePlan, batch: Option<usize>, stage: F) -> Result<ImageBuffer>
where
    F: Fn(&Tile, &ImageBuffer) -> Result<ImageBuffer> + Sync,
{
    if input.dims() != (plan.width, plan.height) {
        return Err(Error::ShapeMismatch(format!(
            "plan is {}x{}, input {:?}",
            plan.width,
            plan.height,
            input.dims()
        )));
    }
    let (w, h) = input.dims();
    let batch = batch.unwrap_or_else(rayon::current_num_threads).max(1);
    let mut acc: Option<(usize, ColorSpace, Vec<f64>)> = None;
    let mut wsum = vec![0.0f64; w * h];

    for chunk in plan.tiles.chunks(batch) {
        let outs: Vec<Result<ImageBuffer>> = chunk
            .par_iter()
            .map(|t| {
                let tin = input.crop(t.outer)?;
                let out = stage(t, &tin)?;
                if out.dims() != (t.outer.width(), t.outer.height()) {
                    return Err(Error::ShapeMismatch(format!(
                        "stage returned {:?} for a {}x{} tile",
                        out.dims(),
                        t.outer.width(),
                        t.outer.height()
                    )));
                }
                Ok(out)
            })
            .collect();
        for (t, out) in chunk.iter().zip(outs) {
            let out = out.map_err(|e| Error::TileFailed { index: t.index, source: Box::new(e) })?;
            let (c, cs, data) = acc.get_or_insert_with(|| (out.channels(), out.colorspace(), vec![0.0; w * h * out.channels()]));
            if out.channels() != *c || out.colorspace() != *cs {
                return Err(Error::TileFailed {
                    index: t.index,
                    source: Box::new(Error::ShapeMismatch("tiles disagree on channels or color space".into())),
                });
            }
            accumulate(t, &out, data, &mut wsum, w, h);
        }
    }

    let (c, cs, data) = acc.ok_or_else(|| Error::InvalidArgument("plan has no tiles".into()))?;
    let n = w * h;
    let out = (0..c * n).map(|i| (data[i] / wsum[i % n]) as f32).collect();
    ImageBuffer::from_planar(w, h, c, cs, out)
}

fn accumulate(t: &Tile, out: &ImageBuffer, data: &mut [f64], wsum: &mut [f64], w: usize, h: usize) {
    let (tw, th) = out.dims();
    let n = w * h;
    for ty in 0..th {
        let y = t.outer.y0 + ty;
        for tx in 0..tw {
            let x = t.outer.x0 + tx;
            let wt = feather_weight(t, x, y);
            wsum[y * w + x] += wt;
            for c in 0..out.channels() {
                data[c * n + y * w + x] += wt * out.channel(c)[ty * tw + tx] as f64;
            }
        }
    }
}
