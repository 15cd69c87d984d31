use super::{ToneMaps, TuningProfile};
use crate::image::{ycbcr_to_rgb, ColorSpace, ImageBuffer};
use crate::lite::ExposurePair;
use crate::{Error, Result};

/// Profile-modulated planes: `G_phi(W_y)`, `H_theta0(S0_y)`, `H_theta1(S1_y)`
/// and `(1 - S) + S * G`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulated {
    pub w_y: Vec<f32>,
    pub s0_y: Vec<f32>,
    pub s1_y: Vec<f32>,
    pub g: Vec<f32>,
}

fn check(maps: &ToneMaps, pair: &ExposurePair, prof: &TuningProfile) -> Result<()> {
    if maps.dims() != pair.dims() {
        return Err(Error::ShapeMismatch(format!(
            "maps are {:?}, exposures {:?}",
            maps.dims(),
            pair.dims()
        )));
    }
    if let super::Strength::Map(m) = &prof.strength {
        if m.dims() != pair.dims() {
            return Err(Error::ShapeMismatch("strength map size differs from the exposures".into()));
        }
    }
    prof.strength.validate()
}

#[inline]
fn modulate_gain(g: f32, s: f32) -> f32 {
    ((1.0 - s as f64) + s as f64 * g as f64) as f32
}

pub fn modulate(maps: &ToneMaps, pair: &ExposurePair, prof: &TuningProfile) -> Result<Modulated> {
    check(maps, pair, prof)?;
    let lut = |l: &crate::image::Lut1D, d: &[f32]| -> Vec<f32> {
        if l.is_identity() {
            d.to_vec()
        } else {
            d.iter().map(|&v| l.eval(v)).collect()
        }
    };
    let g = maps
        .g
        .data()
        .iter()
        .enumerate()
        .map(|(i, &g)| modulate_gain(g, prof.strength.at(i)))
        .collect();
    Ok(Modulated {
        w_y: lut(&prof.lut_weight, maps.w_y.data()),
        s0_y: lut(&prof.lut_exp0, pair.s0_y()),
        s1_y: lut(&prof.lut_exp1, pair.s1_y()),
        g,
    })
}

/// Unclamped YCbCr results: `(I, I_tilde)`.
pub fn fuse_tone_ycc(pair: &ExposurePair, maps: &ToneMaps, prof: &TuningProfile) -> Result<(ImageBuffer, ImageBuffer)> {
    let m = modulate(maps, pair, prof)?;
    let (w, h) = pair.dims();
    let n = w * h;
    let (c0b, c0r) = pair.chroma(0);
    let (c1b, c1r) = pair.chroma(1);
    let (wc0, wc1) = (maps.w_c0.data(), maps.w_c1.data());
    let mut i_data = vec![0.0f32; 3 * n];
    let mut t_data = vec![0.0f32; 3 * n];
    for p in 0..n {
        let wy = m.w_y[p] as f64;
        let iy = (wy * m.s0_y[p] as f64 + (1.0 - wy) * m.s1_y[p] as f64) as f32;
        let (a, b) = (wc0[p] as f64, wc1[p] as f64);
        let cb = (a * c0b[p] as f64 + b * c1b[p] as f64) as f32;
        let cr = (a * c0r[p] as f64 + b * c1r[p] as f64) as f32;
        i_data[p] = iy;
        i_data[n + p] = cb;
        i_data[2 * n + p] = cr;
        t_data[p] = (iy as f64 * m.g[p] as f64) as f32;
        t_data[n + p] = cb;
        t_data[2 * n + p] = cr;
    }
    Ok((
        ImageBuffer::from_parts_unchecked(w, h, 3, ColorSpace::YCbCr, i_data),
        ImageBuffer::from_parts_unchecked(w, h, 3, ColorSpace::YCbCr, t_data),
    ))
}

pub fn ycc_to_display(ycc: &ImageBuffer) -> Result<ImageBuffer> {
    ycbcr_to_rgb(ycc)?.clamp01().with_colorspace(ColorSpace::Srgb)
}

/// The fused tone-map `I` and its contrast-enhanced version `I_tilde`, as
/// display RGB clamped to `[0, 1]`.
pub fn fuse_tone(pair: &ExposurePair, maps: &ToneMaps, prof: &TuningProfile) -> Result<(ImageBuffer, ImageBuffer)> {
    let (i, t) = fuse_tone_ycc(pair, maps, prof)?;
    Ok((ycc_to_display(&i)?, ycc_to_display(&t)?))
}
