//! Seeded synthetic HDR scenes: a sky-to-floor illumination gradient, lit
//! elliptical objects spanning several stops, fine texture, and a few small
//! bright sources well above 1.

use crate::image::{ColorSpace, ImageBuffer};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Blob {
    cx: f32,
    cy: f32,
    rx: f32,
    ry: f32,
    level: f32,
    tint: [f32; 3],
    freq: f32,
}

/// Linear RGB radiance, roughly 1e-3 to 30.
pub fn synthetic_hdr(w: usize, h: usize, seed: u64) -> Result<ImageBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sky: f32 = rng.random_range(0.5..3.0);
    let floor: f32 = rng.random_range(0.01..0.08);
    let n_blobs = rng.random_range(4..9);
    let scale = w.max(h) as f32;
    let mut blobs: Vec<Blob> = (0..n_blobs)
        .map(|_| Blob {
            cx: rng.random_range(0.0..w as f32),
            cy: rng.random_range(0.0..h as f32),
            rx: rng.random_range(0.05..0.3) * scale,
            ry: rng.random_range(0.05..0.3) * scale,
            level: 2f32.powf(rng.random_range(-6.0..2.0)),
            tint: [rng.random_range(0.4..1.0), rng.random_range(0.4..1.0), rng.random_range(0.4..1.0)],
            freq: rng.random_range(0.05..0.4),
        })
        .collect();
    for _ in 0..rng.random_range(1..4) {
        let r = rng.random_range(0.01..0.03) * scale;
        blobs.push(Blob {
            cx: rng.random_range(0.0..w as f32),
            cy: rng.random_range(0.0..h as f32),
            rx: r,
            ry: r,
            level: rng.random_range(8.0..30.0),
            tint: [1.0, rng.random_range(0.8..1.0), rng.random_range(0.6..0.9)],
            freq: 0.0,
        });
    }
    let phase: f32 = rng.random_range(0.0..6.28);
    ImageBuffer::from_fn(w, h, 3, ColorSpace::LinearRgb, |c, x, y| {
        let (xf, yf) = (x as f32, y as f32);
        let t = yf / h as f32;
        let mut v = sky * (1.0 - t) + floor * t;
        v *= [0.85, 0.95, 1.1][c] * (1.0 - t) + [1.0, 0.9, 0.8][c] * t;
        for b in &blobs {
            let dx = (xf - b.cx) / b.rx;
            let dy = (yf - b.cy) / b.ry;
            let d2 = dx * dx + dy * dy;
            if d2 < 1.0 {
                let edge = ((1.0 - d2) * 8.0).min(1.0);
                let tex = 1.0 + 0.35 * (xf * b.freq + phase).sin() * (yf * b.freq * 0.8).cos();
                let obj = b.level * b.tint[c] * tex;
                v = v * (1.0 - edge) + obj * edge;
            }
        }
        v.max(1e-4)
    })
}
