//! Separable filters on f64 planes with clamped (replicated) borders.

/// Convolves a `w x h` plane with `kernel` along rows then columns.
///
/// `kernel` must have odd length; it is applied as-is without normalization.
pub fn separable(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let tmp = convolve_rows(data, w, h, kernel);
    convolve_cols(&tmp, w, h, kernel)
}

pub fn convolve_rows(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    debug_assert!(kernel.len() % 2 == 1);
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        let dst = &mut out[y * w..(y + 1) * w];
        for (x, d) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                acc += kv * row[sx];
            }
            *d = acc;
        }
    }
    out
}

pub fn convolve_cols(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    debug_assert!(kernel.len() % 2 == 1);
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let dst = &mut out[y * w..(y + 1) * w];
        for (k, &kv) in kernel.iter().enumerate() {
            let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
            let src = &data[sy * w..(sy + 1) * w];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += kv * s;
            }
        }
    }
    out
}

/// Normalized sampled Gaussian of the given radius.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Mean over a `(2r+1) x (2r+1)` window.
pub fn box_mean(data: &[f64], w: usize, h: usize, radius: usize) -> Vec<f64> {
    let n = 2 * radius + 1;
    let k = vec![1.0 / n as f64; n];
    separable(data, w, h, &k)
}

/// Absolute response of the 4-neighbour discrete Laplacian.
pub fn laplacian_abs(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |x: isize, y: isize| {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        data[yc * w + xc]
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let v = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4.0 * at(x, y);
            out[y as usize * w + x as usize] = v.abs();
        }
    }
    out
}
