use super::{ColorSpace, ImageBuffer};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Piecewise-linear curve on `[0, 1]` defined by ordered control points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f32; 2]>", into = "Vec<[f32; 2]>")]
pub struct Lut1D {
    points: Vec<(f32, f32)>,
}

impl Lut1D {
    pub fn identity() -> Self {
        Lut1D {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// Validates and wraps a control point list.
    pub fn new(points: Vec<(f32, f32)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidLut(format!(
                "need at least 2 control points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidLut("non-finite control point".into()));
        }
        if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
            return Err(Error::InvalidLut("endpoints must sit at x=0 and x=1".into()));
        }
        if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidLut(format!(
                "x must be strictly increasing (point {})",
                i + 1
            )));
        }
        if let Some(i) = points.iter().position(|(_, y)| !(0.0..=1.0).contains(y)) {
            return Err(Error::InvalidLut(format!("point {i} has y outside [0,1]")));
        }
        Ok(Lut1D { points })
    }

    pub fn points(&self) -> &[(f32, f32)] {
        &self.points
    }

    pub fn is_identity(&self) -> bool {
        self.points.iter().all(|(x, y)| x == y)
    }

    /// Evaluates the curve at `x`, clamped to `[0, 1]` first.
    #[inline]
    pub fn eval(&self, x: f32) -> f32 {
        let x = x.clamp(0.0, 1.0);
        let pts = &self.points;
        // first index with px > x, so the segment is [i - 1, i]
        let i = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        let t = (x - x0) / (x1 - x0);
        y0 + t * (y1 - y0)
    }

    /// `out[p] = lut(clamp(in[p], 0, 1))` on a single-channel plane.
    pub fn apply(&self, plane: &ImageBuffer) -> Result<ImageBuffer> {
        if plane.channels() != 1 {
            return Err(Error::InvalidInput(format!(
                "apply_lut expects 1 channel, got {}",
                plane.channels()
            )));
        }
        let data = plane.data().iter().map(|&v| self.eval(v)).collect();
        Ok(ImageBuffer::from_parts_unchecked(
            plane.width(),
            plane.height(),
            1,
            if plane.colorspace() == ColorSpace::BayerMosaic {
                ColorSpace::LumaOnly
            } else {
                plane.colorspace()
            },
            data,
        ))
    }
}

impl Default for Lut1D {
    fn default() -> Self {
        Lut1D::identity()
    }
}

impl TryFrom<Vec<[f32; 2]>> for Lut1D {
    type Error = Error;

    fn try_from(value: Vec<[f32; 2]>) -> Result<Self> {
        Lut1D::new(value.into_iter().map(|[x, y]| (x, y)).collect())
    }
}

impl From<Lut1D> for Vec<[f32; 2]> {
    fn from(lut: Lut1D) -> Self {
        lut.points.into_iter().map(|(x, y)| [x, y]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(values: Vec<f32>) -> ImageBuffer {
        let n = values.len();
        ImageBuffer::plane(n, 1, values).unwrap()
    }

    #[test]
    fn identity_is_bitwise() {
        let p = plane(vec![0.0, 0.123_456_7, 0.5, 0.999_999, 1.0]);
        assert_eq!(Lut1D::identity().apply(&p).unwrap().data(), p.data());
    }

    #[test]
    fn linear_scaling() {
        let lut = Lut1D::new(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
        let out = lut.apply(&plane(vec![0.5; 4])).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn interpolates_first_segment() {
        let lut = Lut1D::new(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]).unwrap();
        assert!((lut.eval(0.25) - 0.4).abs() < 1e-7);
        assert!((lut.eval(0.75) - 0.9).abs() < 1e-7);
        assert_eq!(lut.eval(-3.0), 0.0);
        assert_eq!(lut.eval(7.0), 1.0);
    }

    #[test]
    fn malformed_luts_are_rejected() {
        for pts in [
            vec![(0.0, 0.0)],
            vec![(0.1, 0.0), (1.0, 1.0)],
            vec![(0.0, 0.0), (0.9, 1.0)],
            vec![(0.0, 0.0), (0.6, 0.5), (0.4, 0.6), (1.0, 1.0)],
            vec![(0.0, 0.0), (0.5, 0.5), (0.5, 0.6), (1.0, 1.0)],
            vec![(0.0, 0.0), (0.5, 1.5), (1.0, 1.0)],
        ] {
            assert!(matches!(Lut1D::new(pts), Err(Error::InvalidLut(_))));
        }
    }

    proptest! {
        #[test]
        fn identity_composition(values in proptest::collection::vec(-0.5f32..1.5, 1..64),
                                mid in 0.01f32..0.99, y in 0.0f32..=1.0) {
            let lut = Lut1D::new(vec![(0.0, 0.0), (mid, y), (1.0, 1.0)]).unwrap();
            let p = plane(values);
            let direct = lut.apply(&p).unwrap();
            let composed = lut.apply(&Lut1D::identity().apply(&p).unwrap()).unwrap();
            prop_assert_eq!(direct.data(), composed.data());
        }

        #[test]
        fn monotone_lut_preserves_order(a in 0.0f32..=1.0, b in 0.0f32..=1.0, mid in 0.01f32..0.99, y in 0.0f32..=1.0) {
            let lut = Lut1D::new(vec![(0.0, 0.0), (mid, y), (1.0, 1.0)]).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(lut.eval(lo) <= lut.eval(hi));
        }
    }
}
