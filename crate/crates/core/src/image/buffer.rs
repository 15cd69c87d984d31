use crate::{Error, Result};

/// Interpretation of the samples held by an [`ImageBuffer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    LinearRgb,
    Srgb,
    YCbCr,
    LumaOnly,
    BayerMosaic,
}

impl ColorSpace {
    /// Numeric tag used by the `.lfr` container.
    pub fn tag(self) -> u32 {
        match self {
            ColorSpace::LinearRgb => 0,
            ColorSpace::Srgb => 1,
            ColorSpace::YCbCr => 2,
            ColorSpace::LumaOnly => 3,
            ColorSpace::BayerMosaic => 4,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Some(match tag {
            0 => ColorSpace::LinearRgb,
            1 => ColorSpace::Srgb,
            2 => ColorSpace::YCbCr,
            3 => ColorSpace::LumaOnly,
            4 => ColorSpace::BayerMosaic,
            _ => return None,
        })
    }

    fn expected_channels(self) -> Option<usize> {
        match self {
            ColorSpace::LinearRgb | ColorSpace::Srgb | ColorSpace::YCbCr => Some(3),
            ColorSpace::LumaOnly | ColorSpace::BayerMosaic => Some(1),
        }
    }
}

/// Axis-aligned pixel rectangle, `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Rect::new(0, 0, width, height)
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }
}

/// Planar floating-point raster.
///
/// Samples are stored channel-major: channel `c`, row `y`, column `x` lives at
/// `data[c * width * height + y * width + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    colorspace: ColorSpace,
    data: Vec<f32>,
}

impl ImageBuffer {
    /// Builds a buffer from planar samples, validating the layout invariants.
    pub fn from_planar(
        width: usize,
        height: usize,
        channels: usize,
        colorspace: ColorSpace,
        data: Vec<f32>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "empty image {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!(
                "unsupported channel count {channels}"
            )));
        }
        if let Some(expected) = colorspace.expected_channels() {
            if expected != channels {
                return Err(Error::InvalidInput(format!(
                    "{colorspace:?} requires {expected} channel(s), got {channels}"
                )));
            }
        }
        if colorspace == ColorSpace::BayerMosaic && (width % 2 != 0 || height % 2 != 0) {
            return Err(Error::InvalidInput(format!(
                "Bayer mosaic must have even dimensions, got {width}x{height}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image samples".into()));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            colorspace,
            data,
        })
    }

    /// A buffer with every sample set to `value`.
    pub fn filled(
        width: usize,
        height: usize,
        channels: usize,
        colorspace: ColorSpace,
        value: f32,
    ) -> Result<Self> {
        Self::from_planar(
            width,
            height,
            channels,
            colorspace,
            vec![value; width * height * channels],
        )
    }

    /// Single-channel luma-tagged plane.
    pub fn plane(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        Self::from_planar(width, height, 1, ColorSpace::LumaOnly, data)
    }

    /// Builds a buffer by evaluating `f(channel, x, y)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        colorspace: ColorSpace,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, x, y));
                }
            }
        }
        Self::from_planar(width, height, channels, colorspace, data)
    }

    /// Stacks single-channel planes into one buffer.
    pub fn from_planes(planes: &[&ImageBuffer], colorspace: ColorSpace) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::InvalidInput("no planes".into()))?;
        let mut data = Vec::with_capacity(first.len() * planes.len());
        for p in planes {
            if p.channels != 1 || !p.same_size(first) {
                return Err(Error::ShapeMismatch(
                    "planes must be single-channel and equally sized".into(),
                ));
            }
            data.extend_from_slice(&p.data);
        }
        Self::from_planar(first.width, first.height, planes.len(), colorspace, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Number of pixels per channel.
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.pixel_count();
        &self.data[c * n..(c + 1) * n]
    }

    /// Extracts channel `c` as a luma-tagged plane.
    pub fn channel_plane(&self, c: usize) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 1,
            colorspace: ColorSpace::LumaOnly,
            data: self.channel(c).to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f32 {
        self.data[c * self.pixel_count() + y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, x: usize, y: usize, v: f32) {
        let n = self.pixel_count();
        self.data[c * n + y * self.width + x] = v;
    }

    pub fn same_size(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.same_size(other) && self.channels == other.channels
    }

    pub(crate) fn ensure_same_shape(&self, other: &ImageBuffer, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )))
        }
    }

    pub(crate) fn ensure_same_size(&self, other: &ImageBuffer, what: &str) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    /// Returns a copy carrying a different color-space tag.
    pub fn with_colorspace(mut self, colorspace: ColorSpace) -> Result<Self> {
        if let Some(expected) = colorspace.expected_channels() {
            if expected != self.channels {
                return Err(Error::InvalidInput(format!(
                    "cannot tag {}-channel image as {colorspace:?}",
                    self.channels
                )));
            }
        }
        self.colorspace = colorspace;
        Ok(self)
    }

    /// Applies `f` to every sample. The result must stay finite.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> ImageBuffer {
        let data: Vec<f32> = self.data.iter().map(|&v| f(v)).collect();
        debug_assert!(data.iter().all(|v| v.is_finite()));
        ImageBuffer {
            data,
            ..self.clone_header()
        }
    }

    /// Elementwise combination of two equally shaped buffers.
    pub fn zip_map(&self, other: &ImageBuffer, f: impl Fn(f32, f32) -> f32) -> Result<ImageBuffer> {
        self.ensure_same_shape(other, "zip_map")?;
        let data: Vec<f32> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Ok(ImageBuffer {
            data,
            ..self.clone_header()
        })
    }

    pub fn clamp01(&self) -> ImageBuffer {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Copies out the samples inside `rect`.
    pub fn crop(&self, rect: Rect) -> Result<ImageBuffer> {
        if rect.x1 > self.width || rect.y1 > self.height || rect.area() == 0 {
            return Err(Error::InvalidArgument(format!(
                "crop {rect:?} outside {}x{}",
                self.width, self.height
            )));
        }
        let (w, h) = (rect.width(), rect.height());
        let mut data = Vec::with_capacity(w * h * self.channels);
        for c in 0..self.channels {
            let plane = self.channel(c);
            for y in rect.y0..rect.y1 {
                data.extend_from_slice(&plane[y * self.width + rect.x0..y * self.width + rect.x1]);
            }
        }
        Ok(ImageBuffer {
            width: w,
            height: h,
            data,
            ..self.clone_header()
        })
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min_value(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    /// Mean of all samples, accumulated in f64.
    pub fn mean(&self) -> f64 {
        crate::image::sum_f64(self.data.iter().map(|&v| v as f64)) / self.data.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn clone_header(&self) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: self.channels,
            colorspace: self.colorspace,
            data: Vec::new(),
        }
    }

    /// Internal constructor for callers that already uphold the invariants.
    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        colorspace: ColorSpace,
        data: Vec<f32>,
    ) -> ImageBuffer {
        debug_assert_eq!(data.len(), width * height * channels);
        debug_assert!(data.iter().all(|v| v.is_finite()), "non-finite sample");
        ImageBuffer {
            width,
            height,
            channels,
            colorspace,
            data,
        }
    }
}
