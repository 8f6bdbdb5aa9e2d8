//! Event images and label masks.
//!
//! Both are row-major grids: pixel `(row, col)` lives at `row * width + col`.
//! Columns run along the wire axis, rows along the drift (time) axis.

use alloc::vec::Vec;

/// Label code of a noise pixel (negative class).
pub const NOISE: u8 = 0;
/// Label code of a track pixel (positive class).
pub const TRACK: u8 = 1;
/// Label code of a pixel nobody has labeled yet.
pub const UNLABELED: u8 = 255;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} pixels for the given dimensions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite amplitude at pixel index {index}")]
    NonFinite { index: usize },
    #[error("invalid label code {code} at pixel index {index}")]
    InvalidLabel { index: usize, code: u8 },
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyDimensions { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(ImageError::EmptyDimensions { width, height })?;
    if expected != len {
        return Err(ImageError::LengthMismatch {
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// One wire-plane view of one event: a grid of finite signal amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct EventImage {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl EventImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        if let Some(index) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f32> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * self.width + col]
    }

    /// Pixel at a possibly out-of-range position, clamped to the nearest edge.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> f32 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.pixels[r * self.width + c]
    }

    /// Smallest and largest amplitude.
    pub fn min_max(&self) -> (f32, f32) {
        self.pixels
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Per-pixel ground truth: [`NOISE`], [`TRACK`] or [`UNLABELED`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, labels.len())?;
        if let Some(index) = labels
            .iter()
            .position(|&c| !matches!(c, NOISE | TRACK | UNLABELED))
        {
            return Err(ImageError::InvalidLabel {
                index,
                code: labels[index],
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// A mask of the given size with every pixel set to `code`.
    pub fn filled(width: usize, height: usize, code: u8) -> Result<Self, ImageError> {
        Self::new(width, height, alloc::vec![code; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u8> {
        self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    pub fn same_shape(&self, image: &EventImage) -> bool {
        self.width == image.width() && self.height == image.height()
    }

    pub fn count(&self, code: u8) -> usize {
        self.labels.iter().filter(|&&c| c == code).count()
    }
}

/// Bilinear resampling to `new_width` x `new_height`.
///
/// Pixel centers sit at `i + 0.5` in both grids (align-corners off); source
/// sample positions are clamped to the image, so edges replicate.
pub fn resize_bilinear(
    image: &EventImage,
    new_width: usize,
    new_height: usize,
) -> Result<EventImage, ImageError> {
    if new_width == 0 || new_height == 0 {
        return Err(ImageError::EmptyDimensions {
            width: new_width,
            height: new_height,
        });
    }
    if new_width == image.width && new_height == image.height {
        return Ok(image.clone());
    }

    let xs = axis_samples(image.width, new_width);
    let ys = axis_samples(image.height, new_height);

    let mut pixels = Vec::with_capacity(new_width * new_height);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = lerp(image.get(y0, x0) as f64, image.get(y0, x1) as f64, fx);
            let bottom = lerp(image.get(y1, x0) as f64, image.get(y1, x1) as f64, fx);
            pixels.push(lerp(top, bottom, fy) as f32);
        }
    }
    EventImage::new(new_width, new_height, pixels)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

/// For each output index: the two source neighbours and the weight of the second.
fn axis_samples(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    let last = (src - 1) as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = libm::floor(s) as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Grows the image by `radius` pixels on every side, replicating edge pixels.
pub fn pad_replicate(image: &EventImage, radius: usize) -> EventImage {
    if radius == 0 {
        return image.clone();
    }
    let w = image.width + 2 * radius;
    let h = image.height + 2 * radius;
    let r = radius as isize;
    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h as isize {
        for col in 0..w as isize {
            pixels.push(image.get_clamped(row - r, col - r));
        }
    }
    EventImage {
        width: w,
        height: h,
        pixels,
    }
}
