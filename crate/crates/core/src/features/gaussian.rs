use alloc::vec::Vec;

use super::{FeatureError, FeaturePlane};
use crate::image::EventImage;

/// σ pairs of the difference-of-Gaussians features, in descriptor order.
pub const DOG_SIGMA_PAIRS: [(f64, f64); 9] = [
    (0.5, 2.0),
    (0.5, 3.0),
    (0.5, 4.0),
    (0.75, 2.0),
    (0.75, 3.0),
    (0.75, 4.0),
    (1.0, 2.0),
    (1.0, 3.0),
    (1.0, 4.0),
];

fn check_sigma(sigma: f64) -> Result<(), FeatureError> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(FeatureError::InvalidSigma(sigma))
    }
}

/// Sampled 1D Gaussian of radius `ceil(3σ)`, normalized to unit sum.
///
/// The returned vector has `2 * radius + 1` taps with the center at `radius`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>, FeatureError> {
    check_sigma(sigma)?;
    let radius = libm::ceil(3.0 * sigma) as isize;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|x| libm::exp(-((x * x) as f64) / denom))
        .collect();
    let total: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= total;
    }
    Ok(taps)
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(image: &EventImage, sigma: f64) -> Result<FeaturePlane, FeatureError> {
    let taps = gaussian_kernel(sigma)?;
    let radius = (taps.len() / 2) as isize;
    let (w, h) = (image.width(), image.height());

    let mut rows = Vec::with_capacity(w * h);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let acc: f64 = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * image.get_clamped(r, c + i as isize - radius) as f64)
                .sum();
            rows.push(acc);
        }
    }
    let rows = FeaturePlane::new(w, h, rows);

    let mut out = Vec::with_capacity(w * h);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let acc: f64 = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * rows.get_clamped(r + i as isize - radius, c))
                .sum();
            out.push(acc);
        }
    }
    Ok(FeaturePlane::new(w, h, out))
}

/// A validated σ pair for [`difference_of_gaussians`]: `0 < small < large`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DogPair {
    small: f64,
    large: f64,
}

impl DogPair {
    pub fn new(small: f64, large: f64) -> Result<Self, FeatureError> {
        check_sigma(small)?;
        check_sigma(large)?;
        if small >= large {
            return Err(FeatureError::SigmaOrder(small, large));
        }
        Ok(Self { small, large })
    }

    pub fn small(&self) -> f64 {
        self.small
    }

    pub fn large(&self) -> f64 {
        self.large
    }
}

/// Band-pass response `blur(σ₁) − blur(σ₂)`.
pub fn difference_of_gaussians(
    image: &EventImage,
    pair: DogPair,
) -> Result<FeaturePlane, FeatureError> {
    let fine = gaussian_blur(image, pair.small)?;
    let coarse = gaussian_blur(image, pair.large)?;
    Ok(fine.sub(&coarse))
}
