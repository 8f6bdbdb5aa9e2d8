//! The 42-value per-pixel descriptor and its constituent feature planes.
//!
//! Canonical feature order (shared by datasets, models and reports):
//!
//! | index | feature |
//! |-------|---------|
//! | 0 | pixel amplitude |
//! | 1-15 | window statistics for kernels 3, 5, 7; each as min, max, median, mean, std |
//! | 16-24 | difference of Gaussians for σ pairs {0.5,2} {0.5,3} {0.5,4} {0.75,2} {0.75,3} {0.75,4} {1,2} {1,3} {1,4} |
//! | 25 | Prewitt gradient magnitude |
//! | 26-29 | Hessian λ₁, λ₂, λ₁+λ₂, λ₁·λ₂ |
//! | 30-41 | structure tensor for kernels 3, 5, 7; each as λ₁, λ₂, λ₁+λ₂, λ₁·λ₂ |
//!
//! Eigenvalues are ordered by signed value, λ₁ ≥ λ₂. Every windowed
//! operation treats the border by replicating the nearest edge pixel.

mod derivatives;
mod descriptor;
mod gaussian;
mod stats;

use alloc::vec::Vec;

pub use derivatives::{
    hessian_components, hessian_eigen_features, prewitt_gradient, sym_eigen_2x2,
    tensor_eigen_features, EigenPlanes, Gradient, HessianComponents,
};
pub use descriptor::{
    extract_descriptor, extract_descriptor_for, feature_planes,
    FeatureMatrix, FeatureMatrixError, Provenance, FEATURE_DESCRIPTIONS, FEATURE_NAMES,
};
pub use gaussian::{
    difference_of_gaussians, gaussian_blur, gaussian_kernel, DogPair, DOG_SIGMA_PAIRS,
};
pub use stats::{sliding_stats, WindowStats};

/// Length of the per-pixel descriptor.
pub const N_FEATURES: usize = 42;

/// Window sizes used by the statistics and structure tensor features.
pub const KERNEL_SIZES: [usize; 3] = [3, 5, 7];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("unsupported kernel size {0}; expected one of 3, 5, 7")]
    UnsupportedKernel(usize),
    #[error("gaussian sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("difference of gaussians needs sigma1 < sigma2, got ({0}, {1})")]
    SigmaOrder(f64, f64),
}

pub(crate) fn check_kernel(kernel: usize) -> Result<usize, FeatureError> {
    if KERNEL_SIZES.contains(&kernel) {
        Ok(kernel / 2)
    } else {
        Err(FeatureError::UnsupportedKernel(kernel))
    }
}

/// One real value per pixel, same grid as the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePlane {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl FeaturePlane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self {
            width,
            height,
            values,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, alloc::vec![0.0; width * height])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub(crate) fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.values[r * self.width + c]
    }

    /// Pixel-wise `self - other`.
    pub fn sub(&self, other: &FeaturePlane) -> FeaturePlane {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        FeaturePlane::new(self.width, self.height, values)
    }
}
