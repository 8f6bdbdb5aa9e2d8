use alloc::vec::Vec;

use super::derivatives::{hessian_eigen_features, prewitt_gradient, tensor_from_gradient};
use super::gaussian::{gaussian_blur, DOG_SIGMA_PAIRS};
use super::stats::sliding_stats;
use super::{FeaturePlane, KERNEL_SIZES, N_FEATURES};
use crate::image::EventImage;

/// Short machine names of the descriptor entries, in canonical order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "amplitude",
    "min_3x3",
    "max_3x3",
    "median_3x3",
    "mean_3x3",
    "std_3x3",
    "min_5x5",
    "max_5x5",
    "median_5x5",
    "mean_5x5",
    "std_5x5",
    "min_7x7",
    "max_7x7",
    "median_7x7",
    "mean_7x7",
    "std_7x7",
    "dog_0.5_2",
    "dog_0.5_3",
    "dog_0.5_4",
    "dog_0.75_2",
    "dog_0.75_3",
    "dog_0.75_4",
    "dog_1_2",
    "dog_1_3",
    "dog_1_4",
    "gradient_magnitude",
    "hessian_eig1",
    "hessian_eig2",
    "hessian_sum",
    "hessian_product",
    "tensor_3x3_eig1",
    "tensor_3x3_eig2",
    "tensor_3x3_sum",
    "tensor_3x3_product",
    "tensor_5x5_eig1",
    "tensor_5x5_eig2",
    "tensor_5x5_sum",
    "tensor_5x5_product",
    "tensor_7x7_eig1",
    "tensor_7x7_eig2",
    "tensor_7x7_sum",
    "tensor_7x7_product",
];

/// Human-readable descriptions matching [`FEATURE_NAMES`], used in
/// importance rankings.
pub const FEATURE_DESCRIPTIONS: [&str; N_FEATURES] = [
    "pixel amplitude",
    "minimum in 3x3 kernel",
    "maximum in 3x3 kernel",
    "median in 3x3 kernel",
    "mean in 3x3 kernel",
    "standard deviation in 3x3 kernel",
    "minimum in 5x5 kernel",
    "maximum in 5x5 kernel",
    "median in 5x5 kernel",
    "mean in 5x5 kernel",
    "standard deviation in 5x5 kernel",
    "minimum in 7x7 kernel",
    "maximum in 7x7 kernel",
    "median in 7x7 kernel",
    "mean in 7x7 kernel",
    "standard deviation in 7x7 kernel",
    "difference of Gaussians {0.5, 2}",
    "difference of Gaussians {0.5, 3}",
    "difference of Gaussians {0.5, 4}",
    "difference of Gaussians {0.75, 2}",
    "difference of Gaussians {0.75, 3}",
    "difference of Gaussians {0.75, 4}",
    "difference of Gaussians {1, 2}",
    "difference of Gaussians {1, 3}",
    "difference of Gaussians {1, 4}",
    "gradient magnitude",
    "Hessian 1st eigenvalue",
    "Hessian 2nd eigenvalue",
    "Hessian eigenvalue sum",
    "Hessian eigenvalue product",
    "tensor 1st eigenvalue in 3x3 kernel",
    "tensor 2nd eigenvalue in 3x3 kernel",
    "tensor eigenvalue sum in 3x3 kernel",
    "tensor eigenvalue product in 3x3 kernel",
    "tensor 1st eigenvalue in 5x5 kernel",
    "tensor 2nd eigenvalue in 5x5 kernel",
    "tensor eigenvalue sum in 5x5 kernel",
    "tensor eigenvalue product in 5x5 kernel",
    "tensor 1st eigenvalue in 7x7 kernel",
    "tensor 2nd eigenvalue in 7x7 kernel",
    "tensor eigenvalue sum in 7x7 kernel",
    "tensor eigenvalue product in 7x7 kernel",
];

/// All 42 feature planes of an image, in canonical order.
pub fn feature_planes(image: &EventImage) -> Vec<FeaturePlane> {
    let (w, h) = (image.width(), image.height());
    let mut planes = Vec::with_capacity(N_FEATURES);

    let amplitude = image.pixels().iter().map(|&v| v as f64).collect();
    planes.push(FeaturePlane::new(w, h, amplitude));

    for k in KERNEL_SIZES {
        let stats = sliding_stats(image, k).expect("descriptor kernels are valid");
        planes.extend(stats.into_planes());
    }

    // Six distinct σ values cover the nine pairs.
    let mut blurs: Vec<(f64, FeaturePlane)> = Vec::with_capacity(6);
    for &(s1, s2) in &DOG_SIGMA_PAIRS {
        for s in [s1, s2] {
            if !blurs.iter().any(|(sigma, _)| *sigma == s) {
                let b = gaussian_blur(image, s).expect("descriptor sigmas are valid");
                blurs.push((s, b));
            }
        }
    }
    let blur = |s: f64| &blurs.iter().find(|(sigma, _)| *sigma == s).unwrap().1;
    for &(s1, s2) in &DOG_SIGMA_PAIRS {
        planes.push(blur(s1).sub(blur(s2)));
    }

    let grad = prewitt_gradient(image);
    planes.push(grad.magnitude.clone());
    planes.extend(hessian_eigen_features(image).into_planes());
    for k in KERNEL_SIZES {
        planes.extend(tensor_from_gradient(&grad, k).into_planes());
    }

    debug_assert_eq!(planes.len(), N_FEATURES);
    planes
}

/// Descriptor rows for every pixel of `image`, tagged with image id 0.
pub fn extract_descriptor(image: &EventImage) -> Result<FeatureMatrix, FeatureMatrixError> {
    extract_descriptor_for(image, 0)
}

/// Descriptor rows for every pixel of `image`, in row-major pixel order.
pub fn extract_descriptor_for(
    image: &EventImage,
    image_id: u32,
) -> Result<FeatureMatrix, FeatureMatrixError> {
    let planes = feature_planes(image);
    let n = image.len();
    let mut data = Vec::with_capacity(n * N_FEATURES);
    let mut provenance = Vec::with_capacity(n);
    for i in 0..n {
        data.extend(planes.iter().map(|p| p.values[i] as f32));
        provenance.push(Provenance {
            image_id,
            row: (i / image.width()) as u32,
            col: (i % image.width()) as u32,
        });
    }
    FeatureMatrix::from_rows(data, provenance)
}

/// Where a descriptor row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub image_id: u32,
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureMatrixError {
    #[error("feature data length {0} is not a multiple of {N_FEATURES}")]
    Ragged(usize),
    #[error("non-finite value in row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },
    #[error("provenance has {actual} entries for {expected} rows")]
    ProvenanceLength { expected: usize, actual: usize },
}

/// Row-major `n_samples x 42` descriptor matrix.
///
/// Provenance is either empty (samples read back from a dataset file) or
/// has one entry per row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f32>,
    provenance: Vec<Provenance>,
}

impl FeatureMatrix {
    pub fn from_rows(
        data: Vec<f32>,
        provenance: Vec<Provenance>,
    ) -> Result<Self, FeatureMatrixError> {
        if !data.len().is_multiple_of(N_FEATURES) {
            return Err(FeatureMatrixError::Ragged(data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(FeatureMatrixError::NonFinite {
                row: i / N_FEATURES,
                feature: i % N_FEATURES,
            });
        }
        let rows = data.len() / N_FEATURES;
        if !provenance.is_empty() && provenance.len() != rows {
            return Err(FeatureMatrixError::ProvenanceLength {
                expected: rows,
                actual: provenance.len(),
            });
        }
        Ok(Self { data, provenance })
    }

    pub fn n_samples(&self) -> usize {
        self.data.len() / N_FEATURES
    }

    pub fn n_features(&self) -> usize {
        N_FEATURES
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * N_FEATURES..(i + 1) * N_FEATURES]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.data.chunks_exact(N_FEATURES)
    }

    pub fn column(&self, feature: usize) -> Vec<f32> {
        self.rows().map(|r| r[feature]).collect()
    }

    /// The flat row-major buffer.
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * N_FEATURES);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        let provenance = if self.provenance.is_empty() {
            Vec::new()
        } else {
            indices.iter().map(|&i| self.provenance[i]).collect()
        };
        FeatureMatrix { data, provenance }
    }

    /// Appends the rows of `other`. Provenance is kept only if both sides carry it.
    pub fn append(&mut self, other: &FeatureMatrix) {
        let keep = (self.is_empty() || !self.provenance.is_empty()) && !other.provenance.is_empty();
        self.data.extend_from_slice(&other.data);
        if keep {
            self.provenance.extend_from_slice(&other.provenance);
        } else {
            self.provenance.clear();
        }
    }
}
