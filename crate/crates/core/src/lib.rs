//! Pixel-wise track/noise segmentation for 2D detector event images.
//!
//! Every pixel of an event image is described by a 42-value feature vector
//! (amplitude, windowed statistics, difference of Gaussians, gradient
//! magnitude, Hessian and structure tensor eigenvalues). A classifier maps
//! the descriptor to a track probability, and precision-recall analysis
//! scores the result against hand-drawn or synthetic labels.
//!
//! The crate is `no_std` compatible (it needs `alloc`). File formats, the
//! command line tool and the labeling service live in the `larseg` crate.
//!
//! Pipeline:
//!
//! 1. [`image`]: event images, label masks, padding and resampling.
//! 2. [`features`]: the per-pixel descriptor and its feature planes.
//! 3. [`dataset`]: labeled samples, event-level splits, class-ratio downsampling.
//! 4. [`classifiers`]: decision stump, logistic regression, random forest.
//! 5. [`eval`]: precision/recall, PR curves, response maps.
//! 6. [`synth`]: synthetic track events standing in for labeled detector data.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classifiers;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod image;
pub mod synth;

mod rng;

pub use classifiers::{ForestModel, LogRegModel, Model, StumpModel, TrainConfig};
pub use dataset::{LabeledDataset, LabeledEvent, SplitSpec};
pub use eval::{ConfusionCounts, PrCurve};
pub use features::{FeatureMatrix, FeaturePlane, N_FEATURES};
pub use image::{EventImage, LabelMask};
pub use synth::SynthConfig;
