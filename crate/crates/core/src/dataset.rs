//! Labeled per-pixel samples, event-level train/test splits and
//! class-ratio downsampling.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{extract_descriptor_for, FeatureMatrix, FeatureMatrixError};
use crate::image::{EventImage, LabelMask, NOISE, TRACK};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("event {0}: image and mask dimensions differ")]
    DimensionMismatch(u32),
    #[error("event {0} is referenced by the split but was not provided")]
    UnknownEvent(u32),
    #[error("event {0} is not assigned to either side of the split")]
    UnassignedEvent(u32),
    #[error("event {0} appears more than once")]
    DuplicateEvent(u32),
    #[error("event {0} is in both the train and the test subset")]
    OverlappingSplit(u32),
    #[error("{labels} labels for {rows} feature rows")]
    LabelCount { rows: usize, labels: usize },
    #[error("{ids} event ids for {rows} feature rows")]
    EventIdCount { rows: usize, ids: usize },
    #[error("label {code} at row {row} is not 0 or 1")]
    InvalidLabel { row: usize, code: u8 },
    #[error("dataset has no positive samples")]
    NoPositives,
    #[error("class ratio must be at least 1, got {0}")]
    InvalidRatio(u32),
    #[error(transparent)]
    Features(#[from] FeatureMatrixError),
}

/// An event image with its ground-truth mask.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEvent {
    pub id: u32,
    pub image: EventImage,
    pub mask: LabelMask,
}

/// Disjoint train and test event ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    train: Vec<u32>,
    test: Vec<u32>,
}

impl SplitSpec {
    pub fn new(train: Vec<u32>, test: Vec<u32>) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        for &id in &train {
            if !seen.insert(id) {
                return Err(DatasetError::DuplicateEvent(id));
            }
        }
        let mut seen_test = BTreeSet::new();
        for &id in &test {
            if seen.contains(&id) {
                return Err(DatasetError::OverlappingSplit(id));
            }
            if !seen_test.insert(id) {
                return Err(DatasetError::DuplicateEvent(id));
            }
        }
        Ok(Self { train, test })
    }

    /// The first `n_train` ids go to training, the rest to test.
    pub fn leading(ids: &[u32], n_train: usize) -> Result<Self, DatasetError> {
        let n_train = n_train.min(ids.len());
        Self::new(ids[..n_train].to_vec(), ids[n_train..].to_vec())
    }

    pub fn train(&self) -> &[u32] {
        &self.train
    }

    pub fn test(&self) -> &[u32] {
        &self.test
    }
}

/// Descriptor rows with binary labels (0 noise, 1 track) and source event ids.
///
/// `event_ids` is empty for datasets read back from files, which do not
/// carry them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    features: FeatureMatrix,
    labels: Vec<u8>,
    event_ids: Vec<u32>,
}

impl LabeledDataset {
    pub fn new(
        features: FeatureMatrix,
        labels: Vec<u8>,
        event_ids: Vec<u32>,
    ) -> Result<Self, DatasetError> {
        let rows = features.n_samples();
        if labels.len() != rows {
            return Err(DatasetError::LabelCount {
                rows,
                labels: labels.len(),
            });
        }
        if !event_ids.is_empty() && event_ids.len() != rows {
            return Err(DatasetError::EventIdCount {
                rows,
                ids: event_ids.len(),
            });
        }
        if let Some(row) = labels.iter().position(|&c| c != NOISE && c != TRACK) {
            return Err(DatasetError::InvalidLabel {
                row,
                code: labels[row],
            });
        }
        Ok(Self {
            features,
            labels,
            event_ids,
        })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn event_ids(&self) -> &[u32] {
        &self.event_ids
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == TRACK).count()
    }

    pub fn n_negatives(&self) -> usize {
        self.n_samples() - self.n_positives()
    }

    /// Negatives per positive (`r` in 1:r); infinite when there are no positives.
    pub fn negatives_per_positive(&self) -> f64 {
        self.n_negatives() as f64 / self.n_positives() as f64
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        let event_ids = if self.event_ids.is_empty() {
            Vec::new()
        } else {
            indices.iter().map(|&i| self.event_ids[i]).collect()
        };
        LabeledDataset {
            features: self.features.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            event_ids,
        }
    }

    fn append(&mut self, other: LabeledDataset) {
        let keep_ids = self.labels.is_empty() || !self.event_ids.is_empty();
        self.features.append(&other.features);
        self.labels.extend(other.labels);
        if keep_ids && !other.event_ids.is_empty() {
            self.event_ids.extend(other.event_ids);
        } else {
            self.event_ids.clear();
        }
    }
}

/// Samples of a single event: every labeled pixel, unlabeled ones dropped.
pub fn event_samples(event: &LabeledEvent) -> Result<LabeledDataset, DatasetError> {
    if !event.mask.same_shape(&event.image) {
        return Err(DatasetError::DimensionMismatch(event.id));
    }
    let all = extract_descriptor_for(&event.image, event.id)?;
    let keep: Vec<usize> = event
        .mask
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == NOISE || c == TRACK)
        .map(|(i, _)| i)
        .collect();
    let labels = keep.iter().map(|&i| event.mask.labels()[i]).collect();
    let n = keep.len();
    LabeledDataset::new(all.select(&keep), labels, alloc::vec![event.id; n])
}

/// Computes descriptors for every event and splits them by whole event.
pub fn build_dataset(
    events: &[LabeledEvent],
    split: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset), DatasetError> {
    let mut ids = BTreeSet::new();
    for e in events {
        if !ids.insert(e.id) {
            return Err(DatasetError::DuplicateEvent(e.id));
        }
        if !e.mask.same_shape(&e.image) {
            return Err(DatasetError::DimensionMismatch(e.id));
        }
    }
    for &id in split.train.iter().chain(&split.test) {
        if !ids.contains(&id) {
            return Err(DatasetError::UnknownEvent(id));
        }
    }
    if let Some(e) = events
        .iter()
        .find(|e| !split.train.contains(&e.id) && !split.test.contains(&e.id))
    {
        return Err(DatasetError::UnassignedEvent(e.id));
    }

    let per_event = samples_per_event(events)?;
    let mut train = LabeledDataset::default();
    let mut test = LabeledDataset::default();
    for (event, samples) in events.iter().zip(per_event) {
        if split.train.contains(&event.id) {
            train.append(samples);
        } else {
            test.append(samples);
        }
    }
    Ok((train, test))
}

#[cfg(feature = "parallel")]
fn samples_per_event(events: &[LabeledEvent]) -> Result<Vec<LabeledDataset>, DatasetError> {
    use rayon::prelude::*;
    events.par_iter().map(event_samples).collect()
}

#[cfg(not(feature = "parallel"))]
fn samples_per_event(events: &[LabeledEvent]) -> Result<Vec<LabeledDataset>, DatasetError> {
    events.iter().map(event_samples).collect()
}

/// Number of negatives kept at class ratio 1:`ratio`.
pub fn negative_quota(n_positives: usize, n_negatives: usize, ratio: u32) -> usize {
    n_positives.saturating_mul(ratio as usize).min(n_negatives)
}

/// Keeps every positive and `min(ratio * n_pos, n_neg)` negatives drawn
/// uniformly without replacement. Rows keep their original relative order.
pub fn downsample_negatives(
    data: &LabeledDataset,
    ratio: u32,
    seed: u64,
) -> Result<LabeledDataset, DatasetError> {
    if ratio < 1 {
        return Err(DatasetError::InvalidRatio(ratio));
    }
    let (positives, negatives): (Vec<usize>, Vec<usize>) =
        (0..data.n_samples()).partition(|&i| data.labels[i] == TRACK);
    if positives.is_empty() {
        return Err(DatasetError::NoPositives);
    }
    let quota = negative_quota(positives.len(), negatives.len(), ratio);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, negatives.len(), quota);

    let mut keep = positives;
    keep.extend(picked.into_iter().map(|j| negatives[j]));
    keep.sort_unstable();
    Ok(data.select(&keep))
}
