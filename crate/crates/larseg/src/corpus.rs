//! Directories of labeled events: `event_NNN.larimg` / `event_NNN.larmsk`
//! pairs plus a `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use larseg_core::dataset::{build_dataset, DatasetError};
use larseg_core::image::{NOISE, TRACK, UNLABELED};
use larseg_core::synth::{generate_event, SynthError};
use larseg_core::{LabeledDataset, LabeledEvent, SplitSpec, SynthConfig};
use serde::{Deserialize, Serialize};

use crate::io::{self, write_atomic, FormatError};

pub const MANIFEST_FILE: &str = "manifest.json";
/// Share of events assigned to training (40 of 50).
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: cannot create output directory: {source}")]
    Unwritable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: cannot read directory: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid manifest: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}: no events found")]
    Empty(PathBuf),
    #[error("n_events must be at least 1")]
    NoEvents,
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEntry {
    pub id: u32,
    pub seed: u64,
    pub image: String,
    pub mask: String,
    pub track_pixels: usize,
    pub noise_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    /// Generator settings; absent for hand-labeled directories.
    pub config: Option<SynthConfig>,
    pub events: Vec<EventEntry>,
    pub track_pixels: usize,
    pub noise_pixels: usize,
    /// Track pixels over labeled pixels.
    pub prevalence: f64,
    /// Noise pixels per track pixel.
    pub negatives_per_positive: f64,
    pub split: SplitEntry,
}

impl CorpusManifest {
    fn from_entries(config: Option<SynthConfig>, events: Vec<EventEntry>) -> Self {
        let track_pixels: usize = events.iter().map(|e| e.track_pixels).sum();
        let noise_pixels: usize = events.iter().map(|e| e.noise_pixels).sum();
        let ids: Vec<u32> = events.iter().map(|e| e.id).collect();
        let n_train = default_train_count(ids.len());
        Self {
            config,
            track_pixels,
            noise_pixels,
            prevalence: track_pixels as f64 / (track_pixels + noise_pixels).max(1) as f64,
            negatives_per_positive: noise_pixels as f64 / track_pixels.max(1) as f64,
            split: SplitEntry {
                train: ids[..n_train].to_vec(),
                test: ids[n_train..].to_vec(),
            },
            events,
        }
    }

    pub fn split_spec(&self) -> Result<SplitSpec, DatasetError> {
        SplitSpec::new(self.split.train.clone(), self.split.test.clone())
    }
}

/// 80% of the events, rounded, keeping at least one on each side when
/// there are two or more.
pub fn default_train_count(n: usize) -> usize {
    if n < 2 {
        return n;
    }
    ((n as f64 * TRAIN_FRACTION).round() as usize).clamp(1, n - 1)
}

pub fn event_stem(id: u32) -> String {
    format!("event_{id:03}")
}

/// Generates `n_events` events into `out_dir` and writes the manifest.
pub fn generate_corpus(
    config: &SynthConfig,
    n_events: usize,
    out_dir: &Path,
) -> Result<CorpusManifest, CorpusError> {
    if n_events == 0 {
        return Err(CorpusError::NoEvents);
    }
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|source| CorpusError::Unwritable {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::with_capacity(n_events);
    for id in 0..n_events as u32 {
        let seed = config.event_seed(id as u64);
        let (image, mask) = generate_event(config, seed)?;
        let stem = event_stem(id);
        let entry = EventEntry {
            id,
            seed,
            image: format!("{stem}.larimg"),
            mask: format!("{stem}.larmsk"),
            track_pixels: mask.count(TRACK),
            noise_pixels: mask.count(NOISE),
        };
        io::save_image(&image, &out_dir.join(&entry.image))?;
        io::save_mask(&mask, &out_dir.join(&entry.mask))?;
        entries.push(entry);
    }
    let manifest = CorpusManifest::from_entries(Some(config.clone()), entries);
    write_manifest(&manifest, out_dir)?;
    Ok(manifest)
}

pub fn write_manifest(manifest: &CorpusManifest, dir: &Path) -> Result<(), CorpusError> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    Ok(write_atomic(&dir.join(MANIFEST_FILE), &bytes)?)
}

/// Sorted `*.larimg` file names in `dir`.
pub fn image_files(dir: &Path) -> Result<Vec<String>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Unreadable {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Unreadable {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".larimg") && entry.path().is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// Loads every event of a corpus directory.
///
/// With a manifest, its ids and split are used. Without one, each
/// `*.larimg` that has a sibling `*.larmsk` becomes an event, numbered in
/// file-name order, and the leading 80% go to training.
pub fn load_corpus(dir: &Path) -> Result<(CorpusManifest, Vec<LabeledEvent>), CorpusError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = if manifest_path.is_file() {
        let bytes = io::read_file(&manifest_path)?;
        serde_json::from_slice(&bytes).map_err(|source| CorpusError::Manifest {
            path: manifest_path.clone(),
            source,
        })?
    } else {
        scan_directory(dir)?
    };
    if manifest.events.is_empty() {
        return Err(CorpusError::Empty(dir.to_path_buf()));
    }
    let mut events = Vec::with_capacity(manifest.events.len());
    for e in &manifest.events {
        events.push(LabeledEvent {
            id: e.id,
            image: io::load_image(&dir.join(&e.image))?,
            mask: io::load_mask(&dir.join(&e.mask))?,
        });
    }
    Ok((manifest, events))
}

fn scan_directory(dir: &Path) -> Result<CorpusManifest, CorpusError> {
    let mut entries = Vec::new();
    for name in image_files(dir)? {
        let stem = name.trim_end_matches(".larimg");
        let mask_name = format!("{stem}.larmsk");
        if !dir.join(&mask_name).is_file() {
            continue;
        }
        let mask = io::load_mask(&dir.join(&mask_name))?;
        entries.push(EventEntry {
            id: entries.len() as u32,
            seed: 0,
            image: name.clone(),
            mask: mask_name,
            track_pixels: mask.count(TRACK),
            noise_pixels: mask.count(NOISE),
        });
    }
    Ok(CorpusManifest::from_entries(None, entries))
}

/// Train and test datasets of a corpus according to its split.
pub fn corpus_datasets(
    manifest: &CorpusManifest,
    events: &[LabeledEvent],
) -> Result<(LabeledDataset, LabeledDataset), CorpusError> {
    Ok(build_dataset(events, &manifest.split_spec()?)?)
}

/// Count of pixels with each code, in the order track, noise, unlabeled.
pub fn label_counts(events: &[LabeledEvent]) -> (usize, usize, usize) {
    events.iter().fold((0, 0, 0), |(t, n, u), e| {
        (
            t + e.mask.count(TRACK),
            n + e.mask.count(NOISE),
            u + e.mask.count(UNLABELED),
        )
    })
}
