//! Labeled dataset files: CSV (`feat_00,...,feat_41,label`) and the binary
//! LARDS1 layout. Neither carries pixel provenance or event ids.

use std::path::{Path, PathBuf};

use larseg_core::dataset::DatasetError;
use larseg_core::features::FeatureMatrixError;
use larseg_core::{FeatureMatrix, LabeledDataset, N_FEATURES};

use crate::io::{read_file, write_atomic, FormatError};

pub const DATASET_MAGIC: &[u8; 7] = b"LARDS1\n";
const ROW_BYTES: usize = 4 * N_FEATURES + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Binary,
}

impl DatasetFormat {
    /// `.csv` means CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Binary,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetIoError {
    #[error("{path}: schema error: {reason}")]
    Schema { path: PathBuf, reason: String },
    #[error("{path}: line {line}: {reason}")]
    Row {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Dataset { path: PathBuf, source: DatasetError },
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = (0..N_FEATURES).map(|i| format!("feat_{i:02}")).collect();
    h.push("label".to_owned());
    h
}

/// 9 significant digits: enough to round-trip any f32.
fn format_value(v: f32) -> String {
    format!("{v:.8e}")
}

pub fn encode_csv(data: &LabeledDataset) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header()).expect("in-memory write");
    let mut record = Vec::with_capacity(N_FEATURES + 1);
    for (row, label) in data.features().rows().zip(data.labels()) {
        record.clear();
        record.extend(row.iter().map(|&v| format_value(v)));
        record.push(label.to_string());
        w.write_record(&record).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn decode_csv(path: &Path, bytes: &[u8]) -> Result<LabeledDataset, DatasetIoError> {
    let csv_err = |source| DatasetIoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let header = r.headers().map_err(csv_err)?.clone();
    let expected = csv_header();
    if header.len() != expected.len() {
        return Err(DatasetIoError::Schema {
            path: path.to_path_buf(),
            reason: format!(
                "{} columns, expected {} ({} features + label)",
                header.len(),
                expected.len(),
                N_FEATURES
            ),
        });
    }
    if let Some((got, want)) = header.iter().zip(&expected).find(|(g, w)| g != w) {
        return Err(DatasetIoError::Schema {
            path: path.to_path_buf(),
            reason: format!("column {got:?} where {want:?} was expected"),
        });
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |reason: String| DatasetIoError::Row {
            path: path.to_path_buf(),
            line,
            reason,
        };
        if record.len() != N_FEATURES + 1 {
            return Err(row_err(format!("{} fields, expected {}", record.len(), N_FEATURES + 1)));
        }
        for field in record.iter().take(N_FEATURES) {
            let v: f32 = field
                .trim()
                .parse()
                .map_err(|_| row_err(format!("{field:?} is not a number")))?;
            data.push(v);
        }
        let label = &record[N_FEATURES];
        match label.trim() {
            "0" => labels.push(0),
            "1" => labels.push(1),
            other => return Err(row_err(format!("label {other:?} is not 0 or 1"))),
        }
    }
    build(path, data, labels)
}

fn build(path: &Path, data: Vec<f32>, labels: Vec<u8>) -> Result<LabeledDataset, DatasetIoError> {
    let dataset_err = |source| DatasetIoError::Dataset {
        path: path.to_path_buf(),
        source,
    };
    let features = FeatureMatrix::from_rows(data, Vec::new())
        .map_err(|e: FeatureMatrixError| dataset_err(DatasetError::from(e)))?;
    LabeledDataset::new(features, labels, Vec::new()).map_err(dataset_err)
}

pub fn encode_binary(data: &LabeledDataset) -> Vec<u8> {
    let n = data.n_samples();
    let mut out = Vec::with_capacity(DATASET_MAGIC.len() + 8 + n * ROW_BYTES);
    out.extend_from_slice(DATASET_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(N_FEATURES as u32).to_le_bytes());
    for (row, &label) in data.features().rows().zip(data.labels()) {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(label);
    }
    out
}

pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<LabeledDataset, DatasetIoError> {
    let head = DATASET_MAGIC.len() + 8;
    if bytes.len() < DATASET_MAGIC.len() || &bytes[..DATASET_MAGIC.len()] != DATASET_MAGIC {
        return Err(FormatError::BadMagic {
            path: path.to_path_buf(),
            expected: "LARDS1",
        }
        .into());
    }
    if bytes.len() < head {
        return Err(FormatError::Truncated {
            path: path.to_path_buf(),
            expected: head,
            actual: bytes.len(),
        }
        .into());
    }
    let n = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    if width != N_FEATURES {
        return Err(DatasetIoError::Schema {
            path: path.to_path_buf(),
            reason: format!("{width} features per row, expected {N_FEATURES}"),
        });
    }
    let expected = n.saturating_mul(ROW_BYTES).saturating_add(head);
    if bytes.len() != expected {
        return Err(if bytes.len() < expected {
            FormatError::Truncated {
                path: path.to_path_buf(),
                expected,
                actual: bytes.len(),
            }
        } else {
            FormatError::TrailingBytes {
                path: path.to_path_buf(),
                extra: bytes.len() - expected,
            }
        }
        .into());
    }
    let mut data = Vec::with_capacity(n * N_FEATURES);
    let mut labels = Vec::with_capacity(n);
    for row in bytes[head..].chunks_exact(ROW_BYTES) {
        for v in row[..4 * N_FEATURES].chunks_exact(4) {
            data.push(f32::from_le_bytes(v.try_into().unwrap()));
        }
        labels.push(row[4 * N_FEATURES]);
    }
    build(path, data, labels)
}

pub fn save_dataset(
    data: &LabeledDataset,
    path: &Path,
    format: DatasetFormat,
) -> Result<(), DatasetIoError> {
    let bytes = match format {
        DatasetFormat::Csv => encode_csv(data),
        DatasetFormat::Binary => encode_binary(data),
    };
    Ok(write_atomic(path, &bytes)?)
}

/// Reads either format, recognizing binary files by their magic.
pub fn load_dataset(path: &Path) -> Result<LabeledDataset, DatasetIoError> {
    let bytes = read_file(path)?;
    if bytes.starts_with(&DATASET_MAGIC[..6]) {
        decode_binary(path, &bytes)
    } else {
        decode_csv(path, &bytes)
    }
}
