//! File formats, corpus handling, the labeling service and the experiment
//! driver around [`larseg_core`].

pub mod benchmark;
pub mod cli;
pub mod corpus;
pub mod dataset_io;
pub mod export;
pub mod io;
pub mod model_io;
pub mod run;
pub mod service;

use std::path::PathBuf;

use larseg_core::classifiers::{PredictError, TrainError};
use larseg_core::dataset::DatasetError;
use larseg_core::eval::EvalError;
use larseg_core::features::FeatureMatrixError;
use larseg_core::image::ImageError;

pub use corpus::CorpusError;
pub use dataset_io::DatasetIoError;
pub use io::FormatError;
pub use model_io::ModelIoError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    DatasetIo(#[from] DatasetIoError),
    #[error(transparent)]
    ModelIo(#[from] ModelIoError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Features(#[from] FeatureMatrixError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format(e) => e.kind(),
            Error::DatasetIo(DatasetIoError::Format(e)) => e.kind(),
            Error::DatasetIo(DatasetIoError::Schema { .. }) => "schema",
            Error::DatasetIo(_) => "dataset_file",
            Error::ModelIo(ModelIoError::ChecksumMismatch { .. }) => "feature_order_mismatch",
            Error::ModelIo(ModelIoError::Format(e)) => e.kind(),
            Error::ModelIo(_) => "model_file",
            Error::Corpus(CorpusError::Format(e)) => e.kind(),
            Error::Corpus(_) => "corpus",
            Error::Dataset(_) => "dataset",
            Error::Train(_) => "train",
            Error::Predict(_) => "predict",
            Error::Eval(_) => "eval",
            Error::Features(_) => "features",
            Error::Image(_) => "image",
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
        }
    }

    /// `{"error":{"kind":...,"message":...}}` on one line.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        })
        .to_string()
    }
}
