//! JSON model documents.
//!
//! Every document carries a `type` tag, a schema version and the SHA-256 of
//! the canonical feature order it was trained against. Forest trees are
//! stored as nested node records.

use std::path::{Path, PathBuf};

use larseg_core::classifiers::{DecisionTree, Node, PredictError};
use larseg_core::features::FEATURE_NAMES;
use larseg_core::{ForestModel, LogRegModel, Model, StumpModel, N_FEATURES};
use serde::de::{DeserializeOwned, IgnoredAny};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{read_file, write_atomic, FormatError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("{path}: invalid model document: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: unknown model type {found:?}")]
    UnknownType { path: PathBuf, found: String },
    #[error("{path}: schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion { path: PathBuf, found: u32 },
    #[error("{path}: feature order checksum {found} does not match this build ({expected})")]
    ChecksumMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: PredictError },
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// SHA-256 of the feature names joined by newlines.
pub fn feature_order_checksum() -> String {
    sha256_hex(FEATURE_NAMES.join("\n").as_bytes())
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NestedNode {
    Split {
        feature: u16,
        threshold: f64,
        left: Box<NestedNode>,
        right: Box<NestedNode>,
    },
    Leaf {
        positive_fraction: f64,
        samples: u32,
    },
}

fn nest(nodes: &[Node], i: usize) -> NestedNode {
    match &nodes[i] {
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => NestedNode::Split {
            feature: *feature,
            threshold: *threshold,
            left: Box::new(nest(nodes, *left as usize)),
            right: Box::new(nest(nodes, *right as usize)),
        },
        Node::Leaf {
            positive_fraction,
            samples,
        } => NestedNode::Leaf {
            positive_fraction: *positive_fraction,
            samples: *samples,
        },
    }
}

/// Flattens in the library's own arena order: a split's two children are
/// allocated together, left then right.
fn flatten(root: NestedNode) -> Vec<Node> {
    let mut nodes = vec![Node::Leaf {
        positive_fraction: 0.0,
        samples: 0,
    }];
    let mut stack = vec![(0usize, root)];
    while let Some((id, node)) = stack.pop() {
        match node {
            NestedNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let l = nodes.len();
                nodes.push(nodes[0].clone());
                nodes.push(nodes[0].clone());
                nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left: l as u32,
                    right: l as u32 + 1,
                };
                stack.push((l + 1, *right));
                stack.push((l, *left));
            }
            NestedNode::Leaf {
                positive_fraction,
                samples,
            } => {
                nodes[id] = Node::Leaf {
                    positive_fraction,
                    samples,
                }
            }
        }
    }
    nodes
}

#[derive(Serialize, Deserialize)]
struct TreeRecord {
    impurity_decrease: Vec<f64>,
    root: NestedNode,
}

#[derive(Serialize, Deserialize)]
struct ForestParams {
    trees: Vec<TreeRecord>,
}

#[derive(Serialize, Deserialize)]
struct Document<P> {
    #[serde(rename = "type")]
    kind: String,
    schema_version: u32,
    feature_order_sha256: String,
    feature_count: usize,
    parameters: P,
}

#[derive(Deserialize)]
struct Header {
    #[serde(rename = "type")]
    kind: String,
    schema_version: u32,
    feature_order_sha256: String,
    feature_count: usize,
    #[allow(dead_code)]
    parameters: IgnoredAny,
}

fn document<P>(kind: &str, parameters: P) -> Document<P> {
    Document {
        kind: kind.to_owned(),
        schema_version: SCHEMA_VERSION,
        feature_order_sha256: feature_order_checksum(),
        feature_count: N_FEATURES,
        parameters,
    }
}

pub fn encode_model(model: &Model) -> Vec<u8> {
    let out = match model {
        Model::Stump(m) => serde_json::to_vec(&document("stump", m)),
        Model::LogReg(m) => serde_json::to_vec(&document("logreg", m)),
        Model::Forest(f) => {
            let trees = f
                .trees
                .iter()
                .map(|t| TreeRecord {
                    impurity_decrease: t.impurity_decrease.clone(),
                    root: nest(&t.nodes, 0),
                })
                .collect();
            serde_json::to_vec(&document("forest", ForestParams { trees }))
        }
    };
    out.expect("model documents always serialize")
}

/// Parses without serde_json's nesting limit, growing the stack on demand.
fn parse<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, ModelIoError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    let de = serde_stacker::Deserializer::new(&mut de);
    T::deserialize(de).map_err(|source| ModelIoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn decode_model(path: &Path, bytes: &[u8]) -> Result<Model, ModelIoError> {
    let header: Header = parse(path, bytes)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(ModelIoError::SchemaVersion {
            path: path.to_path_buf(),
            found: header.schema_version,
        });
    }
    let expected = feature_order_checksum();
    if header.feature_order_sha256 != expected {
        return Err(ModelIoError::ChecksumMismatch {
            path: path.to_path_buf(),
            found: header.feature_order_sha256,
            expected,
        });
    }
    if header.feature_count != N_FEATURES {
        return Err(ModelIoError::Invalid {
            path: path.to_path_buf(),
            source: PredictError::FeatureCount {
                expected: N_FEATURES,
                actual: header.feature_count,
            },
        });
    }
    let model = match header.kind.as_str() {
        "stump" => Model::Stump(parse::<Document<StumpModel>>(path, bytes)?.parameters),
        "logreg" => Model::LogReg(parse::<Document<LogRegModel>>(path, bytes)?.parameters),
        "forest" => {
            let doc: Document<ForestParams> = parse(path, bytes)?;
            let trees = doc
                .parameters
                .trees
                .into_iter()
                .map(|t| DecisionTree {
                    nodes: flatten(t.root),
                    impurity_decrease: t.impurity_decrease,
                })
                .collect();
            Model::Forest(ForestModel::from_trees(trees))
        }
        _ => {
            return Err(ModelIoError::UnknownType {
                path: path.to_path_buf(),
                found: header.kind,
            })
        }
    };
    model.validate().map_err(|source| ModelIoError::Invalid {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(model)
}

pub fn save_model(model: &Model, path: &Path) -> Result<(), ModelIoError> {
    Ok(write_atomic(path, &encode_model(model))?)
}

pub fn load_model(path: &Path) -> Result<Model, ModelIoError> {
    decode_model(path, &read_file(path)?)
}
