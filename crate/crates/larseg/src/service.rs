//! HTTP API of the labeling tool.
//!
//! Events are the `*.larimg` files of one directory; an event's id is the
//! file stem and its mask lives next to it as `<id>.larmsk`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use larseg_core::image::{NOISE, TRACK, UNLABELED};
use larseg_core::LabelMask;
use serde::{Deserialize, Serialize};

use crate::corpus::image_files;
use crate::io::{self, FormatError};

const INDEX_HTML: &str = include_str!("../assets/index.html");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStatus {
    Unlabeled,
    Partial,
    Complete,
}

impl LabelStatus {
    /// No mask or nothing labeled yet: unlabeled. Some pixels still
    /// unlabeled: partial. Otherwise complete.
    pub fn of(mask: Option<&LabelMask>) -> Self {
        match mask {
            None => LabelStatus::Unlabeled,
            Some(m) => match m.count(UNLABELED) {
                0 => LabelStatus::Complete,
                n if n == m.labels().len() => LabelStatus::Unlabeled,
                _ => LabelStatus::Partial,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: String,
    pub image: PathBuf,
    pub mask: Option<PathBuf>,
    pub status: LabelStatus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImagePayload {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub min: f32,
    pub max: f32,
    /// Base64 of the pixels as little-endian f32, row-major.
    pub data: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskPayload {
    pub width: usize,
    pub height: usize,
    /// Base64 of one label code per pixel, row-major.
    pub data: String,
    /// False when no mask file exists yet and an all-unlabeled mask is
    /// returned.
    #[serde(default)]
    pub persisted: bool,
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Internal(String),
}

impl From<FormatError> for ApiError {
    fn from(e: FormatError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        };
        let body = serde_json::json!({ "error": { "kind": kind, "message": message } });
        (status, Json(body)).into_response()
    }
}

struct AppState {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }

    fn image_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.larimg"))
    }

    fn mask_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.larmsk"))
    }
}

/// Event records of `dir`, sorted by id.
pub fn list_events(dir: &Path) -> Result<Vec<EventRecord>, ApiError> {
    let names = image_files(dir).map_err(|e| ApiError::Internal(e.to_string()))?;
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let id = name.trim_end_matches(".larimg").to_owned();
        let mask_path = dir.join(format!("{id}.larmsk"));
        let mask = if mask_path.is_file() {
            Some(io::load_mask(&mask_path)?)
        } else {
            None
        };
        out.push(EventRecord {
            status: LabelStatus::of(mask.as_ref()),
            image: dir.join(&name),
            mask: mask.map(|_| mask_path),
            id,
        });
    }
    Ok(out)
}

fn known_id(dir: &Path, id: &str) -> Result<(), ApiError> {
    let names = image_files(dir).map_err(|e| ApiError::Internal(e.to_string()))?;
    if names.iter().any(|n| n.trim_end_matches(".larimg") == id) {
        Ok(())
    } else {
        Err(ApiError::NotFound(format!("no event with id {id:?}")))
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

async fn events(State(state): State<Arc<AppState>>) -> Result<Json<Vec<EventRecord>>, ApiError> {
    Ok(Json(blocking(move || list_events(&state.dir)).await?))
}

async fn get_image(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<ImagePayload>, ApiError> {
    let payload = blocking(move || {
        known_id(&state.dir, &id)?;
        let image = io::load_image(&state.image_path(&id))?;
        let (min, max) = image.min_max();
        let bytes: Vec<u8> = image.pixels().iter().flat_map(|v| v.to_le_bytes()).collect();
        Ok(ImagePayload {
            width: image.width(),
            height: image.height(),
            min,
            max,
            data: BASE64.encode(bytes),
            id,
        })
    })
    .await?;
    Ok(Json(payload))
}

async fn get_mask(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<MaskPayload>, ApiError> {
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let payload = blocking(move || {
        known_id(&state.dir, &id)?;
        let path = state.mask_path(&id);
        let (mask, persisted) = if path.is_file() {
            (io::load_mask(&path)?, true)
        } else {
            let image = io::load_image(&state.image_path(&id))?;
            let mask = LabelMask::filled(image.width(), image.height(), UNLABELED)
                .map_err(|e| ApiError::Internal(e.to_string()))?;
            (mask, false)
        };
        Ok(MaskPayload {
            width: mask.width(),
            height: mask.height(),
            data: BASE64.encode(mask.labels()),
            persisted,
        })
    })
    .await?;
    Ok(Json(payload))
}

async fn put_mask(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<MaskPayload>,
) -> Result<Json<EventRecord>, ApiError> {
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    let record = blocking(move || {
        known_id(&state.dir, &id)?;
        let image_path = state.image_path(&id);
        let image = io::load_image(&image_path)?;
        if (body.width, body.height) != (image.width(), image.height()) {
            return Err(ApiError::BadRequest(format!(
                "mask is {}x{}, image is {}x{}",
                body.width,
                body.height,
                image.width(),
                image.height()
            )));
        }
        let labels = BASE64
            .decode(body.data.as_bytes())
            .map_err(|e| ApiError::BadRequest(format!("mask data is not base64: {e}")))?;
        if let Some(i) = labels
            .iter()
            .position(|&c| c != NOISE && c != TRACK && c != UNLABELED)
        {
            return Err(ApiError::BadRequest(format!(
                "invalid label code {} at pixel {i}",
                labels[i]
            )));
        }
        let mask = LabelMask::new(body.width, body.height, labels)
            .map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let mask_path = state.mask_path(&id);
        io::save_mask(&mask, &mask_path)?;
        Ok(EventRecord {
            id,
            image: image_path,
            status: LabelStatus::of(Some(&mask)),
            mask: Some(mask_path),
        })
    })
    .await?;
    Ok(Json(record))
}

/// Router serving the API and the static UI for the events in `dir`.
pub fn app(dir: impl Into<PathBuf>) -> Router {
    let state = Arc::new(AppState {
        dir: dir.into(),
        locks: Mutex::new(HashMap::new()),
    });
    Router::new()
        .route("/", get(index))
        .route("/api/events", get(events))
        .route("/api/events/{id}/image", get(get_image))
        .route("/api/events/{id}/mask", get(get_mask).put(put_mask))
        .with_state(state)
}

/// Serves `dir` on `127.0.0.1:port` until the process ends.
pub async fn serve(dir: PathBuf, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    axum::serve(listener, app(dir)).await
}
