//! LARIMG1 images and LARMSK1 masks.
//!
//! Both start with an 8-byte magic, then width and height as little-endian
//! u32, then the row-major payload: f32 LE amplitudes or u8 label codes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use larseg_core::image::ImageError;
use larseg_core::{EventImage, LabelMask};

pub const IMAGE_MAGIC: &[u8; 8] = b"LARIMG1\n";
pub const MASK_MAGIC: &[u8; 8] = b"LARMSK1\n";
const HEADER_LEN: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{0}: no such file")]
    Missing(PathBuf),
    #[error("{path}: bad magic, expected {expected:?}")]
    BadMagic { path: PathBuf, expected: &'static str },
    #[error("{path}: truncated, expected {expected} bytes, found {actual}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },
    #[error("{path}: {extra} unexpected trailing bytes")]
    TrailingBytes { path: PathBuf, extra: usize },
    #[error("{path}: non-finite amplitude at pixel {index}")]
    NonFinite { path: PathBuf, index: usize },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: ImageError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl FormatError {
    pub fn kind(&self) -> &'static str {
        match self {
            FormatError::Missing(_) => "missing_file",
            FormatError::BadMagic { .. } => "bad_magic",
            FormatError::Truncated { .. } => "truncated",
            FormatError::TrailingBytes { .. } => "trailing_bytes",
            FormatError::NonFinite { .. } => "non_finite",
            FormatError::Invalid { .. } => "invalid_content",
            FormatError::Io { .. } => "io",
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => FormatError::Missing(path.to_path_buf()),
        _ => FormatError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let mut file = fs::File::create(&tmp).map_err(io_err)?;
    file.write_all(bytes).map_err(io_err)?;
    file.sync_all().map_err(io_err)?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(e)
    })
}

/// Validates magic and length; returns (width, height, payload).
fn parse_header<'a>(
    path: &Path,
    bytes: &'a [u8],
    magic: &'static [u8; 8],
    bytes_per_pixel: usize,
) -> Result<(usize, usize, &'a [u8]), FormatError> {
    let expected_magic = std::str::from_utf8(&magic[..7]).expect("ascii magic");
    if bytes.len() < magic.len() || &bytes[..8] != magic {
        return Err(FormatError::BadMagic {
            path: path.to_path_buf(),
            expected: expected_magic,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            path: path.to_path_buf(),
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per_pixel))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .unwrap_or(usize::MAX);
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(FormatError::TrailingBytes {
            path: path.to_path_buf(),
            extra: bytes.len() - expected,
        });
    }
    Ok((width, height, &bytes[HEADER_LEN..]))
}

fn header(magic: &[u8; 8], width: usize, height: usize, payload: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    out
}

pub fn encode_image(image: &EventImage) -> Vec<u8> {
    let mut out = header(IMAGE_MAGIC, image.width(), image.height(), 4 * image.len());
    for v in image.pixels() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_image(path: &Path, bytes: &[u8]) -> Result<EventImage, FormatError> {
    let (w, h, payload) = parse_header(path, bytes, IMAGE_MAGIC, 4)?;
    let mut pixels = Vec::with_capacity(w * h);
    for (index, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(FormatError::NonFinite {
                path: path.to_path_buf(),
                index,
            });
        }
        pixels.push(v);
    }
    EventImage::new(w, h, pixels).map_err(|source| FormatError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_image(path: &Path) -> Result<EventImage, FormatError> {
    decode_image(path, &read_file(path)?)
}

pub fn save_image(image: &EventImage, path: &Path) -> Result<(), FormatError> {
    write_atomic(path, &encode_image(image))
}

pub fn encode_mask(mask: &LabelMask) -> Vec<u8> {
    let mut out = header(MASK_MAGIC, mask.width(), mask.height(), mask.labels().len());
    out.extend_from_slice(mask.labels());
    out
}

pub fn decode_mask(path: &Path, bytes: &[u8]) -> Result<LabelMask, FormatError> {
    let (w, h, payload) = parse_header(path, bytes, MASK_MAGIC, 1)?;
    LabelMask::new(w, h, payload.to_vec()).map_err(|source| FormatError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_mask(path: &Path) -> Result<LabelMask, FormatError> {
    decode_mask(path, &read_file(path)?)
}

pub fn save_mask(mask: &LabelMask, path: &Path) -> Result<(), FormatError> {
    write_atomic(path, &encode_mask(mask))
}
