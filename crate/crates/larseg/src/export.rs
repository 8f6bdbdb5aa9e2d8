//! Report artifacts: PR curve CSVs, importance rankings and PNG previews.

use std::fmt::Write as _;
use std::path::Path;

use larseg_core::classifiers::{ranked_importance, ForestModel};
use larseg_core::features::{FEATURE_DESCRIPTIONS, FEATURE_NAMES};
use larseg_core::{FeaturePlane, PrCurve};

use crate::io::{write_atomic, FormatError};

/// `threshold,precision,recall` in increasing threshold order, then
/// `# auc=<value>`.
pub fn pr_csv(curve: &PrCurve) -> String {
    let mut out = String::from("threshold,precision,recall\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.precision, p.recall).unwrap();
    }
    writeln!(out, "# auc={}", curve.auc).unwrap();
    out
}

/// Full ranking as CSV: `rank,index,feature,description,importance`.
pub fn importance_csv(forest: &ForestModel) -> String {
    let mut out = String::from("rank,index,feature,description,importance\n");
    for (rank, (f, v)) in ranked_importance(forest).into_iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            rank + 1,
            f,
            FEATURE_NAMES[f],
            FEATURE_DESCRIPTIONS[f],
            v
        )
        .unwrap();
    }
    out
}

/// Fixed-width top-ten listing of the most important features.
pub fn top_ten_table(forest: &ForestModel) -> String {
    let mut out = String::new();
    writeln!(out, "{:>4}  {:<42}  {:>10}", "rank", "feature", "importance").unwrap();
    for (rank, (f, v)) in ranked_importance(forest).into_iter().take(10).enumerate() {
        writeln!(out, "{:>4}  {:<42}  {:>10.6}", rank + 1, FEATURE_DESCRIPTIONS[f], v).unwrap();
    }
    out
}

/// 16-bit grayscale PNG of `plane`, mapping `range` (or the plane's own
/// min/max) linearly onto 0..=65535.
pub fn encode_png16(plane: &FeaturePlane, range: Option<(f64, f64)>) -> Vec<u8> {
    let (lo, hi) = range.unwrap_or_else(|| {
        plane
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut pixels = Vec::with_capacity(plane.values.len() * 2);
    for &v in &plane.values {
        let level = (((v - lo) / span).clamp(0.0, 1.0) * 65535.0).round() as u16;
        pixels.extend_from_slice(&level.to_be_bytes());
    }

    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, plane.width as u32, plane.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc.write_header().expect("in-memory png header");
        writer.write_image_data(&pixels).expect("in-memory png data");
    }
    out
}

pub fn save_png16(
    plane: &FeaturePlane,
    range: Option<(f64, f64)>,
    path: &Path,
) -> Result<(), FormatError> {
    write_atomic(path, &encode_png16(plane, range))
}
