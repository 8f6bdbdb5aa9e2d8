//! Synthetic labeled events: straight or kinked tracks with a Gaussian
//! cross-profile over white Gaussian noise.
//!
//! A pixel is labeled track when, before noise is added, some track
//! contributes more than [`LABEL_FRACTION`] of that track's own peak to it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image::{EventImage, ImageError, LabelMask, NOISE, TRACK};
use crate::rng;

/// Share of a track's peak above which its pixels are labeled track.
pub const LABEL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic event configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    /// Inclusive range of tracks per event.
    pub tracks_min: usize,
    pub tracks_max: usize,
    /// Per-track peak amplitude range.
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    /// Total track length range, in pixels.
    pub length_min: f64,
    pub length_max: f64,
    /// Gaussian cross-profile width of a track.
    pub track_sigma: f64,
    pub noise_sigma: f64,
    /// Chance that all tracks of an event leave one common vertex.
    pub vertex_probability: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            tracks_min: 1,
            tracks_max: 2,
            amplitude_min: 1.5,
            amplitude_max: 6.0,
            length_min: 6.0,
            length_max: 20.0,
            track_sigma: 0.7,
            noise_sigma: 1.0,
            vertex_probability: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.width == 0 || self.height == 0 {
            return Err(SynthError::Image(ImageError::EmptyDimensions {
                width: self.width,
                height: self.height,
            }));
        }
        if self.tracks_min > self.tracks_max {
            return Err(SynthError::InvalidConfig("tracks_min exceeds tracks_max"));
        }
        if !(self.amplitude_min > 0.0 && self.amplitude_min <= self.amplitude_max) {
            return Err(SynthError::InvalidConfig(
                "amplitude range must be positive and ordered",
            ));
        }
        if !(self.length_min >= 0.0 && self.length_min <= self.length_max) {
            return Err(SynthError::InvalidConfig("length range must be non-negative and ordered"));
        }
        if !(self.track_sigma > 0.0 && self.track_sigma.is_finite()) {
            return Err(SynthError::InvalidConfig("track_sigma must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SynthError::InvalidConfig("noise_sigma must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.vertex_probability) {
            return Err(SynthError::InvalidConfig("vertex_probability must be in [0, 1]"));
        }
        Ok(())
    }

    /// Seed of event `index` in a corpus generated from this configuration.
    pub fn event_seed(&self, index: u64) -> u64 {
        rng::stream(self.seed, index).next_u64()
    }
}

type Point = (f64, f64); // (col, row)

fn dist2_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    qx * qx + qy * qy
}

fn random_polyline(rng: &mut ChaCha8Rng, start: Point, config: &SynthConfig) -> Vec<Point> {
    let length = rng.random_range(config.length_min..=config.length_max);
    let segments = rng.random_range(1..=3usize);
    let mut angle = rng.random_range(0.0..2.0 * PI);
    let mut points = alloc::vec![start];
    let mut at = start;
    for _ in 0..segments {
        let step = length / segments as f64;
        at = (at.0 + step * libm::cos(angle), at.1 + step * libm::sin(angle));
        points.push(at);
        angle += rng.random_range(-0.35..0.35);
    }
    points
}

/// Renders one event deterministically from `event_seed`.
pub fn generate_event(
    config: &SynthConfig,
    event_seed: u64,
) -> Result<(EventImage, LabelMask), SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(event_seed);
    let (w, h) = (config.width, config.height);
    let n = w * h;

    let n_tracks = rng.random_range(config.tracks_min..=config.tracks_max);
    let random_point = |rng: &mut ChaCha8Rng| -> Point {
        (
            rng.random_range(0.0..w as f64),
            rng.random_range(0.0..h as f64),
        )
    };
    let vertex = if rng.random_bool(config.vertex_probability) {
        Some(random_point(&mut rng))
    } else {
        None
    };

    let mut signal = alloc::vec![0.0f64; n];
    let mut is_track = alloc::vec![false; n];
    let mut contribution = alloc::vec![0.0f64; n];
    let sigma = config.track_sigma;
    let reach = 5.0 * sigma;

    for _ in 0..n_tracks {
        let start = match vertex {
            Some(v) => v,
            None => random_point(&mut rng),
        };
        let amplitude = rng.random_range(config.amplitude_min..=config.amplitude_max);
        let line = random_polyline(&mut rng, start, config);

        let (mut c0, mut c1, mut r0, mut r1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &line {
            c0 = c0.min(p.0);
            c1 = c1.max(p.0);
            r0 = r0.min(p.1);
            r1 = r1.max(p.1);
        }
        let cols = (libm::floor(c0 - reach).max(0.0) as usize)..(libm::ceil(c1 + reach).max(0.0) as usize + 1).min(w);
        let rows = (libm::floor(r0 - reach).max(0.0) as usize)..(libm::ceil(r1 + reach).max(0.0) as usize + 1).min(h);

        contribution.iter_mut().for_each(|v| *v = 0.0);
        let mut peak = 0.0f64;
        for r in rows.clone() {
            for c in cols.clone() {
                let p = (c as f64, r as f64);
                let d2 = line
                    .windows(2)
                    .map(|s| dist2_to_segment(p, s[0], s[1]))
                    .fold(f64::INFINITY, f64::min);
                let v = amplitude * libm::exp(-d2 / (2.0 * sigma * sigma));
                contribution[r * w + c] = v;
                peak = peak.max(v);
            }
        }
        if peak <= 0.0 {
            continue; // track entirely outside the image
        }
        for r in rows.clone() {
            for c in cols.clone() {
                let i = r * w + c;
                signal[i] += contribution[i];
                if contribution[i] > LABEL_FRACTION * peak {
                    is_track[i] = true;
                }
            }
        }
    }

    if config.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, config.noise_sigma).expect("validated sigma");
        for s in signal.iter_mut() {
            *s += normal.sample(&mut rng);
        }
    }

    let image = EventImage::new(w, h, signal.into_iter().map(|v| v as f32).collect())?;
    let labels = is_track
        .into_iter()
        .map(|t| if t { TRACK } else { NOISE })
        .collect();
    Ok((image, LabelMask::new(w, h, labels)?))
}
