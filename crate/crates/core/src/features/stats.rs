use alloc::vec::Vec;

use super::{check_kernel, FeatureError, FeaturePlane};
use crate::image::EventImage;

/// Order and moment statistics of the `k x k` window around every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    pub min: FeaturePlane,
    pub max: FeaturePlane,
    pub median: FeaturePlane,
    pub mean: FeaturePlane,
    /// Population standard deviation (divides by `k²`).
    pub std: FeaturePlane,
}

impl WindowStats {
    /// Planes in descriptor order: min, max, median, mean, std.
    pub fn into_planes(self) -> [FeaturePlane; 5] {
        [self.min, self.max, self.median, self.mean, self.std]
    }
}

/// Min, max, median, mean and standard deviation over each `kernel x kernel`
/// window. `kernel` must be 3, 5 or 7; the window area is odd so the median
/// is the middle order statistic.
pub fn sliding_stats(image: &EventImage, kernel: usize) -> Result<WindowStats, FeatureError> {
    let radius = check_kernel(kernel)? as isize;
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let area = (kernel * kernel) as f64;

    let mut min = Vec::with_capacity(n);
    let mut max = Vec::with_capacity(n);
    let mut median = Vec::with_capacity(n);
    let mut mean = Vec::with_capacity(n);
    let mut std = Vec::with_capacity(n);

    let mut window = Vec::with_capacity(kernel * kernel);
    for r in 0..h as isize {
        for c in 0..w as isize {
            window.clear();
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    window.push(image.get_clamped(r + dr, c + dc) as f64);
                }
            }

            let (lo, hi, sum) = window
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &v| {
                    (lo.min(v), hi.max(v), s + v)
                });
            let mu = sum / area;
            let var = window.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>() / area;

            let mid = window.len() / 2;
            let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);

            min.push(lo);
            max.push(hi);
            median.push(*m);
            mean.push(mu);
            std.push(libm::sqrt(var));
        }
    }

    Ok(WindowStats {
        min: FeaturePlane::new(w, h, min),
        max: FeaturePlane::new(w, h, max),
        median: FeaturePlane::new(w, h, median),
        mean: FeaturePlane::new(w, h, mean),
        std: FeaturePlane::new(w, h, std),
    })
}
