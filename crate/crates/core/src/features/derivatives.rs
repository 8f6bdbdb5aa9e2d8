use alloc::vec::Vec;

use super::{check_kernel, FeatureError, FeaturePlane};
use crate::image::EventImage;

/// Eigenvalues of the symmetric matrix `[[a, b], [b, c]]`, largest first.
#[inline]
pub fn sym_eigen_2x2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mid = 0.5 * (a + c);
    let spread = libm::hypot(0.5 * (a - c), b);
    (mid + spread, mid - spread)
}

/// Eigenvalue planes of a field of 2x2 symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPlanes {
    /// λ₁ (signed, larger).
    pub major: FeaturePlane,
    /// λ₂ (signed, smaller).
    pub minor: FeaturePlane,
    pub sum: FeaturePlane,
    pub product: FeaturePlane,
}

impl EigenPlanes {
    fn from_fields(w: usize, h: usize, a: &[f64], b: &[f64], c: &[f64]) -> Self {
        let n = w * h;
        let mut major = Vec::with_capacity(n);
        let mut minor = Vec::with_capacity(n);
        let mut sum = Vec::with_capacity(n);
        let mut product = Vec::with_capacity(n);
        for i in 0..n {
            let (l1, l2) = sym_eigen_2x2(a[i], b[i], c[i]);
            major.push(l1);
            minor.push(l2);
            sum.push(l1 + l2);
            product.push(l1 * l2);
        }
        Self {
            major: FeaturePlane::new(w, h, major),
            minor: FeaturePlane::new(w, h, minor),
            sum: FeaturePlane::new(w, h, sum),
            product: FeaturePlane::new(w, h, product),
        }
    }

    /// Planes in descriptor order: λ₁, λ₂, sum, product.
    pub fn into_planes(self) -> [FeaturePlane; 4] {
        [self.major, self.minor, self.sum, self.product]
    }
}

/// Prewitt derivatives along columns (`gx`) and rows (`gy`).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub gx: FeaturePlane,
    pub gy: FeaturePlane,
    pub magnitude: FeaturePlane,
}

/// 3x3 Prewitt gradient scaled by 1/6, so a unit-slope ramp has derivative 1.
pub fn prewitt_gradient(image: &EventImage) -> Gradient {
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    let mut magnitude = Vec::with_capacity(n);
    let f = |r: isize, c: isize| image.get_clamped(r, c) as f64;
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut dx = 0.0;
            let mut dy = 0.0;
            for d in -1..=1 {
                dx += f(r + d, c + 1) - f(r + d, c - 1);
                dy += f(r + 1, c + d) - f(r - 1, c + d);
            }
            let (dx, dy) = (dx / 6.0, dy / 6.0);
            gx.push(dx);
            gy.push(dy);
            magnitude.push(libm::hypot(dx, dy));
        }
    }
    Gradient {
        gx: FeaturePlane::new(w, h, gx),
        gy: FeaturePlane::new(w, h, gy),
        magnitude: FeaturePlane::new(w, h, magnitude),
    }
}

/// Second derivatives from central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianComponents {
    /// ∂²f/∂col²
    pub fxx: FeaturePlane,
    /// ∂²f/∂row²
    pub fyy: FeaturePlane,
    pub fxy: FeaturePlane,
}

pub fn hessian_components(image: &EventImage) -> HessianComponents {
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let mut fxx = Vec::with_capacity(n);
    let mut fyy = Vec::with_capacity(n);
    let mut fxy = Vec::with_capacity(n);
    let f = |r: isize, c: isize| image.get_clamped(r, c) as f64;
    for r in 0..h as isize {
        for c in 0..w as isize {
            let center = f(r, c);
            fxx.push(f(r, c + 1) - 2.0 * center + f(r, c - 1));
            fyy.push(f(r + 1, c) - 2.0 * center + f(r - 1, c));
            // central difference along rows of the central difference along columns
            let dx_below = 0.5 * (f(r + 1, c + 1) - f(r + 1, c - 1));
            let dx_above = 0.5 * (f(r - 1, c + 1) - f(r - 1, c - 1));
            fxy.push(0.5 * (dx_below - dx_above));
        }
    }
    HessianComponents {
        fxx: FeaturePlane::new(w, h, fxx),
        fyy: FeaturePlane::new(w, h, fyy),
        fxy: FeaturePlane::new(w, h, fxy),
    }
}

/// Ordered Hessian eigenvalues with their sum and product.
pub fn hessian_eigen_features(image: &EventImage) -> EigenPlanes {
    let hc = hessian_components(image);
    EigenPlanes::from_fields(
        image.width(),
        image.height(),
        &hc.fxx.values,
        &hc.fxy.values,
        &hc.fyy.values,
    )
}

/// Eigenvalues of the structure tensor: the `kernel x kernel` box average of
/// the Prewitt gradient outer product.
pub fn tensor_eigen_features(
    image: &EventImage,
    kernel: usize,
) -> Result<EigenPlanes, FeatureError> {
    check_kernel(kernel)?;
    Ok(tensor_from_gradient(&prewitt_gradient(image), kernel))
}

pub(super) fn tensor_from_gradient(grad: &Gradient, kernel: usize) -> EigenPlanes {
    let radius = (kernel / 2) as isize;
    let (w, h) = (grad.gx.width, grad.gx.height);
    let n = w * h;

    let xx: Vec<f64> = grad.gx.values.iter().map(|g| g * g).collect();
    let xy: Vec<f64> = grad
        .gx
        .values
        .iter()
        .zip(&grad.gy.values)
        .map(|(a, b)| a * b)
        .collect();
    let yy: Vec<f64> = grad.gy.values.iter().map(|g| g * g).collect();
    let xx = FeaturePlane::new(w, h, xx);
    let xy = FeaturePlane::new(w, h, xy);
    let yy = FeaturePlane::new(w, h, yy);

    let area = (kernel * kernel) as f64;
    let mut jxx = Vec::with_capacity(n);
    let mut jxy = Vec::with_capacity(n);
    let mut jyy = Vec::with_capacity(n);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    sxx += xx.get_clamped(r + dr, c + dc);
                    sxy += xy.get_clamped(r + dr, c + dc);
                    syy += yy.get_clamped(r + dr, c + dc);
                }
            }
            jxx.push(sxx / area);
            jxy.push(sxy / area);
            jyy.push(syy / area);
        }
    }
    EigenPlanes::from_fields(w, h, &jxx, &jxy, &jyy)
}
