//! Brute-force reference implementations used by the test suites.
//!
//! Everything here is written from the definitions alone and avoids the
//! library's code paths: no separable filters, no cached blurs, no sweeps.

#![allow(dead_code)]

use larseg_core::classifiers::{DecisionTree, Node};
use larseg_core::EventImage;

/// Replicate-border pixel access on a raw row-major buffer.
pub fn at(px: &[f32], w: usize, h: usize, r: isize, c: isize) -> f64 {
    let r = r.clamp(0, h as isize - 1) as usize;
    let c = c.clamp(0, w as isize - 1) as usize;
    px[r * w + c] as f64
}

fn at64(px: &[f64], w: usize, h: usize, r: isize, c: isize) -> f64 {
    let r = r.clamp(0, h as isize - 1) as usize;
    let c = c.clamp(0, w as isize - 1) as usize;
    px[r * w + c]
}

/// Window values around (r, c), sorted ascending.
fn window(px: &[f32], w: usize, h: usize, r: isize, c: isize, k: usize) -> Vec<f64> {
    let rad = (k / 2) as isize;
    let mut v = Vec::with_capacity(k * k);
    for dr in -rad..=rad {
        for dc in -rad..=rad {
            v.push(at(px, w, h, r + dr, c + dc));
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Full 2D Gaussian convolution, kernel of radius ceil(3σ) normalized over
/// its whole 2D support.
pub fn gaussian_2d(px: &[f32], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let rad = (3.0 * sigma).ceil() as isize;
    let mut kern = Vec::new();
    for dr in -rad..=rad {
        for dc in -rad..=rad {
            kern.push((-((dr * dr + dc * dc) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = kern.iter().sum();
    let side = (2 * rad + 1) as usize;
    let mut out = vec![0.0; w * h];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut acc = 0.0;
            for (i, kv) in kern.iter().enumerate() {
                let dr = (i / side) as isize - rad;
                let dc = (i % side) as isize - rad;
                acc += kv / total * at(px, w, h, r + dr, c + dc);
            }
            out[r as usize * w + c as usize] = acc;
        }
    }
    out
}

fn eig(a: f64, b: f64, c: f64) -> (f64, f64) {
    // roots of λ² − (a+c)λ + (ac − b²)
    let t = a + c;
    let d = a * c - b * b;
    let disc = (t * t / 4.0 - d).max(0.0).sqrt();
    (t / 2.0 + disc, t / 2.0 - disc)
}

fn eigen_block(a: &[f64], b: &[f64], c: &[f64]) -> [Vec<f64>; 4] {
    let mut out: [Vec<f64>; 4] = Default::default();
    for i in 0..a.len() {
        let (l1, l2) = eig(a[i], b[i], c[i]);
        out[0].push(l1);
        out[1].push(l2);
        out[2].push(a[i] + c[i]);
        out[3].push(a[i] * c[i] - b[i] * b[i]);
    }
    out
}

/// Prewitt derivatives (gx along columns, gy along rows), scaled by 1/6.
pub fn prewitt(px: &[f32], w: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]];
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let (mut sx, mut sy) = (0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let v = at(px, w, h, r + i as isize - 1, c + j as isize - 1);
                    sx += KX[i][j] * v;
                    sy += KX[j][i] * v;
                }
            }
            gx[r as usize * w + c as usize] = sx / 6.0;
            gy[r as usize * w + c as usize] = sy / 6.0;
        }
    }
    (gx, gy)
}

/// The 42 descriptor planes in canonical order, computed naively.
pub fn naive_planes(image: &EventImage) -> Vec<Vec<f64>> {
    let (w, h) = (image.width(), image.height());
    let px = image.pixels();
    let mut planes: Vec<Vec<f64>> = vec![px.iter().map(|&v| v as f64).collect()];

    for k in [3usize, 5, 7] {
        let mut stats: [Vec<f64>; 5] = Default::default();
        for r in 0..h as isize {
            for c in 0..w as isize {
                let v = window(px, w, h, r, c, k);
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                stats[0].push(v[0]);
                stats[1].push(v[v.len() - 1]);
                stats[2].push(v[v.len() / 2]);
                stats[3].push(mean);
                stats[4].push(var.sqrt());
            }
        }
        planes.extend(stats);
    }

    for s1 in [0.5, 0.75, 1.0] {
        let fine = gaussian_2d(px, w, h, s1);
        for s2 in [2.0, 3.0, 4.0] {
            let coarse = gaussian_2d(px, w, h, s2);
            planes.push(fine.iter().zip(&coarse).map(|(a, b)| a - b).collect());
        }
    }

    let (gx, gy) = prewitt(px, w, h);
    planes.push(gx.iter().zip(&gy).map(|(x, y)| (x * x + y * y).sqrt()).collect());

    let (mut fxx, mut fyy, mut fxy) = (vec![], vec![], vec![]);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let f = |dr: isize, dc: isize| at(px, w, h, r + dr, c + dc);
            fxx.push(f(0, 1) - 2.0 * f(0, 0) + f(0, -1));
            fyy.push(f(1, 0) - 2.0 * f(0, 0) + f(-1, 0));
            fxy.push((f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / 4.0);
        }
    }
    planes.extend(eigen_block(&fxx, &fxy, &fyy));

    let xx: Vec<f64> = gx.iter().map(|g| g * g).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let yy: Vec<f64> = gy.iter().map(|g| g * g).collect();
    for k in [3isize, 5, 7] {
        let rad = k / 2;
        let (mut a, mut b, mut c) = (vec![], vec![], vec![]);
        for r in 0..h as isize {
            for col in 0..w as isize {
                let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
                for dr in -rad..=rad {
                    for dc in -rad..=rad {
                        sa += at64(&xx, w, h, r + dr, col + dc);
                        sb += at64(&xy, w, h, r + dr, col + dc);
                        sc += at64(&yy, w, h, r + dr, col + dc);
                    }
                }
                let area = (k * k) as f64;
                a.push(sa / area);
                b.push(sb / area);
                c.push(sc / area);
            }
        }
        planes.extend(eigen_block(&a, &b, &c));
    }
    assert_eq!(planes.len(), 42);
    planes
}

/// `|a - b| <= rel * max(|a|, |b|) + abs`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// (tp, fp, fn, tn) for "positive when score >= t", counted one by one.
pub fn brute_counts(scores: &[f64], labels: &[u8], t: f64) -> (u64, u64, u64, u64) {
    let mut c = (0, 0, 0, 0);
    for i in 0..scores.len() {
        let predicted = scores[i] >= t;
        let actual = labels[i] == 1;
        if predicted && actual {
            c.0 += 1;
        } else if predicted {
            c.1 += 1;
        } else if actual {
            c.2 += 1;
        } else {
            c.3 += 1;
        }
    }
    c
}

/// Fraction of trees whose reached leaf has a track majority, by walking
/// node records directly.
pub fn traverse_forest(trees: &[DecisionTree], row: &[f32]) -> f64 {
    let mut votes = 0.0;
    for t in trees {
        let mut i = 0;
        loop {
            match t.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if (row[feature as usize] as f64) <= threshold {
                        left as usize
                    } else {
                        right as usize
                    }
                }
                Node::Leaf {
                    positive_fraction, ..
                } => {
                    if positive_fraction > 0.5 {
                        votes += 1.0;
                    }
                    break;
                }
            }
        }
    }
    votes / trees.len() as f64
}

fn gini_sum(labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let p = labels.iter().filter(|&&l| l == 1).count() as f64 / n;
    n * (1.0 - p * p - (1.0 - p) * (1.0 - p))
}

/// Exhaustive single CART tree on unit-weight rows.
///
/// When several (feature, threshold) pairs reach the minimal weighted Gini,
/// the one `tie_break` picks is used. It receives the node's path from the
/// root (`true` = right) so a test can defer to the tree under test, whose
/// choice among equals depends on its feature shuffle.
pub struct CartOracle {
    pub nodes: Vec<OracleNode>,
}

pub enum OracleNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

impl CartOracle {
    pub fn fit(
        rows: &[Vec<f32>],
        labels: &[u8],
        tie_break: &mut dyn FnMut(&[bool], &[(usize, f64)]) -> (usize, f64),
    ) -> Self {
        let mut oracle = CartOracle { nodes: vec![] };
        let idx: Vec<usize> = (0..rows.len()).collect();
        oracle.grow(rows, labels, &idx, &mut vec![], tie_break);
        oracle
    }

    fn grow(
        &mut self,
        rows: &[Vec<f32>],
        labels: &[u8],
        idx: &[usize],
        path: &mut Vec<bool>,
        tie_break: &mut dyn FnMut(&[bool], &[(usize, f64)]) -> (usize, f64),
    ) -> usize {
        let id = self.nodes.len();
        let node_labels: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
        let pos = node_labels.iter().filter(|&&l| l == 1).count();
        self.nodes.push(OracleNode::Leaf(pos as f64 / idx.len() as f64));
        if pos == 0 || pos == idx.len() {
            return id;
        }

        let mut best = f64::INFINITY;
        let mut candidates: Vec<(usize, f64)> = vec![];
        for f in 0..rows[0].len() {
            let mut values: Vec<f32> = idx.iter().map(|&i| rows[i][f]).collect();
            values.sort_by(f32::total_cmp);
            values.dedup();
            for pair in values.windows(2) {
                let thr = (pair[0] as f64 + pair[1] as f64) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| rows[i][f] as f64 <= thr);
                let lab = |s: &[usize]| s.iter().map(|&i| labels[i]).collect::<Vec<u8>>();
                let g = gini_sum(&lab(&l)) + gini_sum(&lab(&r));
                if g < best - 1e-12 {
                    best = g;
                    candidates.clear();
                }
                if (g - best).abs() <= 1e-12 {
                    candidates.push((f, thr));
                }
            }
        }
        if candidates.is_empty() {
            return id;
        }
        let (feature, threshold) = if candidates.len() == 1 {
            candidates[0]
        } else {
            tie_break(path, &candidates)
        };
        assert!(
            candidates.contains(&(feature, threshold)),
            "tie-break chose a non-optimal split"
        );
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| rows[i][feature] as f64 <= threshold);
        path.push(false);
        let left = self.grow(rows, labels, &l, path, tie_break);
        path.pop();
        path.push(true);
        let right = self.grow(rows, labels, &r, path, tie_break);
        path.pop();
        self.nodes[id] = OracleNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    pub fn predict(&self, row: &[f32]) -> u8 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                OracleNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature] as f64 <= threshold {
                        left
                    } else {
                        right
                    }
                }
                OracleNode::Leaf(p) => return (p > 0.5) as u8,
            }
        }
    }
}
