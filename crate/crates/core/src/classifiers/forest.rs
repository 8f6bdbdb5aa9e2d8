//! Random forest of unpruned CART trees on the Gini criterion.
//!
//! Each tree sees a bootstrap resample of the training rows and considers a
//! random subset of features at every node. Tree `t` draws from stream `t`
//! of the forest seed, so a forest with more trees extends, rather than
//! replaces, a smaller one trained with the same seed.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_labels, PredictError, TrainConfig, TrainError};
use crate::dataset::LabeledDataset;
use crate::features::{FeatureMatrix, N_FEATURES};
use crate::rng;

/// Tree node in a flat arena; children are indices into the same arena.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u16,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Track fraction of the (bootstrap-weighted) training rows in the leaf.
        positive_fraction: f64,
        /// Bootstrap-weighted training rows in the leaf.
        samples: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecisionTree {
    /// Root is node 0.
    pub nodes: Vec<Node>,
    /// Gini decrease per feature, each split weighted by its share of the
    /// tree's training rows.
    pub impurity_decrease: Vec<f64>,
}

impl DecisionTree {
    pub fn leaf_for(&self, row: &[f32]) -> &Node {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature as usize] as f64 <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                leaf => return leaf,
            }
        }
    }

    /// 1 if the leaf reached by `row` has a track majority, else 0.
    pub fn vote(&self, row: &[f32]) -> u8 {
        match self.leaf_for(row) {
            Node::Leaf {
                positive_fraction, ..
            } => (*positive_fraction > 0.5) as u8,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => {
                    1 + go(nodes, *left as usize).max(go(nodes, *right as usize))
                }
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    fn validate(&self) -> Result<(), PredictError> {
        if self.nodes.is_empty() {
            return Err(PredictError::Malformed("empty tree"));
        }
        if self.impurity_decrease.len() != N_FEATURES {
            return Err(PredictError::Malformed("importance vector length is not 42"));
        }
        let n = self.nodes.len() as u32;
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature as usize >= N_FEATURES {
                        return Err(PredictError::Malformed("split feature index out of range"));
                    }
                    if !threshold.is_finite() {
                        return Err(PredictError::Malformed("non-finite split threshold"));
                    }
                    // children always follow their parent, which rules out cycles
                    if *left >= n || *right >= n || *left as usize <= i || *right as usize <= i {
                        return Err(PredictError::Malformed("bad child index"));
                    }
                }
                Node::Leaf {
                    positive_fraction, ..
                } => {
                    if !(0.0..=1.0).contains(positive_fraction) {
                        return Err(PredictError::Malformed("leaf fraction outside [0, 1]"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Ensemble of decision trees; the score is the fraction of trees voting track.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub feature_count: usize,
    /// Sum of the trees' impurity decreases.
    pub impurity_totals: Vec<f64>,
}

impl ForestModel {
    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        let mut impurity_totals = alloc::vec![0.0; N_FEATURES];
        for t in &trees {
            for (acc, d) in impurity_totals.iter_mut().zip(&t.impurity_decrease) {
                *acc += d;
            }
        }
        Self {
            trees,
            feature_count: N_FEATURES,
            impurity_totals,
        }
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// The first `n` trees as a forest of their own.
    pub fn truncated(&self, n: usize) -> ForestModel {
        ForestModel::from_trees(self.trees[..n.min(self.trees.len())].to_vec())
    }

    pub fn score(&self, row: &[f32]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| t.vote(row) as usize).sum();
        votes as f64 / self.trees.len() as f64
    }

    pub fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<f64>, PredictError> {
        if self.feature_count != features.n_features() {
            return Err(PredictError::FeatureCount {
                expected: self.feature_count,
                actual: features.n_features(),
            });
        }
        if self.trees.is_empty() {
            return Err(PredictError::Malformed("forest has no trees"));
        }
        Ok(features.rows().map(|r| self.score(r)).collect())
    }

    pub(crate) fn validate(&self) -> Result<(), PredictError> {
        if self.feature_count != N_FEATURES {
            return Err(PredictError::FeatureCount {
                expected: self.feature_count,
                actual: N_FEATURES,
            });
        }
        if self.trees.is_empty() {
            return Err(PredictError::Malformed("forest has no trees"));
        }
        if self.impurity_totals.len() != N_FEATURES {
            return Err(PredictError::Malformed("importance vector length is not 42"));
        }
        self.trees.iter().try_for_each(DecisionTree::validate)
    }
}

/// Mean decrease in Gini impurity per feature, normalized to sum to 1.
/// All zeros if no tree ever split.
pub fn feature_importance(model: &ForestModel) -> Vec<f64> {
    let total: f64 = model.impurity_totals.iter().sum();
    if total > 0.0 {
        model.impurity_totals.iter().map(|v| v / total).collect()
    } else {
        alloc::vec![0.0; model.impurity_totals.len()]
    }
}

/// `(feature index, importance)` from most to least important; ties keep
/// index order.
pub fn ranked_importance(model: &ForestModel) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = feature_importance(model).into_iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Trains `config.n_trees` trees.
pub fn train_forest(data: &LabeledDataset, config: &TrainConfig) -> Result<ForestModel, TrainError> {
    config.validate()?;
    check_labels(data.n_samples(), data.labels())?;
    let columns: Vec<Vec<f32>> = (0..N_FEATURES).map(|f| data.features().column(f)).collect();
    let ctx = GrowContext {
        columns: &columns,
        labels: data.labels(),
        max_features: config.max_features,
        min_leaf: config.min_samples_leaf as u64,
        bootstrap: config.bootstrap,
        seed: config.forest_seed,
    };
    Ok(ForestModel::from_trees(grow_all(&ctx, config.n_trees)))
}

#[cfg(feature = "parallel")]
fn grow_all(ctx: &GrowContext<'_>, n_trees: usize) -> Vec<DecisionTree> {
    use rayon::prelude::*;
    (0..n_trees).into_par_iter().map(|t| ctx.grow(t as u64)).collect()
}

#[cfg(not(feature = "parallel"))]
fn grow_all(ctx: &GrowContext<'_>, n_trees: usize) -> Vec<DecisionTree> {
    (0..n_trees).map(|t| ctx.grow(t as u64)).collect()
}

struct GrowContext<'a> {
    columns: &'a [Vec<f32>],
    labels: &'a [u8],
    max_features: usize,
    min_leaf: u64,
    bootstrap: bool,
    seed: u64,
}

/// A training row and how often the bootstrap drew it.
#[derive(Clone, Copy)]
struct Sample {
    index: u32,
    weight: u32,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Sort key for an f32 whose unsigned order matches the float order.
#[inline]
fn order_key(v: f32) -> u32 {
    let bits = v.to_bits();
    if bits & 0x8000_0000 != 0 {
        !bits
    } else {
        bits | 0x8000_0000
    }
}

#[inline]
fn from_order_key(k: u32) -> f32 {
    if k & 0x8000_0000 != 0 {
        f32::from_bits(k & 0x7fff_ffff)
    } else {
        f32::from_bits(!k)
    }
}

/// Sorts by the high 32 bits only; the low bits ride along.
fn sort_keys(keys: &mut Vec<u64>, scratch: &mut Vec<u64>) {
    if keys.len() < 2048 {
        keys.sort_unstable_by_key(|k| k >> 32);
        return;
    }
    // LSD radix sort, four 8-bit digits
    scratch.clear();
    scratch.resize(keys.len(), 0);
    for shift in [32u32, 40, 48, 56] {
        let mut offsets = [0usize; 256];
        for &k in keys.iter() {
            offsets[((k >> shift) & 0xff) as usize] += 1;
        }
        let mut acc = 0;
        for o in offsets.iter_mut() {
            let c = *o;
            *o = acc;
            acc += c;
        }
        for &k in keys.iter() {
            let d = ((k >> shift) & 0xff) as usize;
            scratch[offsets[d]] = k;
            offsets[d] += 1;
        }
        core::mem::swap(keys, scratch);
    }
}

#[inline]
fn purity_score(pos: f64, total: f64) -> f64 {
    // (pos² + neg²) / total; larger means purer
    let neg = total - pos;
    (pos * pos + neg * neg) / total
}

impl GrowContext<'_> {
    fn grow(&self, tree_index: u64) -> DecisionTree {
        let mut rng = rng::stream(self.seed, tree_index);
        let n = self.labels.len();

        let mut samples: Vec<Sample> = if self.bootstrap {
            let mut counts = alloc::vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| Sample {
                    index: i as u32,
                    weight: c,
                })
                .collect()
        } else {
            (0..n)
                .map(|i| Sample {
                    index: i as u32,
                    weight: 1,
                })
                .collect()
        };

        let root_weight: u64 = samples.iter().map(|s| s.weight as u64).sum();
        let mut nodes = alloc::vec![Node::Leaf {
            positive_fraction: 0.0,
            samples: 0,
        }];
        let mut importance = alloc::vec![0.0; N_FEATURES];
        let mut order: [u16; N_FEATURES] = core::array::from_fn(|i| i as u16);
        let mut keys: Vec<u64> = Vec::new();
        let mut scratch: Vec<u64> = Vec::new();

        // (node id, start, end) ranges into `samples`
        let mut stack = alloc::vec![(0usize, 0usize, samples.len())];
        while let Some((id, start, end)) = stack.pop() {
            let node = &mut samples[start..end];
            let (pos, total) = node.iter().fold((0u64, 0u64), |(p, t), s| {
                (p + s.weight as u64 * self.labels[s.index as usize] as u64, t + s.weight as u64)
            });
            let leaf = Node::Leaf {
                positive_fraction: pos as f64 / total as f64,
                samples: total as u32,
            };
            if pos == 0 || pos == total || total < 2 * self.min_leaf {
                nodes[id] = leaf;
                continue;
            }

            order.shuffle(&mut rng);
            let Some(best) = self.best_split(node, &order, pos, total, &mut keys, &mut scratch) else {
                nodes[id] = leaf;
                continue;
            };

            let column = &self.columns[best.feature];
            let mut split = 0;
            for i in 0..node.len() {
                if column[node[i].index as usize] as f64 <= best.threshold {
                    node.swap(i, split);
                    split += 1;
                }
            }

            let decrease = best.score - purity_score(pos as f64, total as f64);
            importance[best.feature] += decrease / root_weight as f64;

            let left = nodes.len();
            nodes.push(leaf.clone());
            nodes.push(leaf);
            nodes[id] = Node::Split {
                feature: best.feature as u16,
                threshold: best.threshold,
                left: left as u32,
                right: left as u32 + 1,
            };
            stack.push((left + 1, start + split, end));
            stack.push((left, start, start + split));
        }

        DecisionTree {
            nodes,
            impurity_decrease: importance,
        }
    }

    /// Best Gini split over features taken in `order` until `max_features`
    /// non-constant ones have been examined. The first best wins ties.
    fn best_split(
        &self,
        node: &[Sample],
        order: &[u16],
        pos: u64,
        total: u64,
        keys: &mut Vec<u64>,
        scratch: &mut Vec<u64>,
    ) -> Option<BestSplit> {
        let mut best: Option<BestSplit> = None;
        let mut examined = 0;
        for &f in order {
            if examined == self.max_features {
                break;
            }
            let column = &self.columns[f as usize];

            // key: ordered value (high 32) | label (bit 31) | weight (low 31)
            keys.clear();
            keys.extend(node.iter().map(|s| {
                let label = self.labels[s.index as usize] as u64;
                ((order_key(column[s.index as usize]) as u64) << 32)
                    | (label << 31)
                    | s.weight as u64
            }));
            let first = keys[0] >> 32;
            if keys.iter().all(|k| k >> 32 == first) {
                continue;
            }
            examined += 1;
            sort_keys(keys, scratch);

            let mut left_pos = 0u64;
            let mut left_total = 0u64;
            for i in 0..keys.len() - 1 {
                let w = keys[i] & 0x7fff_ffff;
                left_total += w;
                left_pos += w * ((keys[i] >> 31) & 1);
                let here = from_order_key((keys[i] >> 32) as u32);
                let next = from_order_key((keys[i + 1] >> 32) as u32);
                if here >= next {
                    continue;
                }
                let right_total = total - left_total;
                if left_total < self.min_leaf || right_total < self.min_leaf {
                    continue;
                }
                let score = purity_score(left_pos as f64, left_total as f64)
                    + purity_score((pos - left_pos) as f64, right_total as f64);
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(BestSplit {
                        feature: f as usize,
                        threshold: 0.5 * (here as f64 + next as f64),
                        score,
                    });
                }
            }
        }
        best
    }
}
