//! Random-forest regression built on variance-reduction CART trees.
//!
//! Each tree is grown on a bootstrap resample; each split considers a random
//! subset of feature indices and picks the (feature, threshold) pair with the
//! lowest summed child squared error. Thresholds are midpoints between
//! consecutive sorted unique feature values. Ties break toward the lowest
//! feature index, then the lowest threshold, so training is a pure function
//! of (data, hyperparameters, seed).

use crate::dataset::{Dataset, Target};
use crate::error::{CoreError, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    /// Feature indices drawn per split (m). If no drawn feature admits a
    /// split, the remaining features are tried in random order before the
    /// node becomes a leaf.
    pub features_per_split: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            features_per_split: 14, // ceil(40 / 3)
            min_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        mean: f64,
    },
    Internal {
        feature: usize,
        threshold: f64,
        /// Arena indices of the `< threshold` / `>= threshold` children.
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, features: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { mean } => return *mean,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Grow a tree on the rows selected by `rows` (indices into x/y, with
    /// repetition allowed for bootstrap samples).
    fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        rows: Vec<usize>,
        hyper: &ForestHyperparams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        tree.grow(x, y, rows, hyper, rng);
        tree
    }

    fn grow(
        &mut self,
        x: &[Vec<f64>],
        y: &[f64],
        rows: Vec<usize>,
        hyper: &ForestHyperparams,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
        let node_idx = self.nodes.len();
        if rows.len() <= hyper.min_leaf || rows.len() < 2 {
            self.nodes.push(Node::Leaf { mean });
            return node_idx;
        }
        let sse: f64 = rows.iter().map(|&r| (y[r] - mean).powi(2)).sum();
        if sse <= f64::EPSILON * rows.len() as f64 {
            self.nodes.push(Node::Leaf { mean });
            return node_idx;
        }
        let split = match best_split(x, y, &rows, hyper, rng) {
            Some(s) => s,
            None => {
                self.nodes.push(Node::Leaf { mean });
                return node_idx;
            }
        };
        let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
        for &r in &rows {
            if x[r][split.feature] < split.threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        self.nodes.push(Node::Leaf { mean }); // placeholder, patched below
        let left = self.grow(x, y, left_rows, hyper, rng);
        let right = self.grow(x, y, right_rows, hyper, rng);
        self.nodes[node_idx] = Node::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        node_idx
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    sse: f64,
}

/// Exhaustive threshold scan over a random draw of feature indices. Returns
/// the split minimizing the summed child squared error, or None when every
/// feature is constant on these rows.
fn best_split(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    hyper: &ForestHyperparams,
    rng: &mut ChaCha8Rng,
) -> Option<Split> {
    let n_features = x[0].len();
    let mut order: Vec<usize> = (0..n_features).collect();
    order.shuffle(rng);
    let m = hyper.features_per_split.clamp(1, n_features);

    let mut best: Option<Split> = None;
    let mut tried = 0usize;
    for &feature in &order {
        if tried >= m && best.is_some() {
            break;
        }
        tried += 1;
        if let Some(s) = best_split_on_feature(x, y, rows, feature) {
            let replace = match &best {
                None => true,
                Some(b) => {
                    (s.sse, s.feature, s.threshold) < (b.sse, b.feature, b.threshold)
                }
            };
            if replace {
                best = Some(s);
            }
        }
    }
    best
}

fn best_split_on_feature(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    feature: usize,
) -> Option<Split> {
    let mut pairs: Vec<(f64, f64)> = rows.iter().map(|&r| (x[r][feature], y[r])).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = pairs.len();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut best: Option<Split> = None;
    let mut left_sum = 0.0;
    let mut left_sq = 0.0;
    let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    for k in 0..n - 1 {
        left_sum += pairs[k].1;
        left_sq += pairs[k].1 * pairs[k].1;
        if pairs[k + 1].0 <= pairs[k].0 {
            continue; // no boundary between equal values
        }
        let threshold = 0.5 * (pairs[k].0 + pairs[k + 1].0);
        let n_l = (k + 1) as f64;
        let n_r = (n - k - 1) as f64;
        let right_sum = total - left_sum;
        let right_sq = total_sq - left_sq;
        let sse = (left_sq - left_sum * left_sum / n_l) + (right_sq - right_sum * right_sum / n_r);
        let candidate = Split { feature, threshold, sse };
        let replace = match &best {
            None => true,
            Some(b) => (sse, threshold) < (b.sse, b.threshold),
        };
        if replace {
            best = Some(candidate);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub hyperparams: ForestHyperparams,
    pub seed: u64,
    pub target: Target,
    pub feature_dim: usize,
    /// All training targets were identical; the model is a constant
    /// predictor.
    pub degenerate_target: bool,
    /// Training-target bounds; forest predictions cannot leave them.
    pub target_range: (f64, f64),
}

/// Train one forest for one physical quantity. Tree `t` draws from its own
/// RNG stream derived from the master seed, so trees are independent of
/// training order.
pub fn train_forest(
    train: &Dataset,
    target: Target,
    hyper: &ForestHyperparams,
    seed: u64,
) -> Result<ForestModel> {
    if train.is_empty() {
        return Err(CoreError::SizeMismatch("training set is empty".into()));
    }
    let (x, y) = train.design(target);
    let n = y.len();
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = lo == hi;

    let mut trees = Vec::with_capacity(hyper.n_trees);
    for t in 0..hyper.n_trees {
        let mut rng = tree_rng(seed, t as u64);
        let rows: Vec<usize> = if hyper.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(RegressionTree::fit(&x, &y, rows, hyper, &mut rng));
    }
    Ok(ForestModel {
        trees,
        hyperparams: *hyper,
        seed,
        target,
        feature_dim: train.feature_dim(),
        degenerate_target: degenerate,
        target_range: (lo, hi),
    })
}

/// Independent per-tree stream: splitmix64 of (seed, tree index).
fn tree_rng(seed: u64, tree: u64) -> ChaCha8Rng {
    let mut z = seed ^ tree.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

impl ForestModel {
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.feature_dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.feature_dim,
                got: features.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(features)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}
