//! Exact greedy regression-tree growth on the second-order objective.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use crate::error::{Error, Result};

/// A fitted tree. Rows go left iff `value < threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    /// Prediction for row `row` of a column-major dataset.
    pub fn predict_in(&self, data: &Dataset, row: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if data.value(row, *feature) < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn uses_feature(&self, f: usize) -> bool {
        match self {
            TreeNode::Leaf { .. } => false,
            TreeNode::Split { feature, left, right, .. } => {
                *feature == f || left.uses_feature(f) || right.uses_feature(f)
            }
        }
    }

    /// Visit every split as `(feature, threshold)`.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize, f64)) {
        if let TreeNode::Split { feature, threshold, left, right } = self {
            f(*feature, *threshold);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        match self {
            TreeNode::Leaf { weight } => *weight *= factor,
            TreeNode::Split { left, right, .. } => {
                left.scale_leaves(factor);
                right.scale_leaves(factor);
            }
        }
    }
}

/// Gains closer than this fraction of the node's squared-gradient sum count
/// as ties, so rounding in the prefix sums cannot override the tie order.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

/// Growth controls for a single tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum gain for a split to be kept.
    pub gamma: f64,
    /// Minimum hessian sum in each child.
    pub min_child_weight: f64,
    /// Features drawn afresh at every node; `None` searches all allowed features.
    pub features_per_split: Option<usize>,
}

/// Second-order split gain.
pub fn split_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(g_left, h_left) + score(g_right, h_right) - score(g_left + g_right, h_left + h_right)) - gamma
}

/// Optimal leaf weight `-G / (H + lambda)`.
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let den = h + lambda;
    if den > 0.0 {
        -g / den
    } else {
        0.0
    }
}

struct Grower<'a, R> {
    data: &'a Dataset,
    rows: &'a [usize],
    grad: &'a [f64],
    hess: &'a [f64],
    allowed: &'a [usize],
    params: &'a TreeParams,
    rng: &'a mut R,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl<R: Rng> Grower<'_, R> {
    fn value(&self, pos: u32, feature: usize) -> f64 {
        self.data.value(self.rows[pos as usize], feature)
    }

    /// `members` is ascending by position; `sorted[i]` holds the same positions
    /// ordered by the value of feature `allowed[i]`.
    fn grow(&mut self, members: Vec<u32>, sorted: Vec<Vec<u32>>, depth: usize) -> TreeNode {
        let (g, h, g2) = members.iter().fold((0.0, 0.0, 0.0), |(g, h, g2), &p| {
            let gp = self.grad[p as usize];
            (g + gp, h + self.hess[p as usize], g2 + gp * gp)
        });
        let tol = GAIN_TIE_TOLERANCE * g2;
        let leaf = TreeNode::Leaf {
            weight: leaf_weight(g, h, self.params.lambda),
        };
        if depth >= self.params.max_depth || members.len() < 2 {
            return leaf;
        }

        let candidates: Vec<usize> = match self.params.features_per_split {
            Some(k) if k < self.allowed.len() => {
                let mut idx = sample(self.rng, self.allowed.len(), k.max(1)).into_vec();
                idx.sort_unstable();
                idx
            }
            _ => (0..self.allowed.len()).collect(),
        };

        let mut best: Option<BestSplit> = None;
        for &slot in &candidates {
            let feature = self.allowed[slot];
            let order = &sorted[slot];
            let (mut gl, mut hl) = (0.0, 0.0);
            for i in 0..order.len() - 1 {
                let p = order[i] as usize;
                gl += self.grad[p];
                hl += self.hess[p];
                let v = self.value(order[i], feature);
                let next = self.value(order[i + 1], feature);
                if v == next {
                    continue;
                }
                let (gr, hr) = (g - gl, h - hl);
                if hl < self.params.min_child_weight || hr < self.params.min_child_weight {
                    continue;
                }
                let gain = split_gain(gl, hl, gr, hr, self.params.lambda, self.params.gamma);
                if best.as_ref().is_none_or(|b| gain > b.gain + tol) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold <= v {
                        threshold = next;
                    }
                    best = Some(BestSplit { gain, feature, threshold });
                }
            }
        }

        let Some(best) = best.filter(|b| b.gain > tol) else {
            return leaf;
        };

        let goes_left = |p: &u32| self.value(*p, best.feature) < best.threshold;
        let (left_members, right_members): (Vec<u32>, Vec<u32>) = members.iter().partition(|p| goes_left(p));
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for order in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = order.into_iter().partition(|p| goes_left(p));
            left_sorted.push(l);
            right_sorted.push(r);
        }
        drop(members);

        let left = self.grow(left_members, left_sorted, depth + 1);
        let right = self.grow(right_members, right_sorted, depth + 1);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Grow one tree over `rows` of `data` (duplicates allowed), where `grad[i]`
/// and `hess[i]` belong to `rows[i]`. Only the features in `allowed` are
/// considered. Ties in gain go to the lower feature index, then the lower
/// threshold; see [`GAIN_TIE_TOLERANCE`].
pub fn fit_tree<R: Rng>(
    data: &Dataset,
    rows: &[usize],
    grad: &[f64],
    hess: &[f64],
    allowed: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> Result<TreeNode> {
    if rows.is_empty() {
        return Err(Error::invalid("cannot fit a tree on zero rows"));
    }
    if grad.len() != rows.len() || hess.len() != rows.len() {
        return Err(Error::invalid("gradients and hessians must match the row count"));
    }
    if rows.len() > u32::MAX as usize {
        return Err(Error::invalid("too many rows"));
    }
    if let Some(&f) = allowed.iter().find(|&&f| f >= data.n_features()) {
        return Err(Error::invalid(format!("feature index {f} out of range")));
    }
    let mut allowed = allowed.to_vec();
    allowed.sort_unstable();
    allowed.dedup();

    let members: Vec<u32> = (0..rows.len() as u32).collect();
    let sorted: Vec<Vec<u32>> = allowed
        .iter()
        .map(|&f| {
            let col = data.column(f);
            let mut order = members.clone();
            order.sort_by(|&a, &b| col[rows[a as usize]].total_cmp(&col[rows[b as usize]]).then(a.cmp(&b)));
            order
        })
        .collect();

    let mut grower = Grower {
        data,
        rows,
        grad,
        hess,
        allowed: &allowed,
        params,
        rng,
    };
    Ok(grower.grow(members, sorted, 0))
}
