use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::boost::GbmConfig;
use super::data::Dataset;
use super::forest::ForestConfig;
use super::tree::TreeNode;
use crate::error::{Error, Result};
use crate::frame::Frame;

pub const FORMAT_NAME: &str = "thermocast-ensemble";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    Forest,
    Boosted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleConfig {
    Forest(ForestConfig),
    Boosted(GbmConfig),
}

/// A fitted tree ensemble. Boosted predictions are `base_score` plus the sum
/// of tree outputs (learning rate already folded into the leaves); forest
/// predictions are the mean of tree outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub mode: EnsembleMode,
    pub base_score: f64,
    pub trees: Vec<TreeNode>,
    pub config: EnsembleConfig,
    pub feature_names: Vec<String>,
}

impl TreeEnsemble {
    pub fn new(
        mode: EnsembleMode,
        base_score: f64,
        trees: Vec<TreeNode>,
        config: EnsembleConfig,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if mode == EnsembleMode::Forest && trees.is_empty() {
            return Err(Error::invalid("a forest needs at least one tree"));
        }
        if !base_score.is_finite() {
            return Err(Error::invalid("base score must be finite"));
        }
        for tree in &trees {
            let mut bad = None;
            tree.for_each_split(&mut |f, t| {
                if f >= feature_names.len() || !t.is_finite() {
                    bad = Some((f, t));
                }
            });
            if let Some((f, t)) = bad {
                return Err(Error::invalid(format!("invalid split on feature {f} at {t}")));
            }
        }
        Ok(Self {
            mode,
            base_score,
            trees,
            config,
            feature_names,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn combine(&self, outputs: impl Iterator<Item = f64>) -> f64 {
        match self.mode {
            EnsembleMode::Boosted => outputs.fold(self.base_score, |acc, v| acc + v),
            EnsembleMode::Forest => self.base_score + outputs.sum::<f64>() / self.trees.len() as f64,
        }
    }

    /// Prediction for one row given in `feature_names` order.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_names.len() {
            return Err(Error::invalid(format!(
                "row has {} values, ensemble expects {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        Ok(self.combine(self.trees.iter().map(|t| t.predict(row))))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        (0..data.n_rows())
            .map(|r| self.combine(self.trees.iter().map(|t| t.predict_in(data, r))))
            .collect()
    }

    /// Predictions for every row of `frame`; all feature columns must exist.
    pub fn predict(&self, frame: &Frame) -> Result<Vec<f64>> {
        let data = Dataset::from_frame(frame, &self.feature_names)?;
        Ok(self.predict_dataset(&data))
    }

    /// Indented text rendering of tree `index`, left branch first, down to
    /// `max_depth_shown` split levels.
    pub fn dump_tree(&self, index: usize, max_depth_shown: usize) -> Result<String> {
        let tree = self.trees.get(index).ok_or_else(|| {
            Error::invalid(format!("tree index {index} out of range (ensemble has {})", self.trees.len()))
        })?;
        let mut out = String::new();
        self.dump_node(tree, 0, max_depth_shown, &mut out);
        Ok(out)
    }

    fn dump_node(&self, node: &TreeNode, depth: usize, max_depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        match node {
            TreeNode::Leaf { weight } => {
                let _ = writeln!(out, "{indent}leaf: {weight}");
            }
            TreeNode::Split { .. } if depth >= max_depth => {
                let _ = writeln!(out, "{indent}...");
            }
            TreeNode::Split { feature, threshold, left, right } => {
                let _ = writeln!(out, "{indent}{} < {threshold}", self.feature_names[*feature]);
                self.dump_node(left, depth + 1, max_depth, out);
                self.dump_node(right, depth + 1, max_depth, out);
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = Document {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            mode: self.mode,
            base_score: self.base_score,
            config: self.config,
            feature_names: self.feature_names.clone(),
            trees: self.trees.iter().map(flatten).collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.format != FORMAT_NAME {
            return Err(Error::Format(format!("unexpected format {:?}", doc.format)));
        }
        if doc.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", doc.version)));
        }
        let trees = doc
            .trees
            .iter()
            .enumerate()
            .map(|(i, nodes)| unflatten(nodes).map_err(|e| Error::Format(format!("tree {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.mode, doc.base_score, trees, doc.config, doc.feature_names)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    mode: EnsembleMode,
    base_score: f64,
    config: EnsembleConfig,
    feature_names: Vec<String>,
    trees: Vec<Vec<FlatNode>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FlatNode {
    Split { feature: usize, threshold: f64 },
    Leaf { weight: f64 },
}

fn flatten(tree: &TreeNode) -> Vec<FlatNode> {
    fn walk(node: &TreeNode, out: &mut Vec<FlatNode>) {
        match node {
            TreeNode::Leaf { weight } => out.push(FlatNode::Leaf { weight: *weight }),
            TreeNode::Split { feature, threshold, left, right } => {
                out.push(FlatNode::Split {
                    feature: *feature,
                    threshold: *threshold,
                });
                walk(left, out);
                walk(right, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut out);
    out
}

fn unflatten(nodes: &[FlatNode]) -> std::result::Result<TreeNode, String> {
    fn build(nodes: &[FlatNode], pos: &mut usize) -> std::result::Result<TreeNode, String> {
        let node = nodes.get(*pos).ok_or("truncated node list")?;
        *pos += 1;
        Ok(match node {
            FlatNode::Leaf { weight } => TreeNode::Leaf { weight: *weight },
            FlatNode::Split { feature, threshold } => {
                let left = build(nodes, pos)?;
                let right = build(nodes, pos)?;
                TreeNode::Split {
                    feature: *feature,
                    threshold: *threshold,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
        })
    }
    let mut pos = 0;
    let tree = build(nodes, &mut pos)?;
    if pos != nodes.len() {
        return Err("trailing nodes after tree".into());
    }
    Ok(tree)
}
