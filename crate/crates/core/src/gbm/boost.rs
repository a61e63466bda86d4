use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::ensemble::{EnsembleConfig, EnsembleMode, TreeEnsemble};
use super::tree::{fit_tree, TreeParams};
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Second-order gradient boosting settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub row_subsample: f64,
    pub col_subsample: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for GbmConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 4,
            learning_rate: 0.3,
            row_subsample: 0.6,
            col_subsample: 0.8,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl GbmConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        unit("learning_rate", self.learning_rate)?;
        unit("row_subsample", self.row_subsample)?;
        unit("col_subsample", self.col_subsample)?;
        for (name, v) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            lambda: self.lambda,
            gamma: self.gamma,
            min_child_weight: self.min_child_weight,
            features_per_split: None,
        }
    }
}

pub(crate) fn check_features(frame: &Frame, target: &str, features: &[String]) -> Result<()> {
    if features.is_empty() {
        return Err(Error::invalid("feature list is empty"));
    }
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    if features.iter().any(|f| f == target) {
        return Err(Error::invalid(format!("target {target:?} must not be a feature")));
    }
    if frame.kind(target)? != crate::frame::ColumnKind::Numeric {
        return Err(Error::column(target, "target must be numeric"));
    }
    Ok(())
}

fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    (sse / y.len() as f64).sqrt()
}

/// Fit a boosted ensemble on the named features of `train`.
pub fn fit_boosted(train: &Frame, target: &str, features: &[String], config: &GbmConfig) -> Result<TreeEnsemble> {
    fit_boosted_with_history(train, target, features, config).map(|(e, _)| e)
}

/// As [`fit_boosted`], also returning the training RMSE before the first
/// round and after every round.
pub fn fit_boosted_with_history(
    train: &Frame,
    target: &str,
    features: &[String],
    config: &GbmConfig,
) -> Result<(TreeEnsemble, Vec<f64>)> {
    check_features(train, target, features)?;
    let data = Dataset::from_frame(train, features)?;
    let y = train.values(target)?;
    boost_dataset(&data, y, config)
}

pub(crate) fn boost_dataset(data: &Dataset, y: &[f64], config: &GbmConfig) -> Result<(TreeEnsemble, Vec<f64>)> {
    config.validate()?;
    let n = data.n_rows();
    if n == 0 || y.len() != n {
        return Err(Error::invalid("target length must match a non-empty dataset"));
    }
    let n_features = data.n_features();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut history = vec![rmse(&pred, y)];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = config.tree_params();

    let n_rows_round = ((n as f64 * config.row_subsample).round() as usize).clamp(1, n);
    let n_cols_round = ((n_features as f64 * config.col_subsample).round() as usize).clamp(1, n_features);

    let mut trees = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        let rows: Vec<usize> = if n_rows_round == n {
            (0..n).collect()
        } else {
            let mut r = sample(&mut rng, n, n_rows_round).into_vec();
            r.sort_unstable();
            r
        };
        let allowed: Vec<usize> = if n_cols_round == n_features {
            (0..n_features).collect()
        } else {
            let mut c = sample(&mut rng, n_features, n_cols_round).into_vec();
            c.sort_unstable();
            c
        };
        let grad: Vec<f64> = rows.iter().map(|&r| pred[r] - y[r]).collect();
        let hess = vec![1.0; rows.len()];
        let mut tree = fit_tree(data, &rows, &grad, &hess, &allowed, &params, &mut rng)?;
        tree.scale_leaves(config.learning_rate);
        for (r, p) in pred.iter_mut().enumerate() {
            *p += tree.predict_in(data, r);
        }
        history.push(rmse(&pred, y));
        trees.push(tree);
    }

    let ensemble = TreeEnsemble::new(
        EnsembleMode::Boosted,
        base_score,
        trees,
        EnsembleConfig::Boosted(*config),
        data.names().to_vec(),
    )?;
    Ok((ensemble, history))
}
