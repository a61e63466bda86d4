use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boost::check_features;
use super::data::Dataset;
use super::ensemble::{EnsembleConfig, EnsembleMode, TreeEnsemble};
use super::tree::{fit_tree, TreeParams};
use crate::error::{Error, Result};
use crate::frame::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// `ceil(sqrt(n_features))` candidates per split.
    Sqrt,
    All,
}

/// Random-forest settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    /// Rows drawn per tree; `None` draws as many as the training set has.
    pub max_samples: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 10,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            max_samples: None,
            seed: 0,
        }
    }
}

fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub fn fit_forest(train: &Frame, target: &str, features: &[String], config: &ForestConfig) -> Result<TreeEnsemble> {
    check_features(train, target, features)?;
    let data = Dataset::from_frame(train, features)?;
    forest_dataset(&data, train.values(target)?, config)
}

pub(crate) fn forest_dataset(data: &Dataset, y: &[f64], config: &ForestConfig) -> Result<TreeEnsemble> {
    if config.n_trees == 0 {
        return Err(Error::invalid("a forest needs at least one tree"));
    }
    let n = data.n_rows();
    if n == 0 || y.len() != n {
        return Err(Error::invalid("target length must match a non-empty dataset"));
    }
    let n_features = data.n_features();
    let per_split = match config.max_features {
        MaxFeatures::Sqrt => Some((n_features as f64).sqrt().ceil() as usize),
        MaxFeatures::All => None,
    };
    let params = TreeParams {
        max_depth: config.max_depth,
        lambda: 0.0,
        gamma: 0.0,
        min_child_weight: config.min_samples_leaf.max(1) as f64,
        features_per_split: per_split,
    };
    let draws = config.max_samples.unwrap_or(n).clamp(1, n.max(1));
    let allowed: Vec<usize> = (0..n_features).collect();

    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(config.seed, t);
            let rows: Vec<usize> = if config.bootstrap {
                (0..draws).map(|_| rng.random_range(0..n)).collect()
            } else if draws == n {
                (0..n).collect()
            } else {
                let mut r = rand::seq::index::sample(&mut rng, n, draws).into_vec();
                r.sort_unstable();
                r
            };
            let grad: Vec<f64> = rows.iter().map(|&r| -y[r]).collect();
            let hess = vec![1.0; rows.len()];
            fit_tree(data, &rows, &grad, &hess, &allowed, &params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    TreeEnsemble::new(
        EnsembleMode::Forest,
        0.0,
        trees,
        EnsembleConfig::Forest(*config),
        data.names().to_vec(),
    )
}
