//! Regression trees, second-order gradient boosting, random forests,
//! permutation importance and grid search.

mod boost;
mod data;
mod ensemble;
mod forest;
mod grid;
mod importance;
mod tree;

pub use boost::{fit_boosted, fit_boosted_with_history, GbmConfig};
pub use data::Dataset;
pub use ensemble::{EnsembleConfig, EnsembleMode, TreeEnsemble, FORMAT_NAME, FORMAT_VERSION};
pub use forest::{fit_forest, ForestConfig, MaxFeatures};
pub use grid::{grid_search, GridScore, GridSearchResult, ParamGrid};
pub use importance::{permutation_importance, select_features, FeatureImportance, ImportanceReport};
pub use tree::{fit_tree, leaf_weight, split_gain, TreeNode, TreeParams, GAIN_TIE_TOLERANCE};
