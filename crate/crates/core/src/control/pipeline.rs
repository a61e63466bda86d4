use chrono::NaiveDateTime;

use super::scenario::IndoorModel;
use crate::ar::{AmbientModel, ForecastMode, LagSelectionConfig};
use crate::error::{Error, Result};
use crate::frame::{
    chronological_holdout, engineer_time_features, remove_outliers, resample_minutely, split, ColumnKind, Frame,
    OutlierReport, Standardizer, DEFAULT_OUTLIER_K,
};
use crate::gbm::{
    fit_boosted, fit_forest, grid_search, permutation_importance, select_features, ForestConfig, GbmConfig,
    GridSearchResult, ImportanceReport, ParamGrid,
};

/// Settings shared by the stages of the two-stage workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub response: String,
    pub controls: Vec<String>,
    /// Last training timestamp (inclusive).
    pub split: NaiveDateTime,
    pub outlier_k: f64,
    pub top_k: usize,
    pub importance_repeats: usize,
    pub forest: ForestConfig,
    pub lags: LagSelectionConfig,
    pub forecast_mode: ForecastMode,
    pub gbm: GbmConfig,
    pub grid: ParamGrid,
    /// Trailing share of the training rows held out for importance and tuning.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(response: impl Into<String>, controls: Vec<String>, split: NaiveDateTime) -> Self {
        let gbm = GbmConfig::default();
        Self {
            response: response.into(),
            controls,
            split,
            outlier_k: DEFAULT_OUTLIER_K,
            top_k: 15,
            importance_repeats: 5,
            forest: ForestConfig::default(),
            lags: LagSelectionConfig::default(),
            forecast_mode: ForecastMode::Fixed,
            grid: ParamGrid::point(&gbm),
            gbm,
            validation_fraction: 0.1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.controls.contains(&self.response) {
            return Err(Error::invalid(format!("response {} is also listed as a control", self.response)));
        }
        if self.top_k == 0 {
            return Err(Error::invalid("top-k must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Frame,
    pub test: Frame,
    pub outliers: OutlierReport,
}

/// Resample, drop response outliers, add calendar features and split.
pub fn prepare(raw: &Frame, config: &PipelineConfig) -> Result<Prepared> {
    config.validate()?;
    let minutely = resample_minutely(raw)?;
    let (clean, outliers) = remove_outliers(&minutely, &config.response, config.outlier_k)?;
    let (train, test) = split(&engineer_time_features(&clean)?, config.split)?;
    Ok(Prepared { train, test, outliers })
}

/// Every column except the response.
pub fn candidate_features(frame: &Frame, response: &str) -> Vec<String> {
    frame.column_names().filter(|c| *c != response).map(str::to_string).collect()
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub importance: ImportanceReport,
    pub features: Vec<String>,
}

/// Rank candidates by forest permutation importance on the trailing holdout
/// and keep the top `k`.
pub fn select(train: &Frame, config: &PipelineConfig) -> Result<Selection> {
    config.validate()?;
    let (fit, valid) = chronological_holdout(train, config.validation_fraction)?;
    let candidates = candidate_features(train, &config.response);
    let forest = ForestConfig {
        seed: config.seed,
        ..config.forest
    };
    let ensemble = fit_forest(&fit, &config.response, &candidates, &forest)?;
    let importance = permutation_importance(&ensemble, &valid, &config.response, config.importance_repeats, config.seed)?;
    let features = select_features(&importance, config.top_k);
    Ok(Selection { importance, features })
}

/// Numeric features with spread on the training rows; constants and Boolean
/// or calendar columns stay on their own scale.
pub fn standardizable(train: &Frame, features: &[String]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for f in features {
        let col = train.column(f)?;
        let spread = col.values.iter().any(|v| *v != col.values[0]);
        if col.kind == ColumnKind::Numeric && spread {
            out.push(f.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: IndoorModel,
    pub grid: GridSearchResult,
}

/// Standardize, tune on the trailing holdout, then refit the best config on
/// all training rows.
pub fn train_indoor(train: &Frame, features: &[String], config: &PipelineConfig) -> Result<Trained> {
    config.validate()?;
    let standardizer = Standardizer::fit(train, &standardizable(train, features)?)?;
    let scaled = standardizer.apply(train)?;
    let (fit, valid) = chronological_holdout(&scaled, config.validation_fraction)?;
    let base = GbmConfig {
        seed: config.seed,
        ..config.gbm
    };
    let grid = grid_search(&fit, &valid, &config.response, features, &config.grid, &base)?;
    let ensemble = fit_boosted(&scaled, &config.response, features, &grid.best)?;
    Ok(Trained {
        model: IndoorModel::new(ensemble, standardizer),
        grid,
    })
}

/// Stage-one forecasters for the selected features that are not controls.
pub fn fit_ambient(train: &Frame, features: &[String], config: &PipelineConfig) -> Result<AmbientModel> {
    let ambient: Vec<&str> = features
        .iter()
        .filter(|f| !config.controls.contains(f))
        .map(String::as_str)
        .collect();
    AmbientModel::fit(train, &ambient, &config.lags, config.forecast_mode)
}
