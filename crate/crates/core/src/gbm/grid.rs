use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boost::{boost_dataset, check_features, GbmConfig};
use super::data::Dataset;
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Values to try for each tuned parameter; the rest come from a base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub row_subsample: Vec<f64>,
    pub col_subsample: Vec<f64>,
    /// Optional sixth axis; empty keeps the base value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub min_child_weight: Vec<f64>,
}

impl ParamGrid {
    /// Single-point grid at the given config.
    pub fn point(c: &GbmConfig) -> Self {
        Self {
            n_trees: vec![c.n_trees],
            max_depth: vec![c.max_depth],
            learning_rate: vec![c.learning_rate],
            row_subsample: vec![c.row_subsample],
            col_subsample: vec![c.col_subsample],
            min_child_weight: vec![c.min_child_weight],
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("grid: {}", e.message())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Cartesian product in axis order, last axis varying fastest.
    pub fn configs(&self, base: &GbmConfig) -> Result<Vec<GbmConfig>> {
        for (name, len) in [
            ("n_trees", self.n_trees.len()),
            ("max_depth", self.max_depth.len()),
            ("learning_rate", self.learning_rate.len()),
            ("row_subsample", self.row_subsample.len()),
            ("col_subsample", self.col_subsample.len()),
        ] {
            if len == 0 {
                return Err(Error::invalid(format!("grid axis {name} is empty")));
            }
        }
        let mcw = if self.min_child_weight.is_empty() {
            vec![base.min_child_weight]
        } else {
            self.min_child_weight.clone()
        };
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &learning_rate in &self.learning_rate {
                    for &row_subsample in &self.row_subsample {
                        for &col_subsample in &self.col_subsample {
                            for &min_child_weight in &mcw {
                                let c = GbmConfig {
                                    n_trees,
                                    max_depth,
                                    learning_rate,
                                    row_subsample,
                                    col_subsample,
                                    min_child_weight,
                                    ..*base
                                };
                                c.validate()?;
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub config: GbmConfig,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: GbmConfig,
    pub best_rmse: f64,
    /// Every evaluated cell, in grid order.
    pub table: Vec<GridScore>,
}

impl GridSearchResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_trees,max_depth,learning_rate,row_subsample,col_subsample,min_child_weight,rmse\n");
        for s in &self.table {
            let c = &s.config;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.n_trees, c.max_depth, c.learning_rate, c.row_subsample, c.col_subsample, c.min_child_weight, s.rmse
            ));
        }
        out
    }
}

/// Exhaustive search scored by validation RMSE. Ties go to fewer trees, then
/// shallower depth, then lower learning rate, then grid order.
pub fn grid_search(
    train: &Frame,
    valid: &Frame,
    target: &str,
    features: &[String],
    grid: &ParamGrid,
    base: &GbmConfig,
) -> Result<GridSearchResult> {
    check_features(train, target, features)?;
    if valid.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let configs = grid.configs(base)?;
    let train_data = Dataset::from_frame(train, features)?;
    let valid_data = Dataset::from_frame(valid, features)?;
    let y_train = train.values(target)?;
    let y_valid = valid.values(target)?;

    let table = configs
        .into_par_iter()
        .map(|config| {
            let (model, _) = boost_dataset(&train_data, y_train, &config)?;
            let pred = model.predict_dataset(&valid_data);
            let sse: f64 = pred.iter().zip(y_valid).map(|(p, t)| (p - t) * (p - t)).sum();
            Ok(GridScore {
                config,
                rmse: (sse / y_valid.len() as f64).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = pick_best(&table);
    Ok(GridSearchResult {
        best: table[best].config,
        best_rmse: table[best].rmse,
        table,
    })
}

fn pick_best(table: &[GridScore]) -> usize {
    let key = |s: &GridScore| (s.config.n_trees, s.config.max_depth, s.config.learning_rate);
    let mut best = 0;
    for (i, s) in table.iter().enumerate().skip(1) {
        let b = &table[best];
        let better = match s.rmse.total_cmp(&b.rmse) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => {
                let (ks, kb) = (key(s), key(b));
                (ks.0, ks.1).cmp(&(kb.0, kb.1)).then(ks.2.total_cmp(&kb.2)).is_lt()
            }
        };
        if better {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::test_util::{dec, minutes_from};
    use crate::frame::ColumnKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(n: usize) -> (Frame, Vec<String>) {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = a.iter().map(|v| 20.0 + 3.0 * v + 0.05 * rng.random::<f64>()).collect();
        let mut f = Frame::new(minutes_from(dec(5, 0, 0), n)).unwrap();
        f.push_column("1-8-TMP1", ColumnKind::Numeric, a).unwrap();
        f.push_column("1-15-TMP1", ColumnKind::Numeric, y).unwrap();
        (f, vec!["1-8-TMP1".into()])
    }

    #[test]
    fn one_point_grid_returns_it() {
        let (f, names) = problem(200);
        let base = GbmConfig::default();
        let r = grid_search(&f.slice(0, 180), &f.slice(180, 200), "1-15-TMP1", &names, &ParamGrid::point(&base), &base).unwrap();
        assert_eq!(r.best, base);
        assert_eq!(r.table.len(), 1);
        assert!(r.to_csv().contains("\n50,4,0.3,0.6,0.8,"));
    }

    #[test]
    fn ties_prefer_fewer_trees_then_shallower() {
        let mk = |n_trees, max_depth, learning_rate, rmse| GridScore {
            config: GbmConfig { n_trees, max_depth, learning_rate, ..Default::default() },
            rmse,
        };
        let t = vec![mk(50, 4, 0.3, 1.0), mk(20, 6, 0.3, 1.0), mk(20, 4, 0.5, 1.0), mk(20, 4, 0.1, 1.0), mk(100, 2, 0.1, 2.0)];
        assert_eq!(pick_best(&t), 3);
        let t = vec![mk(50, 4, 0.3, 1.0), mk(10, 4, 0.3, 1.0 + 1e-12)];
        assert_eq!(pick_best(&t), 0);
    }

    #[test]
    fn full_grid_and_parsing() {
        let g = ParamGrid::from_toml_str(
            "n_trees = [5, 10]\nmax_depth = [2]\nlearning_rate = [0.3, 1.0]\nrow_subsample = [1.0]\ncol_subsample = [1.0]\n",
        )
        .unwrap();
        let (f, names) = problem(300);
        let r = grid_search(&f.slice(0, 270), &f.slice(270, 300), "1-15-TMP1", &names, &g, &GbmConfig::default()).unwrap();
        assert_eq!(r.table.len(), 4);
        let min = r.table.iter().map(|s| s.rmse).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_rmse, min);
    }

    #[test]
    fn empty_axis_and_unknown_keys_rejected() {
        let mut g = ParamGrid::point(&GbmConfig::default());
        g.max_depth.clear();
        assert!(g.configs(&GbmConfig::default()).is_err());
        assert!(ParamGrid::from_toml_str("n_trees=[1]\nmax_depth=[1]\nlearning_rate=[1.0]\nrow_subsample=[1.0]\ncol_subsample=[1.0]\nlambda=[1.0]\n").is_err());
    }
}
