use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::ensemble::TreeEnsemble;
use crate::error::{Error, Result};
use crate::frame::{Frame, WEEKDAY_COLUMNS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

/// Permutation importances in the ensemble's feature order plus a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub features: Vec<FeatureImportance>,
    /// Feature names, most important first.
    pub ranking: Vec<String>,
    pub n_repeats: usize,
    pub baseline_rmse: f64,
}

impl ImportanceReport {
    pub fn get(&self, name: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.name == name)
    }

    /// CSV with one row per feature in ranking order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,feature,mean,std\n");
        for (i, name) in self.ranking.iter().enumerate() {
            let f = self.get(name).expect("ranking names a reported feature");
            out.push_str(&format!("{},{},{},{}\n", i + 1, name, f.mean, f.std));
        }
        out
    }
}

fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    (sse / y.len() as f64).sqrt()
}

/// Increase in validation RMSE when each feature column is shuffled,
/// averaged over `n_repeats` seeded shuffles.
pub fn permutation_importance(
    ensemble: &TreeEnsemble,
    validation: &Frame,
    target: &str,
    n_repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if n_repeats < 1 {
        return Err(Error::invalid("n_repeats must be at least 1"));
    }
    if validation.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let y = validation.values(target)?;
    let data = Dataset::from_frame(validation, &ensemble.feature_names)?;
    let n = data.n_rows();

    // Per-tree outputs, so a shuffle only re-evaluates trees that split on it.
    let outputs: Vec<Vec<f64>> = ensemble
        .trees
        .iter()
        .map(|t| (0..n).map(|r| t.predict_in(&data, r)).collect())
        .collect();
    let combine = |outs: &[Vec<f64>]| -> Vec<f64> {
        (0..n).map(|r| ensemble.combine(outs.iter().map(|o| o[r]))).collect()
    };
    let baseline = rmse(&combine(&outputs), y);

    let features: Vec<FeatureImportance> = (0..data.n_features())
        .into_par_iter()
        .map(|j| {
            let users: Vec<usize> = (0..ensemble.trees.len())
                .filter(|&t| ensemble.trees[t].uses_feature(j))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64 + 1);
            let mut shuffled = data.clone();
            let mut outs = outputs.clone();
            let mut deltas = Vec::with_capacity(n_repeats);
            for _ in 0..n_repeats {
                let mut col = data.column(j).to_vec();
                col.shuffle(&mut rng);
                *shuffled.column_mut(j) = col;
                for &t in &users {
                    outs[t] = (0..n).map(|r| ensemble.trees[t].predict_in(&shuffled, r)).collect();
                }
                deltas.push(rmse(&combine(&outs), y) - baseline);
            }
            let mean = deltas.iter().sum::<f64>() / n_repeats as f64;
            let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n_repeats as f64;
            FeatureImportance {
                name: data.names()[j].clone(),
                mean,
                std: var.sqrt(),
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| features[b].mean.total_cmp(&features[a].mean).then(a.cmp(&b)));
    let ranking = order.into_iter().map(|i| features[i].name.clone()).collect();
    Ok(ImportanceReport {
        features,
        ranking,
        n_repeats,
        baseline_rmse: baseline,
    })
}

/// The top `k` ranked features. If any weekday indicator makes the cut, the
/// other weekday indicators present in the ranking are appended so the
/// one-hot group stays whole.
pub fn select_features(report: &ImportanceReport, k: usize) -> Vec<String> {
    let mut out: Vec<String> = report.ranking.iter().take(k).cloned().collect();
    let is_weekday = |n: &str| WEEKDAY_COLUMNS.contains(&n);
    if out.iter().any(|n| is_weekday(n)) {
        for day in WEEKDAY_COLUMNS {
            if !out.iter().any(|n| n == day) && report.ranking.iter().any(|n| n == day) {
                out.push(day.to_string());
            }
        }
    }
    out
}
