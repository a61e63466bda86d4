use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::is_constant;
use crate::error::{Error, Result};

/// Fitted subset-lag autoregressive model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    /// Constant offset.
    pub mu: f64,
    /// Selected lags, strictly increasing.
    pub lags: Vec<usize>,
    /// One coefficient per entry of `lags`.
    pub alphas: Vec<f64>,
    /// Residual mean square.
    pub sigma2: f64,
    pub n_train: usize,
}

/// How the rolling forecast treats the model between steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMode {
    /// Coefficients stay fixed; only the conditioning window grows.
    #[default]
    Fixed,
    /// Re-estimate the coefficients on history plus predictions at every step.
    Refit,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.lags.last().copied().unwrap_or(0)
    }

    /// One-step prediction from the end of `history`.
    pub fn predict_next(&self, history: &[f64]) -> Result<f64> {
        let n = history.len();
        if n < self.order() {
            return Err(Error::InsufficientHistory {
                needed: self.order(),
                have: n,
            });
        }
        Ok(self.mu
            + self
                .lags
                .iter()
                .zip(&self.alphas)
                .map(|(&lag, a)| a * history[n - lag])
                .sum::<f64>())
    }
}

fn validate_lags(lags: &[usize]) -> Result<()> {
    if lags.is_empty() {
        return Err(Error::invalid("lag set is empty"));
    }
    if lags[0] == 0 || lags.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "lags must be positive and strictly increasing, got {lags:?}"
        )));
    }
    Ok(())
}

/// Least-squares fit of `X_t` on an intercept and `X_{t-k}` for `k` in `lags`,
/// over every `t` with a full history.
pub fn fit_ar(series: &[f64], lags: &[usize]) -> Result<ArModel> {
    validate_lags(lags)?;
    let p = *lags.last().unwrap();
    if series.len() <= p + 10 {
        return Err(Error::InsufficientHistory {
            needed: p + 11,
            have: series.len(),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    if is_constant(series) {
        return Err(Error::ConstantSeries);
    }

    let rows = series.len() - p;
    let cols = lags.len() + 1;
    let design = DMatrix::from_fn(rows, cols, |r, c| {
        let t = r + p;
        if c == 0 {
            1.0
        } else {
            series[t - lags[c - 1]]
        }
    });
    let target = DVector::from_iterator(rows, series[p..].iter().copied());

    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.diagonal().iter().any(|v| v.abs() <= 1e-10 * diag_max) {
        return Err(Error::Singular);
    }
    let qty = qr.q().transpose() * &target;
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::Singular)?;

    let residuals = target - design * &beta;
    let sigma2 = residuals.norm_squared() / rows as f64;
    Ok(ArModel {
        mu: beta[0],
        lags: lags.to_vec(),
        alphas: beta.iter().skip(1).copied().collect(),
        sigma2,
        n_train: series.len(),
    })
}

/// `horizon` one-step predictions, each conditioned on `history` followed by
/// all earlier predictions. No noise is injected.
pub fn rolling_forecast(model: &ArModel, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::invalid("forecast horizon must be at least 1"));
    }
    let p = model.order();
    if history.len() < p {
        return Err(Error::InsufficientHistory {
            needed: p,
            have: history.len(),
        });
    }
    let mut window: Vec<f64> = history[history.len() - p..].to_vec();
    window.reserve(horizon);
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = model.predict_next(&window)?;
        window.push(next);
        out.push(next);
    }
    Ok(out)
}

/// Rolling forecast that re-estimates the model on the augmented series before
/// every step. Much more expensive than [`rolling_forecast`].
pub fn rolling_forecast_refit(history: &[f64], lags: &[usize], horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::invalid("forecast horizon must be at least 1"));
    }
    let mut series = history.to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let model = fit_ar(&series, lags)?;
        let next = model.predict_next(&series)?;
        series.push(next);
        out.push(next);
    }
    Ok(out)
}
