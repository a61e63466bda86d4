//! Univariate autoregressive modelling of ambient sensor signals.
//!
//! Lags are chosen by thresholding the absolute partial autocorrelation, the
//! model `X_t = mu + sum_k alpha_k X_{t-k} + eps_t` is fitted by least squares
//! over the selected (possibly non-contiguous) lag set, and multi-step
//! forecasts are produced by feeding each one-step prediction back into the
//! conditioning history.

mod ambient;
mod correlation;
mod model;

pub use ambient::{forecast_ambient, AmbientModel, ColumnModel};
pub use correlation::{acf, pacf, select_lags, LagSelectionConfig};
pub use model::{fit_ar, rolling_forecast, rolling_forecast_refit, ArModel, ForecastMode};

pub(crate) fn is_constant(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[0] == w[1])
}
