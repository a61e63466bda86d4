use std::fmt::Write as _;
use std::path::Path;

use chrono::{NaiveDateTime, TimeDelta};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{select_lags, LagSelectionConfig};
use super::is_constant;
use super::model::{fit_ar, rolling_forecast, rolling_forecast_refit, ArModel, ForecastMode};
use crate::error::{Error, Result};
use crate::frame::{engineer_time_features, ColumnKind, Frame};

/// How a single ambient column is extended into the future.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ColumnModel {
    Ar { model: ArModel },
    Constant { value: f64 },
    /// Hour-of-day and weekday columns follow the clock.
    Calendar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AmbientColumn {
    name: String,
    kind: ColumnKind,
    model: ColumnModel,
    /// Conditioning tail (fixed mode) or the whole training series (refit mode).
    history: Vec<f64>,
}

/// Stage-one model bundle: one forecaster per non-control feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientModel {
    last_timestamp: NaiveDateTime,
    config: LagSelectionConfig,
    mode: ForecastMode,
    columns: Vec<AmbientColumn>,
}

fn fit_column(name: &str, kind: ColumnKind, series: &[f64], config: &LagSelectionConfig, mode: ForecastMode) -> Result<AmbientColumn> {
    if kind == ColumnKind::Engineered {
        return Ok(AmbientColumn {
            name: name.to_string(),
            kind,
            model: ColumnModel::Calendar,
            history: Vec::new(),
        });
    }
    let constant = |v: f64| AmbientColumn {
        name: name.to_string(),
        kind,
        model: ColumnModel::Constant { value: v },
        history: Vec::new(),
    };
    let last = *series.last().ok_or(Error::EmptyFrame)?;
    if is_constant(series) {
        return Ok(constant(last));
    }
    let cfg = LagSelectionConfig {
        max_lag: config.max_lag.min(series.len().saturating_sub(1) / 2),
        ..*config
    };
    let fitted = select_lags(series, &cfg).and_then(|lags| fit_ar(series, &lags));
    let model = match fitted {
        Ok(m) => m,
        Err(Error::ConstantSeries) => return Ok(constant(last)),
        Err(e) => {
            return Err(Error::Forecast {
                column: name.to_string(),
                source: Box::new(e),
            })
        }
    };
    let history = match mode {
        ForecastMode::Fixed => series[series.len() - model.order()..].to_vec(),
        ForecastMode::Refit => series.to_vec(),
    };
    Ok(AmbientColumn {
        name: name.to_string(),
        kind,
        model: ColumnModel::Ar { model },
        history,
    })
}

impl AmbientModel {
    /// Fit a forecaster for every listed column of `train`. Columns are fitted
    /// independently (in parallel); column order is preserved.
    pub fn fit(train: &Frame, non_control: &[impl AsRef<str> + Sync], config: &LagSelectionConfig, mode: ForecastMode) -> Result<Self> {
        let last_timestamp = train.last_timestamp().ok_or(Error::EmptyFrame)?;
        let inputs = non_control
            .iter()
            .map(|n| {
                let col = train.column(n.as_ref())?;
                Ok((n.as_ref(), col.kind, col.values.as_slice()))
            })
            .collect::<Result<Vec<_>>>()?;
        let columns = inputs
            .par_iter()
            .map(|(name, kind, series)| fit_column(name, *kind, series, config, mode))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            last_timestamp,
            config: *config,
            mode,
            columns,
        })
    }

    pub fn last_timestamp(&self) -> NaiveDateTime {
        self.last_timestamp
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn model(&self, column: &str) -> Option<&ColumnModel> {
        self.columns.iter().find(|c| c.name == column).map(|c| &c.model)
    }

    /// Minute-by-minute forecast for the `horizon` minutes after the training end.
    pub fn forecast(&self, horizon: usize) -> Result<Frame> {
        if horizon == 0 {
            return Err(Error::invalid("forecast horizon must be at least 1"));
        }
        let timestamps: Vec<NaiveDateTime> = (1..=horizon)
            .map(|i| self.last_timestamp + TimeDelta::minutes(i as i64))
            .collect();
        let calendar = engineer_time_features(&Frame::new(timestamps.clone())?)?;

        let series = self
            .columns
            .par_iter()
            .map(|c| -> Result<Vec<f64>> {
                let wrap = |e: Error| Error::Forecast {
                    column: c.name.clone(),
                    source: Box::new(e),
                };
                let mut values = match &c.model {
                    ColumnModel::Calendar => return calendar.values(&c.name).map(<[f64]>::to_vec).map_err(wrap),
                    ColumnModel::Constant { value } => vec![*value; horizon],
                    ColumnModel::Ar { model } => match self.mode {
                        ForecastMode::Fixed => rolling_forecast(model, &c.history, horizon),
                        ForecastMode::Refit => rolling_forecast_refit(&c.history, &model.lags, horizon),
                    }
                    .map_err(wrap)?,
                };
                if c.kind == ColumnKind::Boolean {
                    values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
                }
                Ok(values)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut out = Frame::new(timestamps)?;
        for (c, values) in self.columns.iter().zip(series) {
            out.push_column(c.name.clone(), c.kind, values)?;
        }
        Ok(out)
    }

    /// Forecast through `end` inclusive.
    pub fn forecast_until(&self, end: NaiveDateTime) -> Result<Frame> {
        let minutes = (end - self.last_timestamp).num_minutes();
        if minutes < 1 {
            return Err(Error::invalid(format!(
                "forecast end {end} is not after the training end {}",
                self.last_timestamp
            )));
        }
        self.forecast(minutes as usize)
    }

    /// Flat `key: value` listing of every column's model.
    pub fn diagnostics(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "pacf_threshold: {}", self.config.pacf_threshold);
        let _ = writeln!(s, "max_lag: {}", self.config.max_lag);
        let _ = writeln!(s, "mode: {}", if self.mode == ForecastMode::Fixed { "fixed" } else { "refit" });
        for c in &self.columns {
            let n = &c.name;
            match &c.model {
                ColumnModel::Calendar => {
                    let _ = writeln!(s, "{n}.model: calendar");
                }
                ColumnModel::Constant { value } => {
                    let _ = writeln!(s, "{n}.model: constant");
                    let _ = writeln!(s, "{n}.value: {value}");
                }
                ColumnModel::Ar { model } => {
                    let lags: Vec<String> = model.lags.iter().map(|l| l.to_string()).collect();
                    let _ = writeln!(s, "{n}.model: ar");
                    let _ = writeln!(s, "{n}.lags: {}", lags.join(","));
                    let _ = writeln!(s, "{n}.mu: {}", model.mu);
                    let _ = writeln!(s, "{n}.alphas: {}", join(&model.alphas));
                    let _ = writeln!(s, "{n}.sigma2: {}", model.sigma2);
                    let _ = writeln!(s, "{n}.n_train: {}", model.n_train);
                }
            }
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// Fit stage-one forecasters on `train` and forecast `horizon` minutes ahead.
pub fn forecast_ambient(train: &Frame, non_control: &[impl AsRef<str> + Sync], horizon: usize, config: &LagSelectionConfig) -> Result<Frame> {
    AmbientModel::fit(train, non_control, config, ForecastMode::Fixed)?.forecast(horizon)
}

#[cfg(test)]
mod tests {
    use super::super::correlation::sim::simulate_ar;
    use super::*;
    use crate::frame::test_util::*;
    use crate::frame::{HOURS_COLUMN, WEEKDAY_COLUMNS};

    fn train_frame() -> Frame {
        let n = 2000;
        let mut f = Frame::new(minutes_from(dec(28, 0, 0), n)).unwrap();
        f.push_column("1-8-TMP1", ColumnKind::Numeric, vec![21.0; n]).unwrap();
        let ar: Vec<f64> = simulate_ar(5.0, &[0.7], n, 4);
        f.push_column("0-1-TMP1", ColumnKind::Numeric, ar).unwrap();
        let occ: Vec<f64> = (0..n).map(|i| if (i / 90) % 2 == 0 { 1.0 } else { 0.0 }).collect();
        f.push_column("1-15-PIR1", ColumnKind::Boolean, occ).unwrap();
        engineer_time_features(&f).unwrap()
    }

    #[test]
    fn constant_column_passes_through() {
        let f = train_frame();
        let out = forecast_ambient(&f, &["1-8-TMP1"], 60, &LagSelectionConfig::default()).unwrap();
        assert_eq!(out.values("1-8-TMP1").unwrap(), &[21.0; 60][..]);
    }

    #[test]
    fn future_frame_is_aligned_and_calendar_one_hot() {
        let f = train_frame();
        let mut cols = vec!["0-1-TMP1", "1-15-PIR1", HOURS_COLUMN];
        cols.extend(WEEKDAY_COLUMNS);
        let out = forecast_ambient(&f, &cols, 201, &LagSelectionConfig::default()).unwrap();
        assert_eq!(out.len(), 201);
        assert_eq!(out.first_timestamp().unwrap(), f.last_timestamp().unwrap() + TimeDelta::minutes(1));
        for r in 0..out.len() {
            let s: f64 = WEEKDAY_COLUMNS.iter().map(|d| out.values(d).unwrap()[r]).sum();
            assert_eq!(s, 1.0);
        }
        assert!(out.values("1-15-PIR1").unwrap().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(out.kind("1-15-PIR1").unwrap(), ColumnKind::Boolean);
    }

    #[test]
    fn missing_column_errors() {
        let f = train_frame();
        assert!(forecast_ambient(&f, &["1-9-TMP1"], 10, &LagSelectionConfig::default()).is_err());
    }

    #[test]
    fn diagnostics_list_lags() {
        let f = train_frame();
        let m = AmbientModel::fit(&f, &["0-1-TMP1", "1-8-TMP1"], &LagSelectionConfig::default(), ForecastMode::Fixed).unwrap();
        let d = m.diagnostics();
        assert!(d.contains("0-1-TMP1.lags: 1"), "{d}");
        assert!(d.contains("1-8-TMP1.model: constant"), "{d}");
    }

    #[test]
    fn save_load_round_trip() {
        let f = train_frame();
        let m = AmbientModel::fit(&f, &["0-1-TMP1", "1-15-PIR1", "hours"], &LagSelectionConfig::default(), ForecastMode::Fixed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ambient.json");
        m.save(&p).unwrap();
        let back = AmbientModel::load(&p).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.forecast(30).unwrap(), m.forecast(30).unwrap());
    }

    #[test]
    fn refit_mode_runs() {
        let f = train_frame().slice(0, 300);
        let m = AmbientModel::fit(&f, &["0-1-TMP1"], &LagSelectionConfig::default(), ForecastMode::Refit).unwrap();
        assert_eq!(m.forecast(5).unwrap().len(), 5);
    }
}
