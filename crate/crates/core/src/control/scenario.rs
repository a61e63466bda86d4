use std::fmt;
use std::path::Path;

use chrono::NaiveDateTime;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{engineer_time_features, is_engineered_name, ColumnKind, Frame, Standardizer};
use crate::gbm::TreeEnsemble;

/// Future value plan for one control column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawValue", into = "RawValue")]
pub enum ControlValue {
    Constant(f64),
    /// `before` until the switch time, `after` from it on.
    Step { before: f64, after: f64 },
}

impl ControlValue {
    pub fn at(&self, ts: NaiveDateTime, switch_time: NaiveDateTime) -> f64 {
        match *self {
            ControlValue::Constant(v) => v,
            ControlValue::Step { before, after } => {
                if ts < switch_time {
                    before
                } else {
                    after
                }
            }
        }
    }

    pub fn before(&self) -> f64 {
        match *self {
            ControlValue::Constant(v) => v,
            ControlValue::Step { before, .. } => before,
        }
    }

    pub fn after(&self) -> f64 {
        match *self {
            ControlValue::Constant(v) => v,
            ControlValue::Step { after, .. } => after,
        }
    }
}

impl fmt::Display for ControlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlValue::Constant(v) => write!(f, "{v}"),
            ControlValue::Step { before, after } => write!(f, "{before}/{after}"),
        }
    }
}

impl std::str::FromStr for ControlValue {
    type Err = Error;

    /// `"22"` is a constant, `"0/1"` a step.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| -> Result<f64> {
            let t = t.trim().trim_end_matches("°C").trim_end_matches('C').trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("cannot read control value {s:?}")))
        };
        match s.split_once('/') {
            Some((a, b)) => Ok(ControlValue::Step {
                before: num(a)?,
                after: num(b)?,
            }),
            None => Ok(ControlValue::Constant(num(s)?)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Number(f64),
    Pair([f64; 2]),
    Text(String),
}

impl TryFrom<RawValue> for ControlValue {
    type Error = Error;

    fn try_from(raw: RawValue) -> Result<Self> {
        match raw {
            RawValue::Number(v) => Ok(ControlValue::Constant(v)),
            RawValue::Pair([before, after]) => Ok(ControlValue::Step { before, after }),
            RawValue::Text(s) => s.parse(),
        }
    }
}

impl From<ControlValue> for RawValue {
    fn from(v: ControlValue) -> Self {
        match v {
            ControlValue::Constant(v) => RawValue::Number(v),
            ControlValue::Step { before, after } => RawValue::Pair([before, after]),
        }
    }
}

/// Values for every control column over a future horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlScenario {
    pub assignments: IndexMap<String, ControlValue>,
    pub switch_time: NaiveDateTime,
}

impl ControlScenario {
    pub fn new(switch_time: NaiveDateTime) -> Self {
        Self {
            assignments: IndexMap::new(),
            switch_time,
        }
    }

    pub fn with(mut self, column: impl Into<String>, value: ControlValue) -> Self {
        self.assignments.insert(column.into(), value);
        self
    }

    /// Copy of `frame` with every control column set from the plan.
    pub fn apply(&self, frame: &Frame) -> Result<Frame> {
        let has_step = self.assignments.values().any(|v| matches!(v, ControlValue::Step { .. }));
        if has_step {
            let (Some(first), Some(last)) = (frame.first_timestamp(), frame.last_timestamp()) else {
                return Err(Error::EmptyFrame);
            };
            if self.switch_time < first || self.switch_time > last {
                return Err(Error::invalid(format!(
                    "switch time {} lies outside the horizon {first} .. {last}",
                    self.switch_time
                )));
            }
        }
        let mut out = frame.clone();
        for (column, plan) in &self.assignments {
            let kind = frame
                .kind(column)
                .ok()
                .or_else(|| ColumnKind::infer(column))
                .unwrap_or(ColumnKind::Numeric);
            let values = frame.timestamps().iter().map(|ts| plan.at(*ts, self.switch_time)).collect();
            out.set_column(column.clone(), kind, values)?;
        }
        Ok(out)
    }
}

/// Stage-two model: a boosted ensemble over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct IndoorModel {
    pub ensemble: TreeEnsemble,
    pub standardizer: Standardizer,
}

impl IndoorModel {
    pub fn new(ensemble: TreeEnsemble, standardizer: Standardizer) -> Self {
        Self { ensemble, standardizer }
    }

    pub fn features(&self) -> &[String] {
        &self.ensemble.feature_names
    }

    /// Predict from raw-scale features; calendar columns are derived from the
    /// timestamps when absent.
    pub fn predict(&self, frame: &Frame) -> Result<Vec<f64>> {
        let needs_calendar = self
            .features()
            .iter()
            .any(|f| is_engineered_name(f) && !frame.contains(f));
        let frame = if needs_calendar {
            engineer_time_features(frame)?
        } else {
            frame.clone()
        };
        self.ensemble.predict(&self.standardizer.apply(&frame)?)
    }

    pub fn save(&self, ensemble_path: impl AsRef<Path>, standardizer_path: impl AsRef<Path>) -> Result<()> {
        self.ensemble.save(ensemble_path)?;
        self.standardizer.save(standardizer_path)
    }

    pub fn load(ensemble_path: impl AsRef<Path>, standardizer_path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(TreeEnsemble::load(ensemble_path)?, Standardizer::load(standardizer_path)?))
    }
}

/// Raw predicted trajectory under a control scenario: control columns are
/// overwritten per the plan, everything else comes from `ambient_future`.
pub fn predict_future(model: &IndoorModel, ambient_future: &Frame, scenario: &ControlScenario) -> Result<Vec<f64>> {
    if ambient_future.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let inputs = scenario.apply(ambient_future)?;
    if let Some(missing) = model.features().iter().find(|f| !inputs.contains(f)) {
        return Err(Error::column(missing, "model input is neither forecast nor assigned by the control plan"));
    }
    model.predict(&inputs)
}
