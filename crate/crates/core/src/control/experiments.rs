use std::path::Path;

use chrono::{NaiveDateTime, NaiveTime};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{predict_future, ControlScenario, ControlValue, IndoorModel};
use super::smoothing::moving_average;
use crate::error::{Error, Result};
use crate::frame::{Frame, TIMESTAMP_FORMAT};

pub const DEFAULT_SMOOTHING_WINDOW: usize = 20;

const TABLE_CASES: &str = include_str!("../../fixtures/cases.toml");

/// A with-control / no-control scenario pair sharing one switch time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlCase {
    pub name: String,
    #[serde(rename = "with")]
    pub with_control: IndexMap<String, ControlValue>,
    #[serde(rename = "without")]
    pub without_control: IndexMap<String, ControlValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasesFile {
    /// `YYYY-MM-DD HH:MM:SS`, or `HH:MM` for the first such time in the horizon.
    pub switch_time: String,
    #[serde(default = "default_window")]
    pub window: usize,
    pub cases: Vec<ControlCase>,
}

fn default_window() -> usize {
    DEFAULT_SMOOTHING_WINDOW
}

impl CasesFile {
    /// The four valve / neighbour-temperature experiments.
    pub fn table_cases() -> Self {
        Self::from_toml_str(TABLE_CASES).expect("bundled cases parse")
    }

    pub fn table_cases_toml() -> &'static str {
        TABLE_CASES
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: CasesFile = toml::from_str(text).map_err(|e| Error::Parse(format!("cases: {}", e.message())))?;
        if f.cases.is_empty() {
            return Err(Error::invalid("cases file lists no cases"));
        }
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Resolve the switch time against a horizon's timestamps.
    pub fn resolve_switch_time(&self, timestamps: &[NaiveDateTime]) -> Result<NaiveDateTime> {
        resolve_time(&self.switch_time, timestamps)
    }
}

pub(crate) fn resolve_time(text: &str, timestamps: &[NaiveDateTime]) -> Result<NaiveDateTime> {
    let text = text.trim();
    if let Ok(ts) = NaiveDateTime::parse_from_str(text, TIMESTAMP_FORMAT) {
        return Ok(ts);
    }
    let time = NaiveTime::parse_from_str(text, "%H:%M")
        .map_err(|_| Error::Parse(format!("cannot read switch time {text:?}")))?;
    timestamps
        .iter()
        .copied()
        .find(|ts| ts.time() == time)
        .ok_or_else(|| Error::invalid(format!("switch time {text} does not occur in the horizon")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub name: String,
    pub with_smoothed: Vec<f64>,
    pub without_smoothed: Vec<f64>,
    /// `with - without`, pointwise.
    pub difference: Vec<f64>,
    /// Mean difference from the switch time on.
    pub mean_lift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub timestamps: Vec<NaiveDateTime>,
    pub switch_time: NaiveDateTime,
    pub window: usize,
    pub cases: Vec<CaseResult>,
}

impl ExperimentReport {
    /// Wide CSV: one row per minute, three columns per case.
    pub fn trajectories_csv(&self) -> String {
        let mut out = String::from("timestamp");
        for c in &self.cases {
            out.push_str(&format!(",{0}_with,{0}_without,{0}_difference", c.name));
        }
        out.push('\n');
        for (i, ts) in self.timestamps.iter().enumerate() {
            out.push_str(&ts.format(TIMESTAMP_FORMAT).to_string());
            for c in &self.cases {
                out.push_str(&format!(",{},{},{}", c.with_smoothed[i], c.without_smoothed[i], c.difference[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn lifts_csv(&self) -> String {
        let mut out = String::from("case,mean_lift\n");
        for c in &self.cases {
            out.push_str(&format!("{},{}\n", c.name, c.mean_lift));
        }
        out
    }
}

/// Predict, smooth and compare every case pair over the ambient horizon.
pub fn run_control_experiments(
    model: &IndoorModel,
    ambient_future: &Frame,
    cases: &[ControlCase],
    switch_time: NaiveDateTime,
    window: usize,
) -> Result<ExperimentReport> {
    let timestamps = ambient_future.timestamps().to_vec();
    let from = timestamps
        .iter()
        .position(|ts| *ts >= switch_time)
        .ok_or_else(|| Error::invalid(format!("switch time {switch_time} is past the horizon")))?;
    let results = cases
        .par_iter()
        .map(|case| -> Result<CaseResult> {
            let run = |plan: &IndexMap<String, ControlValue>| -> Result<Vec<f64>> {
                let scenario = ControlScenario {
                    assignments: plan.clone(),
                    switch_time,
                };
                moving_average(&predict_future(model, ambient_future, &scenario)?, window)
            };
            let with_smoothed = run(&case.with_control)?;
            let without_smoothed = run(&case.without_control)?;
            let difference: Vec<f64> = with_smoothed.iter().zip(&without_smoothed).map(|(a, b)| a - b).collect();
            let tail = &difference[from..];
            let mean_lift = tail.iter().sum::<f64>() / tail.len() as f64;
            Ok(CaseResult {
                name: case.name.clone(),
                with_smoothed,
                without_smoothed,
                difference,
                mean_lift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        timestamps,
        switch_time,
        window,
        cases: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_cases_encode_documented_values() {
        let f = CasesFile::table_cases();
        assert_eq!(f.cases.len(), 4);
        assert_eq!(f.switch_time, "16:00");
        let step = |b, a| ControlValue::Step { before: b, after: a };
        let c = ControlValue::Constant;
        let c1 = &f.cases[0];
        assert_eq!(c1.with_control["1-13-HTV1"], step(0.0, 1.0));
        assert_eq!(c1.with_control["1-14-TMP1"], c(26.5));
        assert_eq!(c1.with_control["1-8-TMP1"], c(22.0));
        assert_eq!(c1.without_control["1-13-HTV1"], c(0.0));
        let c2 = &f.cases[1];
        assert_eq!(c2.with_control["1-14-TMP1"], step(26.0, 27.0));
        assert_eq!(c2.without_control["1-14-TMP1"], c(26.5));
        let c3 = &f.cases[2];
        assert_eq!(c3.with_control["1-8-TMP1"], step(22.0, 23.0));
        assert_eq!(c3.without_control["1-8-TMP1"], c(22.0));
        let c4 = &f.cases[3];
        assert_eq!(c4.with_control["1-13-HTV1"], step(0.0, 1.0));
        assert_eq!(c4.with_control["1-14-TMP1"], step(26.5, 27.0));
        assert_eq!(c4.with_control["1-8-TMP1"], step(22.0, 23.0));
        for case in &f.cases {
            assert_eq!(case.without_control["1-13-HTV1"], c(0.0));
            assert_eq!(case.without_control["1-14-TMP1"], c(26.5));
            assert_eq!(case.without_control["1-8-TMP1"], c(22.0));
        }
    }

    #[test]
    fn switch_time_resolution() {
        let ts: Vec<NaiveDateTime> = crate::frame::test_util::minutes_from(crate::frame::test_util::dec(30, 14, 40), 201);
        let f = CasesFile::table_cases();
        assert_eq!(f.resolve_switch_time(&ts).unwrap(), crate::frame::test_util::dec(30, 16, 0));
        assert!(resolve_time("19:00", &ts).is_err());
        assert!(resolve_time("soon", &ts).is_err());
    }
}
