//! Timestamp-indexed multivariate sensor table.
//!
//! A [`Frame`] holds one timestamp per row and an ordered set of equally long
//! columns. Every column carries a [`ColumnKind`]: raw numeric readings,
//! Boolean 0/1 signals (which may become fractional after resampling), or
//! engineered calendar features.

mod clean;
mod io;
mod standardize;

use chrono::NaiveDateTime;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor::{parse_sensor_id, ValueKind};

pub use clean::{
    chronological_holdout, engineer_time_features, remove_outliers, resample_minutely, split,
    OutlierReport, DEFAULT_OUTLIER_K,
};
pub use io::{ingest_csv, read_csv, write_csv, write_csv_to, KindOverrides, TIMESTAMP_COLUMN, TIMESTAMP_FORMAT};
pub use standardize::Standardizer;

pub const HOURS_COLUMN: &str = "hours";
pub const WEEKDAY_COLUMNS: [&str; 7] = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Boolean,
    Engineered,
}

impl ColumnKind {
    /// Infer a kind from a column header: sensor ids by their code, calendar
    /// feature names as engineered.
    pub fn infer(name: &str) -> Option<ColumnKind> {
        if is_engineered_name(name) {
            return Some(ColumnKind::Engineered);
        }
        parse_sensor_id(name).ok().map(|id| match id.value_kind() {
            ValueKind::Numeric => ColumnKind::Numeric,
            ValueKind::Boolean => ColumnKind::Boolean,
        })
    }
}

pub fn is_engineered_name(name: &str) -> bool {
    name == HOURS_COLUMN || WEEKDAY_COLUMNS.contains(&name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    timestamps: Vec<NaiveDateTime>,
    columns: IndexMap<String, Column>,
}

impl Frame {
    /// Empty frame over the given timestamps; these must be non-decreasing.
    pub fn new(timestamps: Vec<NaiveDateTime>) -> Result<Self> {
        if let Some(i) = timestamps.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Row {
                row: i + 2,
                reason: "timestamps go backwards".into(),
            });
        }
        Ok(Self {
            timestamps,
            columns: IndexMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn first_timestamp(&self) -> Option<NaiveDateTime> {
        self.timestamps.first().copied()
    }

    pub fn last_timestamp(&self) -> Option<NaiveDateTime> {
        self.timestamps.last().copied()
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .get(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn values(&self, name: &str) -> Result<&[f64]> {
        self.column(name).map(|c| c.values.as_slice())
    }

    pub fn kind(&self, name: &str) -> Result<ColumnKind> {
        self.column(name).map(|c| c.kind)
    }

    /// Names of all columns of the given kind, in column order.
    pub fn names_of_kind(&self, kind: ColumnKind) -> Vec<String> {
        self.columns
            .iter()
            .filter(|(_, c)| c.kind == kind)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Append a new column. Fails on duplicates, length mismatch, non-finite
    /// values, or Boolean values outside `[0, 1]`.
    pub fn push_column(&mut self, name: impl Into<String>, kind: ColumnKind, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if self.columns.contains_key(&name) {
            return Err(Error::DuplicateColumn(name));
        }
        self.check_column(&name, kind, &values)?;
        self.columns.insert(name, Column { kind, values });
        Ok(())
    }

    /// Insert or overwrite a column, keeping its position if it already exists.
    pub fn set_column(&mut self, name: impl Into<String>, kind: ColumnKind, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        self.check_column(&name, kind, &values)?;
        self.columns.insert(name, Column { kind, values });
        Ok(())
    }

    pub fn remove_column(&mut self, name: &str) -> Option<Column> {
        self.columns.shift_remove(name)
    }

    fn check_column(&self, name: &str, kind: ColumnKind, values: &[f64]) -> Result<()> {
        if values.len() != self.timestamps.len() {
            return Err(Error::column(
                name,
                format!("length {} does not match {} timestamps", values.len(), self.timestamps.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::column(name, format!("non-finite value at row {}", i)));
        }
        if kind == ColumnKind::Boolean {
            if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::column(
                    name,
                    format!("boolean value {} outside [0, 1] at row {}", values[i], i),
                ));
            }
        }
        Ok(())
    }

    /// Frame restricted to the given row indices, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Frame {
        let timestamps = rows.iter().map(|&r| self.timestamps[r]).collect();
        let columns = self
            .columns
            .iter()
            .map(|(name, col)| {
                let values = rows.iter().map(|&r| col.values[r]).collect();
                (name.clone(), Column { kind: col.kind, values })
            })
            .collect();
        Frame { timestamps, columns }
    }

    /// Contiguous row range `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Frame {
        let end = end.min(self.len());
        let start = start.min(end);
        let columns = self
            .columns
            .iter()
            .map(|(name, col)| {
                (
                    name.clone(),
                    Column {
                        kind: col.kind,
                        values: col.values[start..end].to_vec(),
                    },
                )
            })
            .collect();
        Frame {
            timestamps: self.timestamps[start..end].to_vec(),
            columns,
        }
    }

    /// Frame keeping only the named columns, in the order given.
    pub fn select(&self, names: &[impl AsRef<str>]) -> Result<Frame> {
        let mut columns = IndexMap::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let col = self.column(name)?;
            if columns.insert(name.to_string(), col.clone()).is_some() {
                return Err(Error::DuplicateColumn(name.to_string()));
            }
        }
        Ok(Frame {
            timestamps: self.timestamps.clone(),
            columns,
        })
    }

    /// Row index of the exact timestamp, if present.
    pub fn position(&self, ts: NaiveDateTime) -> Option<usize> {
        self.timestamps.binary_search(&ts).ok()
    }

    /// Row-major copy of the named columns.
    pub fn row_major(&self, names: &[impl AsRef<str>]) -> Result<Vec<Vec<f64>>> {
        let cols = names
            .iter()
            .map(|n| self.values(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.len())
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect())
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use chrono::{NaiveDate, NaiveDateTime, TimeDelta};

    #[allow(dead_code)]
    pub fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, super::TIMESTAMP_FORMAT).unwrap()
    }

    pub fn minutes_from(start: NaiveDateTime, n: usize) -> Vec<NaiveDateTime> {
        (0..n).map(|i| start + TimeDelta::minutes(i as i64)).collect()
    }

    pub fn dec(day: u32, h: u32, m: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2019, 12, day)
            .unwrap()
            .and_hms_opt(h, m, 0)
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    #[test]
    fn rejects_length_mismatch_and_duplicates() {
        let mut f = Frame::new(minutes_from(dec(1, 0, 0), 3)).unwrap();
        f.push_column("1-15-TMP1", ColumnKind::Numeric, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            f.push_column("1-15-TMP1", ColumnKind::Numeric, vec![1.0, 2.0, 3.0]),
            Err(Error::DuplicateColumn(_))
        ));
        assert!(f.push_column("1-14-TMP1", ColumnKind::Numeric, vec![1.0]).is_err());
    }

    #[test]
    fn boolean_range_enforced() {
        let mut f = Frame::new(minutes_from(dec(1, 0, 0), 2)).unwrap();
        assert!(f.push_column("1-13-HTV1", ColumnKind::Boolean, vec![0.0, 2.0]).is_err());
        f.push_column("1-13-HTV1", ColumnKind::Boolean, vec![0.0, 0.5]).unwrap();
    }

    #[test]
    fn kind_inference() {
        assert_eq!(ColumnKind::infer("1-15-TMP1"), Some(ColumnKind::Numeric));
        assert_eq!(ColumnKind::infer("0-1-HYGR1"), Some(ColumnKind::Numeric));
        assert_eq!(ColumnKind::infer("1-13-HTV1"), Some(ColumnKind::Boolean));
        assert_eq!(ColumnKind::infer("Monday"), Some(ColumnKind::Engineered));
        assert_eq!(ColumnKind::infer("hours"), Some(ColumnKind::Engineered));
        assert_eq!(ColumnKind::infer("whatever"), None);
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        let mut t = minutes_from(dec(1, 0, 0), 3);
        t.swap(0, 2);
        assert!(Frame::new(t).is_err());
    }
}
