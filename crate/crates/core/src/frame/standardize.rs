use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{ColumnKind, Frame};
use crate::error::{Error, Result};

/// Per-column z-score scaling with statistics frozen at fit time.
///
/// Uses the population standard deviation (divide by N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    stats: IndexMap<String, ColumnStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    /// Fit on the training rows of the listed numeric columns.
    pub fn fit(train: &Frame, columns: &[impl AsRef<str>]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyFrame);
        }
        let mut stats = IndexMap::new();
        for name in columns {
            let name = name.as_ref();
            let col = train.column(name)?;
            if col.kind != ColumnKind::Numeric {
                return Err(Error::column(name, "only numeric columns can be standardized"));
            }
            let n = col.values.len() as f64;
            let mean = col.values.iter().sum::<f64>() / n;
            let var = col.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            if !(std > 0.0) {
                return Err(Error::column(name, "zero variance on training rows"));
            }
            stats.insert(name.to_string(), ColumnStats { mean, std });
        }
        Ok(Self { stats })
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.stats.keys().map(String::as_str)
    }

    pub fn stats(&self, column: &str) -> Option<ColumnStats> {
        self.stats.get(column).copied()
    }

    /// Keep only the statistics of the given columns (those that were fitted).
    pub fn restricted_to(&self, columns: &[impl AsRef<str>]) -> Standardizer {
        let stats = columns
            .iter()
            .filter_map(|c| self.stats.get_key_value(c.as_ref()))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        Standardizer { stats }
    }

    /// Scale every fitted column present in `frame`; other columns pass through.
    pub fn apply(&self, frame: &Frame) -> Result<Frame> {
        self.map_columns(frame, |v, s| (v - s.mean) / s.std)
    }

    /// Undo [`Standardizer::apply`].
    pub fn invert(&self, frame: &Frame) -> Result<Frame> {
        self.map_columns(frame, |v, s| v * s.std + s.mean)
    }

    fn map_columns(&self, frame: &Frame, f: impl Fn(f64, &ColumnStats) -> f64) -> Result<Frame> {
        let mut out = frame.clone();
        for (name, s) in &self.stats {
            if let Ok(col) = frame.column(name) {
                let values = col.values.iter().map(|&v| f(v, s)).collect();
                out.set_column(name.clone(), col.kind, values)?;
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn frame(values: Vec<f64>) -> Frame {
        let mut f = Frame::new(minutes_from(dec(1, 0, 0), values.len())).unwrap();
        f.push_column("1-8-TMP1", ColumnKind::Numeric, values).unwrap();
        f
    }

    #[test]
    fn hand_computed_z_scores() {
        let f = frame(vec![1.0, 2.0, 3.0]);
        let s = Standardizer::fit(&f, &["1-8-TMP1"]).unwrap();
        let st = s.stats("1-8-TMP1").unwrap();
        assert_abs_diff_eq!(st.mean, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.std, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(st.std, 0.8165, epsilon = 1e-4);
        let z = s.apply(&f).unwrap();
        let z = z.values("1-8-TMP1").unwrap();
        assert_abs_diff_eq!(z[0], -1.2247, epsilon = 1e-4);
        assert_abs_diff_eq!(z[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2], 1.2247, epsilon = 1e-4);
    }

    #[test]
    fn zero_variance_names_column() {
        let err = Standardizer::fit(&frame(vec![5.0; 4]), &["1-8-TMP1"]).unwrap_err();
        assert!(err.to_string().contains("1-8-TMP1"));
    }

    #[test]
    fn non_numeric_rejected() {
        let mut f = Frame::new(minutes_from(dec(1, 0, 0), 2)).unwrap();
        f.push_column("1-13-HTV1", ColumnKind::Boolean, vec![0.0, 1.0]).unwrap();
        assert!(Standardizer::fit(&f, &["1-13-HTV1"]).is_err());
    }

    #[test]
    fn test_rows_use_training_statistics() {
        let s = Standardizer::fit(&frame(vec![1.0, 2.0, 3.0]), &["1-8-TMP1"]).unwrap();
        let test = frame(vec![10.0, 10.0]);
        let z = s.apply(&test).unwrap();
        let expected = (10.0 - 2.0) / (2.0f64 / 3.0).sqrt();
        assert_eq!(z.values("1-8-TMP1").unwrap(), &[expected, expected]);
        assert_eq!(s.stats("1-8-TMP1").unwrap().mean, 2.0);
    }

    #[test]
    fn save_load_round_trip() {
        let s = Standardizer::fit(&frame(vec![0.1, 0.7, 2.9, -3.3]), &["1-8-TMP1"]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("std.json");
        s.save(&p).unwrap();
        assert_eq!(Standardizer::load(&p).unwrap(), s);
    }

    proptest! {
        #[test]
        fn standardized_moments_and_inverse(values in prop::collection::vec(-50.0f64..50.0, 3..200)) {
            let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread > 1e-3);
            let f = frame(values.clone());
            let s = Standardizer::fit(&f, &["1-8-TMP1"]).unwrap();
            let z = s.apply(&f).unwrap();
            let zv = z.values("1-8-TMP1").unwrap();
            let n = zv.len() as f64;
            let mean = zv.iter().sum::<f64>() / n;
            let std = (zv.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((std - 1.0).abs() < 1e-9);
            let back = s.invert(&z).unwrap();
            for (a, b) in back.values("1-8-TMP1").unwrap().iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
