use crate::error::{Error, Result};
use crate::frame::Frame;

/// Column-major feature matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::invalid("feature names and columns differ in count"));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::invalid("feature columns differ in length"));
        }
        Ok(Self { names, columns, n_rows })
    }

    /// Build from row-major data; `rows[i][j]` is feature `j` of row `i`.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_features = names.len();
        if rows.iter().any(|r| r.len() != n_features) {
            return Err(Error::invalid("row width does not match feature count"));
        }
        let columns = (0..n_features)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::new(names, columns)
    }

    pub fn from_frame(frame: &Frame, features: &[impl AsRef<str>]) -> Result<Self> {
        let mut names = Vec::with_capacity(features.len());
        let mut columns = Vec::with_capacity(features.len());
        for f in features {
            let f = f.as_ref();
            columns.push(frame.values(f)?.to_vec());
            names.push(f.to_string());
        }
        let mut ds = Self::new(names, columns)?;
        ds.n_rows = frame.len();
        Ok(ds)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature][row]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut Vec<f64> {
        &mut self.columns[j]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }
}
