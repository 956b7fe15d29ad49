use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::norm;

/// Covariate matrix (`n` samples by `p` covariates) and response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: Vec<f64>,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: Vec<f64>) -> Result<Self> {
        Self::with_names(x, y, None)
    }

    pub fn with_names(
        x: DMatrix<f64>,
        y: Vec<f64>,
        column_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 samples, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidDataset("need at least 1 covariate".into()));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite covariate at row {}, column {}",
                i % n + 1,
                i / n + 1
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite response at row {}",
                i + 1
            )));
        }
        if let Some(names) = &column_names {
            if names.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: names.len(),
                });
            }
        }
        Ok(Self { x, y, column_names })
    }

    /// Builds a dataset from per-covariate columns.
    pub fn from_columns(columns: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        let x = DMatrix::from_iterator(n, columns.len(), columns.iter().flatten().copied());
        Self::new(x, y)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Contiguous view of covariate `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    pub fn y_mean(&self) -> f64 {
        norm::mean(&self.y).expect("dataset has n >= 2")
    }

    pub fn y_centered(&self) -> Vec<f64> {
        norm::center(&self.y).expect("dataset has n >= 2")
    }
}
