//! JSON document formats. Matrices are nested arrays of rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::LinearSystem;

/// `{"n": int, "m": int, "A": [[...]], "B": [[...]]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

impl SystemDocument {
    pub fn from_system(sys: &LinearSystem<f64>) -> Self {
        Self {
            n: sys.n(),
            m: sys.m(),
            a: to_rows(sys.a()),
            b: to_rows(sys.b()),
        }
    }

    /// Checks the declared dimensions and validates the pair.
    pub fn to_system(&self) -> Result<LinearSystem<f64>> {
        let a = from_rows(&self.a, self.n, self.n)
            .map_err(|e| Error::DimensionMismatch(format!("A: {e}")))?;
        let b = from_rows(&self.b, self.n, self.m)
            .map_err(|e| Error::DimensionMismatch(format!("B: {e}")))?;
        LinearSystem::new(a, b)
    }
}

/// Row-major nested vectors.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from rows, checking the expected shape.
pub fn from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>, String> {
    if rows.len() != nrows {
        return Err(format!("expected {nrows} rows, found {}", rows.len()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(format!("row {i} has {} entries, expected {ncols}", r.len()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
