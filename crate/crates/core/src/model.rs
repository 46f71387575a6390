//! Linear prediction of problem parameters from features.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense `rows x cols` matrix stored row-major; one row of features per
/// unknown parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged feature rows".into()));
        }
        FeatureMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// The coefficient vector α of the linear model `θ̂ = Aα`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients(pub Vec<f64>);

impl Coefficients {
    pub fn zeros(m: usize) -> Self {
        Coefficients(vec![0.0; m])
    }
}

impl Deref for Coefficients {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Features for one problem instance paired with its true parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: FeatureMatrix,
    pub truth: Vec<f64>,
}

impl TrainingExample {
    pub fn new(features: FeatureMatrix, truth: Vec<f64>) -> Result<Self> {
        if features.rows() != truth.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} true parameters",
                features.rows(),
                truth.len()
            )));
        }
        Ok(TrainingExample { features, truth })
    }
}

/// Predicts parameters as `Aα`, clamping negative values to zero when the
/// problem requires nonnegative parameters.
pub fn predict(alpha: &Coefficients, a: &FeatureMatrix, nonnegative: bool) -> Result<Vec<f64>> {
    let mut theta = a.mul_vec(alpha)?;
    if nonnegative {
        let mut clamped = 0;
        for v in theta.iter_mut().filter(|v| **v < 0.0) {
            *v = 0.0;
            clamped += 1;
        }
        if clamped > 0 {
            log::debug!("clamped {clamped} negative predictions to zero");
        }
    }
    Ok(theta)
}
