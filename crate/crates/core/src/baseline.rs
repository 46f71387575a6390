//! Ordinary least squares on the stacked feature rows, the usual two-stage
//! baseline: fit parameters first, optimize afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Coefficients, TrainingExample};

/// Ridge term added when the normal equations are singular.
pub const RIDGE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsFit {
    pub alpha: Coefficients,
    /// `sqrt(Σ ‖Aα − θ‖²)` over all examples.
    pub residual_norm: f64,
}

/// Minimizes the squared prediction error over all rows of all examples.
pub fn fit_least_squares(data: &[TrainingExample]) -> Result<LsFit> {
    let m = data
        .first()
        .ok_or_else(|| Error::Dimension("no training examples".into()))?
        .features
        .cols();
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for ex in data {
        if ex.features.cols() != m {
            return Err(Error::Dimension("examples disagree on feature count".into()));
        }
        for i in 0..ex.features.rows() {
            let row = ex.features.row(i);
            for a in 0..m {
                rhs[a] += row[a] * ex.truth[i];
                for b in 0..m {
                    gram[a * m + b] += row[a] * row[b];
                }
            }
        }
    }
    let alpha = match solve_dense(gram.clone(), rhs.clone(), m) {
        Some(x) => x,
        None => {
            log::debug!("normal equations singular, adding ridge {RIDGE}");
            for a in 0..m {
                gram[a * m + a] += RIDGE;
            }
            solve_dense(gram, rhs, m)
                .ok_or_else(|| Error::Dimension("least-squares system is degenerate".into()))?
        }
    };
    let alpha = Coefficients(alpha);
    let mut sq = 0.0;
    for ex in data {
        let pred = ex.features.mul_vec(&alpha)?;
        sq += pred
            .iter()
            .zip(&ex.truth)
            .map(|(p, t)| (p - t).powi(2))
            .sum::<f64>();
    }
    Ok(LsFit {
        alpha,
        residual_norm: sq.sqrt(),
    })
}

/// Gaussian elimination with partial pivoting on a row-major `n x n`
/// system. `None` if a pivot vanishes relative to the matrix scale.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if n > 0 && scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}
