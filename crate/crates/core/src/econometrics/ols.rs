use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on `|R_ii| / max |R_jj|` below which a column is
/// treated as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub n_obs: usize,
    pub n_params: usize,
}

impl RegressionFit {
    pub fn t_value(&self, i: usize) -> f64 {
        self.coefficients[i] / self.std_errors[i]
    }

    /// Gaussian log-likelihood at the MLE of the error variance.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.n_obs as f64;
        -n / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (self.rss / n).ln() + 1.0)
    }

    pub fn aic(&self) -> f64 {
        -2.0 * self.log_likelihood() + 2.0 * self.n_params as f64
    }
}

/// Least squares via Householder QR of the design matrix.
pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<RegressionFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::Validation(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::InsufficientData {
            what: "least squares (rows must exceed columns)",
            needed: k + 1,
            got: n,
        });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let q = qr.q();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(column) = (0..k).find(|&i| !(r[(i, i)].abs() > scale * RANK_TOLERANCE)) {
        return Err(Error::SingularDesign { column });
    }

    let yv = DVector::from_column_slice(y);
    let qty = q.transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign { column: 0 })?;
    let residuals = &yv - x * &beta;
    let rss = residuals.norm_squared();
    let s2 = rss / (n - k) as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::SingularDesign { column: 0 })?;
    // (X'X)^-1 = R^-1 R^-T, so the diagonal is the squared row norms of R^-1
    let std_errors = (0..k)
        .map(|i| (s2 * r_inv.row(i).norm_squared()).sqrt())
        .collect();

    Ok(RegressionFit {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        residuals: residuals.iter().copied().collect(),
        rss,
        n_obs: n,
        n_params: k,
    })
}

/// Stacks equal-length columns into a design matrix.
pub fn design(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == n));
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_recovery() {
        let x1: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let x2: Vec<f64> = (0..10).map(|i| ((i * i) % 7) as f64).collect();
        let ones = vec![1.0; 10];
        let y: Vec<f64> = (0..10).map(|i| 2.0 - 0.5 * x1[i] + 3.0 * x2[i]).collect();
        let fit = ols(&y, &design(&[&ones, &x1, &x2])).unwrap();
        for (got, want) in fit.coefficients.iter().zip([2.0, -0.5, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn intercept_only_is_mean() {
        let y = [1.0, 4.0, 2.0, 9.0];
        let fit = ols(&y, &design(&[&[1.0; 4]])).unwrap();
        assert!((fit.coefficients[0] - 4.0).abs() < 1e-14);
        // se of the mean: s / sqrt(n)
        let s2 = y.iter().map(|v| (v - 4.0f64).powi(2)).sum::<f64>() / 3.0;
        assert!((fit.std_errors[0] - (s2 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_error() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        let err = ols(&[1.0, 0.0, 1.0, 0.0], &design(&[&a, &b])).unwrap_err();
        assert!(matches!(err, Error::SingularDesign { column: 1 }));
    }

    #[test]
    fn too_few_rows() {
        let err = ols(&[1.0, 2.0], &design(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
    }
}
