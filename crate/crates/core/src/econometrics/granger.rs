//! Bivariate Granger-causality F-test and FPE lag selection.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::ols::{design, ols};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub lag: usize,
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_denom: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    /// The unrestricted model fits the effect series exactly.
    pub perfect_fit: bool,
}

impl GrangerResult {
    pub fn labeled(mut self, cause: impl Into<String>, effect: impl Into<String>) -> Self {
        self.cause = cause.into();
        self.effect = effect.into();
        self
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Upper tail of the F(d1, d2) distribution.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Columns `series[t - i]` for `i = 1..=lags`, `t` running over `start..series.len()`.
fn lag_columns(series: &[f64], lags: usize, start: usize) -> Vec<Vec<f64>> {
    (1..=lags)
        .map(|i| (start..series.len()).map(|t| series[t - i]).collect())
        .collect()
}

/// Tests `H0: cause does not Granger-cause effect` with `q` lags of each.
///
/// Restricted: `y_t = a_0 + sum a_i y_{t-i}`. Unrestricted adds
/// `sum g_i x_{t-i}`. With `n = T - q` usable rows,
/// `F = ((RSS_r - RSS_u) / q) / (RSS_u / (n - 2q - 1))`.
pub fn granger_test(effect: &[f64], cause: &[f64], q: usize) -> Result<GrangerResult> {
    if effect.len() != cause.len() {
        return Err(Error::Validation(format!(
            "series lengths differ ({} vs {})",
            effect.len(),
            cause.len()
        )));
    }
    if q == 0 {
        return Err(Error::Validation("Granger lag must be >= 1".into()));
    }
    let t = effect.len();
    let n = t.saturating_sub(q);
    if n < 2 * q + 2 {
        return Err(Error::InsufficientData {
            what: "Granger test",
            needed: 3 * q + 2,
            got: t,
        });
    }
    let y = &effect[q..];
    let ones = vec![1.0; n];
    let own = lag_columns(effect, q, q);
    let other = lag_columns(cause, q, q);

    let mut cols: Vec<&[f64]> = vec![&ones];
    cols.extend(own.iter().map(Vec::as_slice));
    let restricted = ols(y, &design(&cols))?;
    cols.extend(other.iter().map(Vec::as_slice));
    let unrestricted = ols(y, &design(&cols))?;

    let df_num = q;
    let df_denom = n - 2 * q - 1;
    let rss_r = restricted.rss;
    let rss_u = unrestricted.rss.min(rss_r);
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let perfect_fit = rss_u <= tss * 1e-24;

    let (f_statistic, p_value) = if rss_u == 0.0 {
        (f64::MAX, 0.0)
    } else {
        let f = ((rss_r - rss_u) / df_num as f64) / (rss_u / df_denom as f64);
        let p = if perfect_fit {
            0.0
        } else {
            f_survival(f, df_num as f64, df_denom as f64)
        };
        (f, p)
    };

    Ok(GrangerResult {
        cause: "x".into(),
        effect: "y".into(),
        lag: q,
        f_statistic,
        p_value,
        df_num,
        df_denom,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        perfect_fit,
    })
}

/// Default FPE search bound `min(10, floor(T/10))`, at least 1.
pub fn default_max_lag(t: usize) -> usize {
    (t / 10).clamp(1, 10)
}

/// FPE of bivariate VAR(m) on `(y, x)` for `m = 1..=max_lag`, all fitted on
/// the common sample that drops the first `max_lag` observations.
///
/// `FPE(m) = ((n + k) / (n - k))^2 det(Sigma_m)` with `k = 2m + 1` regressors
/// per equation and `Sigma_m` the MLE residual covariance.
pub fn fpe_values(y: &[f64], x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if y.len() != x.len() {
        return Err(Error::Validation(format!(
            "series lengths differ ({} vs {})",
            y.len(),
            x.len()
        )));
    }
    if max_lag == 0 {
        return Err(Error::Validation("max lag must be >= 1".into()));
    }
    let t = y.len();
    // the largest model needs n - k >= 1 with n = T - max_lag and k = 2 max_lag + 1
    let needed = (2 * max_lag + 3).max(3 * max_lag + 2);
    if t < needed {
        return Err(Error::InsufficientData {
            what: "FPE lag selection",
            needed,
            got: t,
        });
    }
    let n = t - max_lag;
    let ones = vec![1.0; n];
    let y_lags = lag_columns(y, max_lag, max_lag);
    let x_lags = lag_columns(x, max_lag, max_lag);
    let y_now = &y[max_lag..];
    let x_now = &x[max_lag..];

    (1..=max_lag)
        .map(|m| {
            let mut cols: Vec<&[f64]> = vec![&ones];
            cols.extend(y_lags[..m].iter().map(Vec::as_slice));
            cols.extend(x_lags[..m].iter().map(Vec::as_slice));
            let xm = design(&cols);
            let ey = ols(y_now, &xm)?.residuals;
            let ex = ols(x_now, &xm)?.residuals;
            let nf = n as f64;
            let syy = ey.iter().map(|e| e * e).sum::<f64>() / nf;
            let sxx = ex.iter().map(|e| e * e).sum::<f64>() / nf;
            let sxy = ey.iter().zip(&ex).map(|(a, b)| a * b).sum::<f64>() / nf;
            let det = syy * sxx - sxy * sxy;
            let k = (2 * m + 1) as f64;
            Ok(((nf + k) / (nf - k)).powi(2) * det)
        })
        .collect()
}

/// Lag in `1..=max_lag` minimizing the FPE; ties go to the smaller lag.
pub fn fpe_select(y: &[f64], x: &[f64], max_lag: usize) -> Result<usize> {
    let values = fpe_values(y, x, max_lag)?;
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    Ok(best + 1)
}
