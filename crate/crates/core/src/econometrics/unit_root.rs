//! Augmented Dickey-Fuller and Phillips-Perron unit-root tests.
//!
//! Both use a constant and no trend, and report MacKinnon's (1994) approximate
//! asymptotic p-value for one unit root.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ols::{design, ols, RegressionFit};
use crate::error::{Error, Result};

pub const MIN_UNIT_ROOT_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitRootTest {
    Adf,
    Pp,
}

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deterministic {
    #[default]
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub test: UnitRootTest,
    pub statistic: f64,
    pub p_value: f64,
    /// ADF: augmentation lags used. PP: Newey-West bandwidth.
    pub lags: usize,
    pub n_obs: usize,
    pub deterministic: Deterministic,
}

impl UnitRootResult {
    pub fn rejects_unit_root(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

// MacKinnon (1994) response surface, constant-only, N = 1.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALL_P: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_LARGE_P: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

/// Approximate p-value of a Dickey-Fuller t statistic (constant, no trend).
pub fn mackinnon_p_value(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let coefs: &[f64] = if stat <= TAU_STAR {
        &TAU_SMALL_P
    } else {
        &TAU_LARGE_P
    };
    // coefficients in increasing powers
    let z = coefs.iter().rev().fold(0.0, |acc, c| acc * stat + c);
    Normal::standard().cdf(z)
}

fn check_series(s: &[f64]) -> Result<()> {
    if s.len() < MIN_UNIT_ROOT_LEN {
        return Err(Error::InsufficientData {
            what: "unit-root test",
            needed: MIN_UNIT_ROOT_LEN,
            got: s.len(),
        });
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("series contains non-finite values".into()));
    }
    if s.iter().all(|v| *v == s[0]) {
        return Err(Error::DegenerateRegression("series is constant".into()));
    }
    Ok(())
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::SingularDesign { .. } => {
            Error::DegenerateRegression("unit-root regression has a singular design".into())
        }
        other => other,
    }
}

/// Schwert's rule `floor(12 (T/100)^(1/4))`, capped so the largest
/// regression keeps more observations than parameters.
pub fn adf_max_lag(t: usize) -> usize {
    let schwert = (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize;
    schwert.min((t / 2).saturating_sub(2))
}

/// ADF regression `dy_t = c + b y_{t-1} + sum_{i<=k} d_i dy_{t-i}` over the
/// last `n_obs` observations.
fn adf_regression(s: &[f64], lag: usize, n_obs: usize) -> Result<RegressionFit> {
    let dy: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    // dy index t corresponds to s[t + 1] - s[t]
    let first = dy.len() - n_obs;
    let lhs = &dy[first..];
    let ones = vec![1.0; n_obs];
    let level: Vec<f64> = (first..dy.len()).map(|t| s[t]).collect();
    let lagged: Vec<Vec<f64>> = (1..=lag)
        .map(|i| (first..dy.len()).map(|t| dy[t - i]).collect())
        .collect();
    let mut columns: Vec<&[f64]> = vec![&level, &ones];
    columns.extend(lagged.iter().map(Vec::as_slice));
    ols(lhs, &design(&columns)).map_err(degenerate)
}

/// ADF test with augmentation order chosen by AIC over `0..=adf_max_lag(T)`.
///
/// Candidate orders are compared on a common sample; the chosen order is then
/// re-estimated on all available observations.
pub fn adf_test(s: &[f64]) -> Result<UnitRootResult> {
    check_series(s)?;
    let max_lag = adf_max_lag(s.len());
    let n_common = s.len() - 1 - max_lag;
    let mut best: Option<(f64, usize)> = None;
    for lag in 0..=max_lag {
        let aic = adf_regression(s, lag, n_common)?.aic();
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, lag));
        }
    }
    let (_, lag) = best.expect("at least lag 0 is evaluated");
    adf_test_with_lag(s, lag)
}

/// ADF test with a fixed augmentation order.
pub fn adf_test_with_lag(s: &[f64], lag: usize) -> Result<UnitRootResult> {
    check_series(s)?;
    let n_obs = (s.len() - 1).saturating_sub(lag);
    if n_obs <= lag + 2 {
        return Err(Error::InsufficientData {
            what: "ADF regression",
            needed: 2 * lag + 4,
            got: s.len(),
        });
    }
    let fit = adf_regression(s, lag, n_obs)?;
    let statistic = fit.t_value(0);
    if !statistic.is_finite() {
        return Err(Error::DegenerateRegression("ADF t-ratio is not finite".into()));
    }
    Ok(UnitRootResult {
        test: UnitRootTest::Adf,
        statistic,
        p_value: mackinnon_p_value(statistic),
        lags: lag,
        n_obs,
        deterministic: Deterministic::Constant,
    })
}

/// Bartlett bandwidth `floor(4 (T/100)^(2/9))`.
pub fn pp_bandwidth(t: usize) -> usize {
    (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Newey-West long-run variance of `u` (not demeaned) with Bartlett weights.
pub fn newey_west_lrv(u: &[f64], lags: usize) -> f64 {
    let n = u.len();
    let autocov = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
    let mut total = autocov(0);
    for j in 1..=lags.min(n.saturating_sub(1)) {
        let w = 1.0 - j as f64 / (lags + 1) as f64;
        total += 2.0 * w * autocov(j);
    }
    total / n as f64
}

pub fn pp_test(s: &[f64]) -> Result<UnitRootResult> {
    pp_test_with_bandwidth(s, pp_bandwidth(s.len()))
}

/// Phillips-Perron Z_t: the t-ratio of `y_t = c + rho y_{t-1} + u_t`, corrected
/// for serial correlation in `u` with a Newey-West long-run variance.
pub fn pp_test_with_bandwidth(s: &[f64], bandwidth: usize) -> Result<UnitRootResult> {
    check_series(s)?;
    let lhs = &s[1..];
    let lagged = &s[..s.len() - 1];
    let ones = vec![1.0; lhs.len()];
    let fit = ols(lhs, &design(&[lagged, &ones])).map_err(degenerate)?;
    let n = fit.n_obs as f64;
    let k = fit.n_params as f64;
    let s2 = fit.rss / (n - k);
    let sd = s2.sqrt();
    let gamma0 = s2 * (n - k) / n;
    let se = fit.std_errors[0];
    if !(se > 0.0 && s2 > 0.0) {
        return Err(Error::DegenerateRegression(
            "Phillips-Perron regression has zero residual variance".into(),
        ));
    }
    let rho = fit.coefficients[0];
    let lam2 = newey_west_lrv(&fit.residuals, bandwidth);
    let lam = lam2.sqrt();
    let statistic =
        (gamma0 / lam2).sqrt() * ((rho - 1.0) / se) - 0.5 * ((lam2 - gamma0) / lam) * (n * se / sd);
    if !statistic.is_finite() {
        return Err(Error::DegenerateRegression("Phillips-Perron statistic is not finite".into()));
    }
    Ok(UnitRootResult {
        test: UnitRootTest::Pp,
        statistic,
        p_value: mackinnon_p_value(statistic),
        lags: bandwidth,
        n_obs: fit.n_obs,
        deterministic: Deterministic::Constant,
    })
}
