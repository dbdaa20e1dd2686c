//! Stationarity testing, differencing, lag selection and Granger tests.

mod granger;
mod ols;
mod unit_root;

use serde::{Deserialize, Serialize};

pub use granger::{default_max_lag, f_survival, fpe_select, fpe_values, granger_test, GrangerResult};
pub use ols::{design, ols, RegressionFit};
pub use unit_root::{
    adf_max_lag, adf_test, adf_test_with_lag, mackinnon_p_value, newey_west_lrv, pp_bandwidth,
    pp_test, pp_test_with_bandwidth, Deterministic, UnitRootResult, UnitRootTest,
    MIN_UNIT_ROOT_LEN,
};

use crate::error::{Error, Result};

/// `order`-fold first differences.
pub fn difference(s: &[f64], order: usize) -> Result<Vec<f64>> {
    if s.len() <= order {
        return Err(Error::InsufficientData {
            what: "differencing",
            needed: order + 1,
            got: s.len(),
        });
    }
    let mut out = s.to_vec();
    for _ in 0..order {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// A series after differencing, with the tests run at that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySeries {
    pub values: Vec<f64>,
    pub order: usize,
    pub adf: Option<UnitRootResult>,
    pub pp: Option<UnitRootResult>,
    /// Both tests reject a unit root at the configured level. `false` means
    /// the series is flagged: it still failed at the maximum order.
    pub stationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityOutcome {
    pub series: Vec<StationarySeries>,
    pub order: usize,
}

impl StationarityOutcome {
    pub fn all_stationary(&self) -> bool {
        self.series.iter().all(|s| s.stationary)
    }
}

fn test_at(s: &[f64], order: usize, alpha: f64) -> Result<StationarySeries> {
    let values = difference(s, order)?;
    let adf = adf_test(&values).ok();
    let pp = pp_test(&values).ok();
    let stationary = adf.is_some_and(|r| r.rejects_unit_root(alpha))
        && pp.is_some_and(|r| r.rejects_unit_root(alpha));
    Ok(StationarySeries {
        values,
        order,
        adf,
        pp,
        stationary,
    })
}

/// Finds the smallest common differencing order `d <= d_max` at which every
/// series rejects a unit root under both ADF and PP at level `alpha`.
///
/// If no such order exists the series are returned at `d_max` with the
/// failing ones flagged. A test that cannot be computed counts as a failure.
pub fn ensure_stationary(
    series: &[&[f64]],
    alpha: f64,
    d_max: usize,
) -> Result<StationarityOutcome> {
    if series.is_empty() {
        return Err(Error::Validation("no series to test".into()));
    }
    if d_max == 0 {
        return Err(Error::Validation("maximum differencing order must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha must be in (0, 1), got {alpha}")));
    }
    for order in 0..=d_max {
        let tested = series
            .iter()
            .map(|s| test_at(s, order, alpha))
            .collect::<Result<Vec<_>>>()?;
        if order == d_max || tested.iter().all(|s| s.stationary) {
            return Ok(StationarityOutcome {
                series: tested,
                order,
            });
        }
    }
    unreachable!("loop returns at d_max")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_examples() {
        let s = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(difference(&s, 0).unwrap(), s);
        assert_eq!(difference(&s, 1).unwrap(), [1.0, 2.0, 3.0]);
        assert_eq!(difference(&s, 2).unwrap(), [1.0, 1.0]);
        assert!(matches!(
            difference(&[1.0, 2.0], 2),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn ensure_stationary_validates() {
        assert!(ensure_stationary(&[], 0.05, 2).is_err());
        assert!(ensure_stationary(&[&[1.0; 30]], 0.05, 0).is_err());
    }

    #[test]
    fn constant_series_is_flagged_not_failed() {
        let out = ensure_stationary(&[&[1.0; 40]], 0.05, 2).unwrap();
        assert_eq!(out.order, 2);
        assert!(!out.all_stationary());
        assert!(out.series[0].adf.is_none());
    }
}
