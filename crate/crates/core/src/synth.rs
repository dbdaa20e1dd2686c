//! Seeded generators for fixtures and power studies.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with a `u64` and drawn
//! through `rand_distr::StandardNormal`, so a seed reproduces the same numbers
//! on every platform and thread count.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{cumulative_prices, PriceMatrix, ReturnMatrix};

/// Identifies the generator stack in run metadata.
pub const RNG_NAME: &str = "rand_chacha-0.9/ChaCha8Rng+rand_distr-0.5/StandardNormal";

pub const BURN_IN: usize = 200;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn white_noise(t: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..t).map(|_| normal(&mut rng)).collect()
}

/// Cumulative sum of `t` standard normal steps.
pub fn simulate_random_walk(t: usize, seed: u64) -> Vec<f64> {
    let mut level = 0.0;
    white_noise(t, seed)
        .into_iter()
        .map(|e| {
            level += e;
            level
        })
        .collect()
}

/// `x_t = sum_i A_i x_{t-i} + e_t`, `e_t ~ N(0, noise_cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    /// One `n x n` matrix per lag, lag 1 first.
    pub coefficients: Vec<DMatrix<f64>>,
    pub noise_cov: DMatrix<f64>,
    pub seed: u64,
}

impl VarSpec {
    pub fn n_vars(&self) -> usize {
        self.noise_cov.nrows()
    }

    pub fn lag_order(&self) -> usize {
        self.coefficients.len()
    }

    /// Largest eigenvalue modulus of the companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        let n = self.n_vars();
        let p = self.lag_order();
        if p == 0 {
            return 0.0;
        }
        let mut companion = DMatrix::zeros(n * p, n * p);
        for (i, a) in self.coefficients.iter().enumerate() {
            companion.view_mut((0, i * n), (n, n)).copy_from(a);
        }
        for i in n..n * p {
            companion[(i, i - n)] = 1.0;
        }
        match companion.clone().try_schur(1e-14, 100_000) {
            Some(schur) => schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
            None => gelfand_radius(&companion),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if n == 0 || self.noise_cov.ncols() != n {
            return Err(Error::Validation("noise covariance must be square and non-empty".into()));
        }
        if let Some(i) = self.coefficients.iter().position(|a| a.shape() != (n, n)) {
            return Err(Error::Validation(format!("coefficient matrix for lag {} is not {n}x{n}", i + 1)));
        }
        if self.noise_cov.clone().cholesky().is_none() {
            return Err(Error::Validation("noise covariance is not positive definite".into()));
        }
        let radius = self.spectral_radius();
        if !(radius < 1.0) {
            return Err(Error::Validation(format!(
                "VAR is not stationary: companion spectral radius {radius:.6} >= 1"
            )));
        }
        Ok(())
    }
}

/// `lim ||A^k||^(1/k)` by repeated squaring with rescaling.
fn gelfand_radius(a: &DMatrix<f64>) -> f64 {
    let mut m = a.clone();
    let mut log_scale = 0.0;
    let mut k = 1.0;
    for _ in 0..60 {
        let norm = m.norm();
        if norm == 0.0 {
            return 0.0;
        }
        m /= norm;
        log_scale += norm.ln() / k;
        m = &m * &m;
        k *= 2.0;
    }
    (log_scale + m.norm().ln() / k).exp()
}

/// Simulates `t` observations after discarding [`BURN_IN`] warm-up draws.
/// Returns one series per variable.
pub fn simulate_var(spec: &VarSpec, t: usize) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let n = spec.n_vars();
    let p = spec.lag_order();
    if t <= 10 * p {
        return Err(Error::InsufficientData {
            what: "VAR simulation (T must exceed 10 x lag order)",
            needed: 10 * p + 1,
            got: t,
        });
    }
    let chol = spec
        .noise_cov
        .clone()
        .cholesky()
        .expect("validated positive definite")
        .l();
    let mut rng = seeded_rng(spec.seed);
    let total = BURN_IN + t;
    let mut x = vec![vec![0.0; n]; total];
    for step in 0..total {
        let z: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let mut next: Vec<f64> = (0..n)
            .map(|i| (0..=i).map(|j| chol[(i, j)] * z[j]).sum())
            .collect();
        for (lag, a) in spec.coefficients.iter().enumerate() {
            if step > lag {
                let prev = &x[step - lag - 1];
                for (i, v) in next.iter_mut().enumerate() {
                    *v += (0..n).map(|j| a[(i, j)] * prev[j]).sum::<f64>();
                }
            }
        }
        x[step] = next;
    }
    Ok((0..n)
        .map(|i| x[BURN_IN..].iter().map(|row| row[i]).collect())
        .collect())
}

/// A volatility burst over the inclusive date range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashShock {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Multiplier applied to every return in the window, >= 1.
    pub scale: f64,
    /// Standard deviation of a shock added to all instruments on each day.
    pub common_sd: f64,
    pub seed: u64,
}

/// Scales returns inside the window and adds a common daily shock, widening
/// the point cloud so that H0 deaths grow during the burst.
pub fn inject_crash(returns: &ReturnMatrix, shock: &CrashShock) -> Result<ReturnMatrix> {
    if !(shock.scale.is_finite() && shock.scale >= 1.0) {
        return Err(Error::Validation(format!("crash scale must be >= 1, got {}", shock.scale)));
    }
    if !(shock.common_sd.is_finite() && shock.common_sd >= 0.0) {
        return Err(Error::Validation("common shock sd must be nonnegative".into()));
    }
    let inside: Vec<bool> = returns
        .dates()
        .iter()
        .map(|d| shock.start <= *d && *d <= shock.end)
        .collect();
    if !inside.iter().any(|b| *b) {
        return Err(Error::Validation(format!(
            "crash window {}..={} does not overlap the return dates",
            shock.start, shock.end
        )));
    }
    let n = returns.n_instruments();
    let mut rng = seeded_rng(shock.seed);
    let mut values = returns.values().to_vec();
    for (j, _) in inside.iter().enumerate().filter(|(_, b)| **b) {
        let common = if shock.common_sd > 0.0 {
            shock.common_sd * normal(&mut rng)
        } else {
            0.0
        };
        for v in &mut values[j * n..(j + 1) * n] {
            *v = *v * shock.scale + common;
        }
    }
    ReturnMatrix::new(returns.symbols().to_vec(), returns.dates().to_vec(), values)
}

/// Weekdays starting at (or after) `start`.
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// One-factor return panel with an injected volatility burst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashFixture {
    /// Number of return days.
    pub days: usize,
    pub instruments: usize,
    /// Index of the first burst day among the return days.
    pub burst_start: usize,
    pub burst_len: usize,
    pub scale: f64,
    /// Idiosyncratic daily volatility.
    pub volatility: f64,
    /// Loading on the common market factor, in units of `volatility`.
    pub market_loading: f64,
    pub common_sd: f64,
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl Default for CrashFixture {
    fn default() -> Self {
        Self {
            days: 500,
            instruments: 20,
            burst_start: 240,
            burst_len: 20,
            scale: 5.0,
            volatility: 0.01,
            market_loading: 0.5,
            common_sd: 0.0,
            start_date: NaiveDate::from_ymd_opt(2018, 6, 1).expect("valid date"),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrashData {
    pub returns: ReturnMatrix,
    pub prices: PriceMatrix,
    /// First and last return date of the burst.
    pub burst: (NaiveDate, NaiveDate),
}

impl CrashFixture {
    pub fn symbols(&self) -> Vec<String> {
        (0..self.instruments).map(|i| format!("SYN{i:02}")).collect()
    }

    pub fn generate(&self) -> Result<CrashData> {
        if self.instruments == 0 || self.days < 2 {
            return Err(Error::Validation("fixture needs instruments and at least 2 days".into()));
        }
        if self.burst_len == 0 || self.burst_start + self.burst_len > self.days {
            return Err(Error::Validation("burst must lie inside the fixture".into()));
        }
        let all_days = business_days(self.start_date, self.days + 1);
        let dates = all_days[1..].to_vec();
        let mut rng = seeded_rng(self.seed);
        let mut values = Vec::with_capacity(self.days * self.instruments);
        for _ in 0..self.days {
            let market = normal(&mut rng);
            for _ in 0..self.instruments {
                let idio = normal(&mut rng);
                values.push(self.volatility * (self.market_loading * market + idio));
            }
        }
        let base = ReturnMatrix::new(self.symbols(), dates.clone(), values)?;
        let burst = (
            dates[self.burst_start],
            dates[self.burst_start + self.burst_len - 1],
        );
        let returns = inject_crash(
            &base,
            &CrashShock {
                start: burst.0,
                end: burst.1,
                scale: self.scale,
                common_sd: self.common_sd,
                seed: self.seed.wrapping_add(1),
            },
        )?;
        let prices = cumulative_prices(&returns, all_days[0], 100.0)?;
        Ok(CrashData {
            returns,
            prices,
            burst,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        assert_eq!(white_noise(100, 3), white_noise(100, 3));
        assert_ne!(white_noise(100, 3), white_noise(100, 4));
        let rw = simulate_random_walk(5, 9);
        let wn = white_noise(5, 9);
        assert!((rw[4] - wn.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficients_give_noise_with_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 2.0]);
        let spec = VarSpec {
            coefficients: vec![DMatrix::zeros(2, 2)],
            noise_cov: cov,
            seed: 11,
        };
        let t = 50_000;
        let x = simulate_var(&spec, t).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let cov = |a: &[f64], b: &[f64]| {
            let (ma, mb) = (mean(a), mean(b));
            a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
        };
        assert!((cov(&x[0], &x[0]) - 1.0).abs() < 0.03);
        assert!((cov(&x[1], &x[1]) - 2.0).abs() < 0.06);
        assert!((cov(&x[0], &x[1]) - 0.6).abs() < 0.03);
        // no serial correlation
        assert!(cov(&x[0][1..], &x[0][..t - 1]).abs() < 0.02);
    }

    #[test]
    fn nonstationary_spec_rejected() {
        let spec = VarSpec {
            coefficients: vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5])],
            noise_cov: DMatrix::identity(2, 2),
            seed: 1,
        };
        assert!((spec.spectral_radius() - 1.0).abs() < 1e-12);
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        assert!((gelfand_radius(&a) - 0.5).abs() < 1e-9);
        assert_eq!(gelfand_radius(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])), 0.0);
        assert!(matches!(simulate_var(&spec, 100), Err(Error::Validation(_))));
    }

    #[test]
    fn short_simulation_rejected() {
        let spec = VarSpec {
            coefficients: vec![DMatrix::zeros(1, 1); 3],
            noise_cov: DMatrix::identity(1, 1),
            seed: 1,
        };
        assert!(simulate_var(&spec, 30).is_err());
        assert_eq!(simulate_var(&spec, 31).unwrap()[0].len(), 31);
    }

    #[test]
    fn identity_crash() {
        let data = CrashFixture {
            scale: 1.0,
            ..CrashFixture::default()
        };
        let base = CrashFixture {
            burst_len: 1,
            ..data.clone()
        };
        let a = data.generate().unwrap();
        let b = base.generate().unwrap();
        assert_eq!(a.returns, b.returns);
    }

    #[test]
    fn crash_outside_range_rejected() {
        let data = CrashFixture::default().generate().unwrap();
        let late = NaiveDate::from_ymd_opt(2030, 1, 1).unwrap();
        let shock = CrashShock {
            start: late,
            end: late,
            scale: 2.0,
            common_sd: 0.0,
            seed: 0,
        };
        assert!(inject_crash(&data.returns, &shock).is_err());
    }

    #[test]
    fn business_days_skip_weekends() {
        let sat = NaiveDate::from_ymd_opt(2020, 1, 4).unwrap();
        let days = business_days(sat, 3);
        assert_eq!(days[0], NaiveDate::from_ymd_opt(2020, 1, 6).unwrap());
        assert_eq!(days[2], NaiveDate::from_ymd_opt(2020, 1, 8).unwrap());
    }
}
