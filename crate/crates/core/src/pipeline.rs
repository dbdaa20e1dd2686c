//! Sliding-window Wasserstein series.
//!
//! Each window of `w` consecutive points yields an H0 diagram. In self mode the
//! window's diagram is compared to the empty diagram; in cross mode the
//! same-dated windows of two clouds are compared to each other. Windows are
//! labeled by the date of their last point.

use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{PointCloud, DATE_FORMAT};
use crate::persistence::{h0_from_points, PersistenceDiagram};
use crate::wasserstein::{wd_between, wd_to_diagonal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub size: usize,
    pub stride: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            size: 30,
            stride: 1,
        }
    }
}

impl WindowSpec {
    pub fn new(size: usize, stride: usize) -> Result<Self> {
        if size == 0 || stride == 0 {
            return Err(Error::Validation(format!(
                "window size and stride must be >= 1 (got size {size}, stride {stride})"
            )));
        }
        Ok(Self { size, stride })
    }

    /// `floor((l - w) / stride) + 1`, or `None` when `l < w`.
    pub fn count(&self, len: usize) -> Option<usize> {
        (len >= self.size).then(|| (len - self.size) / self.stride + 1)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CloudWindow<'a> {
    pub start: usize,
    pub end_date: NaiveDate,
    pub points: &'a [Vec<f64>],
}

pub fn sliding_windows(cloud: &PointCloud, spec: WindowSpec) -> Result<Vec<CloudWindow<'_>>> {
    let spec = WindowSpec::new(spec.size, spec.stride)?;
    let count = spec.count(cloud.len()).ok_or(Error::InsufficientData {
        what: "sliding window",
        needed: spec.size,
        got: cloud.len(),
    })?;
    Ok((0..count)
        .map(|k| {
            let start = k * spec.stride;
            let end = start + spec.size;
            CloudWindow {
                start,
                end_date: cloud.dates()[end - 1],
                points: &cloud.points()[start..end],
            }
        })
        .collect())
}

/// H0 diagram of every window, in window order.
pub fn window_diagrams(
    cloud: &PointCloud,
    spec: WindowSpec,
) -> Result<Vec<(NaiveDate, PersistenceDiagram)>> {
    sliding_windows(cloud, spec)?
        .par_iter()
        .map(|w| Ok((w.end_date, h0_from_points(w.points)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    /// Window diagram against the diagonal.
    #[serde(rename = "self")]
    SelfDiagonal,
    /// Window diagram of one cloud against the same-dated window of another.
    Cross,
}

/// Dated series of Wasserstein distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdSeries {
    pub label: String,
    pub degree: f64,
    pub mode: SeriesMode,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl WdSeries {
    pub fn new(
        label: impl Into<String>,
        degree: f64,
        mode: SeriesMode,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Validation(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!(
                "series values must be finite and nonnegative, got {v}"
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "series dates must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            label: label.into(),
            degree,
            mode,
            dates,
            values,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries dated in `[start, end)`.
    pub fn slice(&self, start: NaiveDate, end: NaiveDate) -> Self {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d < end);
        let hi = hi.max(lo);
        Self {
            label: self.label.clone(),
            degree: self.degree,
            mode: self.mode,
            dates: self.dates[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        }
    }

    /// Writes `date,value` CSV. `comment` lines are emitted first, prefixed with `#`.
    pub fn write_csv<W: Write>(&self, mut writer: W, comment: &[String]) -> Result<()> {
        for line in comment {
            writeln!(writer, "# {line}").map_err(|e| Error::io("<csv writer>", e))?;
        }
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        wtr.write_record(["date", "value"])?;
        for (d, v) in self.dates.iter().zip(&self.values) {
            wtr.write_record([d.format(DATE_FORMAT).to_string(), v.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads `date,value` CSV written by [`WdSeries::write_csv`]; `#` lines are skipped.
    pub fn read_csv<R: Read>(
        reader: R,
        label: impl Into<String>,
        degree: f64,
        mode: SeriesMode,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let err = |message: String| Error::Parse {
                origin: "wd series".into(),
                line,
                message,
            };
            let date = NaiveDate::parse_from_str(record.get(0).unwrap_or(""), DATE_FORMAT)
                .map_err(|e| err(e.to_string()))?;
            let value: f64 = record
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
            dates.push(date);
            values.push(value);
        }
        Self::new(label, degree, mode, dates, values)
    }
}

pub fn wd_series_self(cloud: &PointCloud, spec: WindowSpec, p: f64) -> Result<WdSeries> {
    let diagrams = window_diagrams(cloud, spec)?;
    let values = diagrams.par_iter().map(|(_, pd)| wd_to_diagonal(pd, p)).collect();
    let dates = diagrams.into_iter().map(|(d, _)| d).collect();
    WdSeries::new("", p, SeriesMode::SelfDiagonal, dates, values)
}

pub fn wd_series_cross(
    a: &PointCloud,
    b: &PointCloud,
    spec: WindowSpec,
    p: f64,
) -> Result<WdSeries> {
    if a.dates() != b.dates() {
        return Err(Error::Alignment(format!(
            "clouds have different date axes ({} vs {} points)",
            a.len(),
            b.len()
        )));
    }
    let wa = window_diagrams(a, spec)?;
    let wb = window_diagrams(b, spec)?;
    let values = wa
        .par_iter()
        .zip(wb.par_iter())
        .map(|((_, pa), (_, pb))| wd_between(pa, pb, p))
        .collect();
    let dates = wa.into_iter().map(|(d, _)| d).collect();
    WdSeries::new("", p, SeriesMode::Cross, dates, values)
}

pub fn normalize_series(s: &WdSeries, reference_mean: f64) -> Result<WdSeries> {
    if !(reference_mean.is_finite() && reference_mean > 0.0) {
        return Err(Error::Validation(format!(
            "reference mean must be positive, got {reference_mean}"
        )));
    }
    let mut out = s.clone();
    out.values.iter_mut().for_each(|v| *v /= reference_mean);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashSummary {
    pub mean: f64,
    pub max: f64,
    pub max_date: NaiveDate,
}

/// Mean, maximum and the (first) date of the maximum.
pub fn crash_summary(s: &WdSeries) -> Result<CrashSummary> {
    if s.is_empty() {
        return Err(Error::Validation(format!("series `{}` is empty", s.label)));
    }
    let mean = s.values.iter().sum::<f64>() / s.len() as f64;
    let (idx, max) = s
        .values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(CrashSummary {
        mean,
        max,
        max_date: s.dates[idx],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        (0..n).map(|i| start + chrono::Days::new(i as u64)).collect()
    }

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        let n = points.len();
        PointCloud::new(points, dates(n)).unwrap()
    }

    #[test]
    fn window_counts() {
        let c = cloud((0..100).map(|i| vec![i as f64]).collect());
        let spec = WindowSpec::new(30, 1).unwrap();
        let w = sliding_windows(&c, spec).unwrap();
        assert_eq!(w.len(), (100 - 30) / 1 + 1);
        assert_eq!(w.len(), 71);
        assert_eq!(w[0].end_date, c.dates()[29]);
        assert_eq!(w[70].end_date, c.dates()[99]);

        let c30 = cloud((0..30).map(|i| vec![i as f64]).collect());
        assert_eq!(sliding_windows(&c30, spec).unwrap().len(), 1);
        let c29 = cloud((0..29).map(|i| vec![i as f64]).collect());
        assert!(matches!(
            sliding_windows(&c29, spec),
            Err(Error::InsufficientData { .. })
        ));
        assert!(WindowSpec::new(0, 1).is_err());
        assert!(WindowSpec::new(5, 0).is_err());
    }

    #[test]
    fn identical_points_give_zero_series() {
        let c = cloud(vec![vec![0.5, -0.5]; 40]);
        let s = wd_series_self(&c, WindowSpec::new(10, 1).unwrap(), 2.0).unwrap();
        assert_eq!(s.len(), 31);
        assert!(s.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cross_of_same_cloud_is_zero() {
        let c = cloud((0..40).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos()]).collect());
        let s = wd_series_cross(&c, &c, WindowSpec::new(10, 3).unwrap(), 2.0).unwrap();
        assert_eq!(s.len(), 11);
        assert!(s.values().iter().all(|v| *v == 0.0));
        assert_eq!(s.mode, SeriesMode::Cross);
    }

    #[test]
    fn cross_requires_same_dates() {
        let a = cloud(vec![vec![0.0]; 20]);
        let b = PointCloud::new(vec![vec![0.0]; 20], dates(21)[1..].to_vec()).unwrap();
        assert!(matches!(
            wd_series_cross(&a, &b, WindowSpec::default(), 1.0),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn summary_examples() {
        let s = WdSeries::new("s", 2.0, SeriesMode::SelfDiagonal, dates(3), vec![1.0, 3.0, 2.0])
            .unwrap();
        let cs = crash_summary(&s).unwrap();
        assert_eq!(cs.mean, 2.0);
        assert_eq!(cs.max, 3.0);
        assert_eq!(cs.max_date, s.dates()[1]);

        let c = WdSeries::new("c", 2.0, SeriesMode::SelfDiagonal, dates(4), vec![0.7; 4]).unwrap();
        let cs = crash_summary(&c).unwrap();
        assert!((cs.mean - 0.7).abs() < 1e-15);
        assert_eq!(cs.max, 0.7);

        let empty = WdSeries::new("e", 2.0, SeriesMode::SelfDiagonal, vec![], vec![]).unwrap();
        assert!(crash_summary(&empty).is_err());
    }

    #[test]
    fn normalize_by_own_mean() {
        let s = WdSeries::new("s", 1.0, SeriesMode::SelfDiagonal, dates(4), vec![1.0, 2.0, 3.0, 6.0])
            .unwrap();
        let mean = crash_summary(&s).unwrap().mean;
        let n = normalize_series(&s, mean).unwrap();
        assert!((crash_summary(&n).unwrap().mean - 1.0).abs() < 1e-15);
        assert!(normalize_series(&s, 0.0).is_err());
        assert!(normalize_series(&s, -1.0).is_err());
    }

    #[test]
    fn slice_is_half_open() {
        let s = WdSeries::new("s", 1.0, SeriesMode::SelfDiagonal, dates(10), vec![1.0; 10]).unwrap();
        let d = dates(10);
        let sl = s.slice(d[2], d[5]);
        assert_eq!(sl.dates(), &d[2..5]);
        assert!(s.slice(d[5], d[2]).is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let s = WdSeries::new("s", 2.0, SeriesMode::SelfDiagonal, dates(3), vec![0.1, 0.25, 1e-17])
            .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &["config_hash=abc".to_owned()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# config_hash=abc\ndate,value\n2020-01-01,0.1\n"));
        assert!(!text.contains('\r'));
        let back = WdSeries::read_csv(buf.as_slice(), "s", 2.0, SeriesMode::SelfDiagonal).unwrap();
        assert_eq!(back, s);
    }
}
