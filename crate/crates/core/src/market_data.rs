//! Price ingestion, date alignment, log returns and point-cloud construction.
//!
//! Every instrument is read from its own `Date,Close` CSV file. Instruments are
//! aligned by a strict inner join on dates; no gap filling is performed, since
//! a forward-filled day would show up as a spurious zero return.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// One trading day of an instrument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub close: f64,
}

/// Closing prices of a single instrument, sorted by date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    symbol: String,
    rows: Vec<PriceRow>,
}

impl PriceTable {
    /// Builds a table, sorting rows by date. Duplicate dates and
    /// non-positive or non-finite closes are rejected.
    pub fn new(symbol: impl Into<String>, mut rows: Vec<PriceRow>) -> Result<Self> {
        let symbol = symbol.into();
        if let Some(bad) = rows.iter().find(|r| !(r.close.is_finite() && r.close > 0.0)) {
            return Err(Error::Validation(format!(
                "{symbol}: close on {} must be a positive finite price, got {}",
                bad.date, bad.close
            )));
        }
        rows.sort_by_key(|r| r.date);
        if let Some(w) = rows.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::Validation(format!(
                "{symbol}: duplicate date {}",
                w[0].date
            )));
        }
        Ok(Self { symbol, rows })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn close_on(&self, date: NaiveDate) -> Option<f64> {
        self.rows
            .binary_search_by_key(&date, |r| r.date)
            .ok()
            .map(|i| self.rows[i].close)
    }
}

/// Column names used when reading price CSV files.
///
/// `close` lists candidate headers in order of preference; the first one present
/// in the file is used. The default prefers an adjusted close when available.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvColumns {
    pub date: String,
    pub close: Vec<String>,
}

impl Default for CsvColumns {
    fn default() -> Self {
        Self {
            date: "Date".to_owned(),
            close: vec!["Adj Close".to_owned(), "Close".to_owned()],
        }
    }
}

/// Loads a price file using the default columns. The symbol is the file stem.
pub fn load_price_csv(path: impl AsRef<Path>) -> Result<PriceTable> {
    let path = path.as_ref();
    let symbol = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    load_price_csv_with(path, &symbol, &CsvColumns::default())
}

pub fn load_price_csv_with(
    path: impl AsRef<Path>,
    symbol: &str,
    columns: &CsvColumns,
) -> Result<PriceTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_price_csv(file, symbol, &path.display().to_string(), columns)
}

/// Parses price CSV text. `origin` is used in error messages only.
///
/// Cells holding `null` or nothing are treated as missing quotes and the row is
/// skipped; anything else that fails to parse is an error carrying its line.
pub fn parse_price_csv<R: Read>(
    reader: R,
    symbol: &str,
    origin: &str,
    columns: &CsvColumns,
) -> Result<PriceTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let date_idx = find(&columns.date).ok_or_else(|| Error::Parse {
        origin: origin.to_owned(),
        line: 1,
        message: format!("missing date column `{}`", columns.date),
    })?;
    let close_idx = columns
        .close
        .iter()
        .find_map(|c| find(c))
        .ok_or_else(|| Error::Parse {
            origin: origin.to_owned(),
            line: 1,
            message: format!("missing close column (tried {:?})", columns.close),
        })?;

    let mut rows: Vec<(u64, PriceRow)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_owned(),
            line,
            message,
        };
        let date_cell = record
            .get(date_idx)
            .ok_or_else(|| parse_err("missing date cell".into()))?;
        let close_cell = record
            .get(close_idx)
            .ok_or_else(|| parse_err("missing close cell".into()))?;
        let date = NaiveDate::parse_from_str(date_cell, DATE_FORMAT)
            .map_err(|e| parse_err(format!("bad date `{date_cell}`: {e}")))?;
        if close_cell.is_empty() || close_cell.eq_ignore_ascii_case("null") {
            continue;
        }
        let close: f64 = close_cell
            .parse()
            .map_err(|e| parse_err(format!("bad close `{close_cell}`: {e}")))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::InvalidRow {
                origin: origin.to_owned(),
                line,
                message: format!("close must be positive, got {close}"),
            });
        }
        rows.push((line, PriceRow { date, close }));
    }

    rows.sort_by_key(|(_, r)| r.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].1.date == w[1].1.date) {
        let line = w[0].0.max(w[1].0);
        return Err(Error::InvalidRow {
            origin: origin.to_owned(),
            line,
            message: format!("duplicate date {}", w[0].1.date),
        });
    }
    PriceTable::new(symbol, rows.into_iter().map(|(_, r)| r).collect())
}

/// Writes a table as `Date,Close` CSV.
pub fn write_price_csv<W: Write>(table: &PriceTable, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(["Date", "Close"])?;
    for r in table.rows() {
        wtr.write_record([r.date.format(DATE_FORMAT).to_string(), r.close.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Date-aligned prices: `l` rows (days) by `n` columns (instruments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceMatrix {
    symbols: Vec<String>,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl PriceMatrix {
    /// `values` is row-major, one row per date.
    pub fn new(symbols: Vec<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        check_grid(&symbols, &dates, &values)?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Validation(format!(
                "prices must be positive and finite, got {v}"
            )));
        }
        Ok(Self {
            symbols,
            dates,
            values,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_instruments(&self) -> usize {
        self.symbols.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.symbols.len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn get(&self, day: usize, instrument: usize) -> f64 {
        self.values[day * self.symbols.len() + instrument]
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        let n = self.symbols.len();
        if let Some(c) = columns.iter().find(|c| **c >= n) {
            return Err(Error::Validation(format!("column {c} out of range 0..{n}")));
        }
        let symbols = columns.iter().map(|&c| self.symbols[c].clone()).collect();
        let values = (0..self.dates.len())
            .flat_map(|j| columns.iter().map(move |&c| self.get(j, c)))
            .collect();
        Self::new(symbols, self.dates.clone(), values)
    }

    /// Splits the matrix into its per-instrument tables.
    pub fn to_tables(&self) -> Vec<PriceTable> {
        (0..self.symbols.len())
            .map(|c| PriceTable {
                symbol: self.symbols[c].clone(),
                rows: self
                    .dates
                    .iter()
                    .enumerate()
                    .map(|(j, &date)| PriceRow {
                        date,
                        close: self.get(j, c),
                    })
                    .collect(),
            })
            .collect()
    }
}

fn check_grid(symbols: &[String], dates: &[NaiveDate], values: &[f64]) -> Result<()> {
    if values.len() != symbols.len() * dates.len() {
        return Err(Error::Validation(format!(
            "grid has {} values, expected {} dates x {} symbols",
            values.len(),
            dates.len(),
            symbols.len()
        )));
    }
    if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "dates must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Inner-joins tables on date. Column order follows the input order.
pub fn align(tables: &[PriceTable]) -> Result<PriceMatrix> {
    if tables.is_empty() {
        return Err(Error::Validation("no price tables to align".into()));
    }
    if let Some(t) = tables.iter().find(|t| t.is_empty()) {
        return Err(Error::Validation(format!("table `{}` is empty", t.symbol)));
    }
    let mut common: BTreeSet<NaiveDate> = tables[0].rows.iter().map(|r| r.date).collect();
    for t in &tables[1..] {
        let dates: BTreeSet<NaiveDate> = t.rows.iter().map(|r| r.date).collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        let names: Vec<&str> = tables.iter().map(|t| t.symbol.as_str()).collect();
        return Err(Error::Alignment(format!(
            "no common dates across {}",
            names.join(", ")
        )));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let mut values = Vec::with_capacity(dates.len() * tables.len());
    for &d in &dates {
        for t in tables {
            values.push(t.close_on(d).expect("date is in the intersection"));
        }
    }
    PriceMatrix::new(
        tables.iter().map(|t| t.symbol.clone()).collect(),
        dates,
        values,
    )
}

/// Daily log returns, dated by the later day of each pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMatrix {
    symbols: Vec<String>,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnMatrix {
    pub fn new(symbols: Vec<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        check_grid(&symbols, &dates, &values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("returns must be finite".into()));
        }
        Ok(Self {
            symbols,
            dates,
            values,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_instruments(&self) -> usize {
        self.symbols.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.symbols.len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn get(&self, day: usize, instrument: usize) -> f64 {
        self.values[day * self.symbols.len() + instrument]
    }
}

pub fn log_returns(m: &PriceMatrix) -> Result<ReturnMatrix> {
    let l = m.n_days();
    if l < 2 {
        return Err(Error::InsufficientData {
            what: "log returns",
            needed: 2,
            got: l,
        });
    }
    let values = (1..l)
        .flat_map(|j| {
            m.row(j)
                .iter()
                .zip(m.row(j - 1))
                .map(|(now, prev)| (now / prev).ln())
        })
        .collect();
    ReturnMatrix::new(m.symbols.clone(), m.dates[1..].to_vec(), values)
}

/// Rebuilds prices from returns: the first row is `initial` on `base_date`,
/// every following row compounds the matching return row.
pub fn cumulative_prices(
    returns: &ReturnMatrix,
    base_date: NaiveDate,
    initial: f64,
) -> Result<PriceMatrix> {
    if returns.dates.first().is_some_and(|d| *d <= base_date) {
        return Err(Error::Validation(
            "base date must precede the first return date".into(),
        ));
    }
    let n = returns.n_instruments();
    let mut values = Vec::with_capacity((returns.n_days() + 1) * n);
    values.extend(std::iter::repeat_n(initial, n));
    for j in 0..returns.n_days() {
        for i in 0..n {
            let prev = values[j * n + i];
            values.push(prev * returns.get(j, i).exp());
        }
    }
    let mut dates = Vec::with_capacity(returns.n_days() + 1);
    dates.push(base_date);
    dates.extend_from_slice(&returns.dates);
    PriceMatrix::new(returns.symbols.clone(), dates, values)
}

/// Points in `R^n`, one per return date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dates: Vec<NaiveDate>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, dates: Vec<NaiveDate>) -> Result<Self> {
        if points.len() != dates.len() {
            return Err(Error::Validation(format!(
                "{} points but {} dates",
                points.len(),
                dates.len()
            )));
        }
        if let Some(first) = points.first() {
            let dim = first.len();
            if let Some(p) = points.iter().find(|p| p.len() != dim) {
                return Err(Error::Validation(format!(
                    "point of dimension {} in a cloud of dimension {dim}",
                    p.len()
                )));
            }
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "dates must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points, dates })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

pub fn point_cloud(r: &ReturnMatrix) -> PointCloud {
    PointCloud {
        points: (0..r.n_days()).map(|j| r.row(j).to_vec()).collect(),
        dates: r.dates.clone(),
    }
}
