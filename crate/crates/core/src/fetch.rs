//! Optional remote download of price CSVs.
//!
//! The endpoint is a URL template; `{symbol}`, `{start}`/`{end}` (ISO dates) and
//! `{start_ts}`/`{end_ts}` (unix seconds, UTC midnight) are substituted per
//! request. Analysis code never calls into this module.

use std::time::Duration;

use chrono::NaiveDate;
use thiserror::Error;

use crate::market_data::{parse_price_csv, CsvColumns, PriceTable, DATE_FORMAT};

pub const YAHOO_ENDPOINT: &str = "https://query1.finance.yahoo.com/v7/finance/download/{symbol}?period1={start_ts}&period2={end_ts}&interval=1d&events=history&includeAdjustedClose=true";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("empty payload")]
    Empty,
    #[error(transparent)]
    Data(#[from] crate::Error),
}

#[derive(Debug)]
pub struct FetchFailure {
    pub symbol: String,
    pub error: FetchError,
}

/// Tables for the symbols that loaded, plus one failure record per symbol
/// that did not. Both lists keep the input order.
#[derive(Debug, Default)]
pub struct FetchOutcome {
    pub tables: Vec<PriceTable>,
    pub failures: Vec<FetchFailure>,
}

pub fn render_endpoint(template: &str, symbol: &str, start: NaiveDate, end: NaiveDate) -> String {
    let ts = |d: NaiveDate| {
        d.and_hms_opt(0, 0, 0)
            .expect("midnight is valid")
            .and_utc()
            .timestamp()
            .to_string()
    };
    template
        .replace("{symbol}", symbol)
        .replace("{start_ts}", &ts(start))
        .replace("{end_ts}", &ts(end))
        .replace("{start}", &start.format(DATE_FORMAT).to_string())
        .replace("{end}", &end.format(DATE_FORMAT).to_string())
}

/// Downloads one CSV payload.
pub fn fetch_csv(url: &str, timeout: Duration) -> Result<String, FetchError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .build()
        .into();
    let mut resp = agent.get(url).call().map_err(|e| match e {
        ureq::Error::StatusCode(code) => FetchError::Status(code),
        other => FetchError::Transport(other.to_string()),
    })?;
    let body = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| FetchError::Transport(e.to_string()))?;
    if body.trim().is_empty() {
        return Err(FetchError::Empty);
    }
    Ok(body)
}

/// Fetches every symbol concurrently. A failing symbol never aborts the batch.
pub fn fetch_prices(
    symbols: &[String],
    start: NaiveDate,
    end: NaiveDate,
    endpoint: &str,
    columns: &CsvColumns,
) -> FetchOutcome {
    let timeout = Duration::from_secs(30);
    let results: Vec<Result<PriceTable, FetchError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = symbols
            .iter()
            .map(|symbol| {
                scope.spawn(move || {
                    let url = render_endpoint(endpoint, symbol, start, end);
                    let body = fetch_csv(&url, timeout)?;
                    let table = parse_price_csv(body.as_bytes(), symbol, &url, columns)?;
                    if table.is_empty() {
                        return Err(FetchError::Empty);
                    }
                    Ok(table)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(FetchError::Transport("worker panicked".into())))
            })
            .collect()
    });

    let mut outcome = FetchOutcome::default();
    for (symbol, result) in symbols.iter().zip(results) {
        match result {
            Ok(table) => outcome.tables.push(table),
            Err(error) => outcome.failures.push(FetchFailure {
                symbol: symbol.clone(),
                error,
            }),
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_substitution() {
        let s = NaiveDate::from_ymd_opt(2018, 6, 1).unwrap();
        let e = NaiveDate::from_ymd_opt(2021, 6, 1).unwrap();
        let url = render_endpoint("http://h/{symbol}?a={start_ts}&b={end_ts}&c={start}", "CL=F", s, e);
        assert_eq!(url, "http://h/CL=F?a=1527811200&b=1622505600&c=2018-06-01");
    }
}
