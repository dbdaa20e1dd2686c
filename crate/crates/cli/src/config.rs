use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topocausal::fetch::YAHOO_ENDPOINT;
use topocausal::market_data::CsvColumns;
use topocausal::network::{AnalysisConfig, PeriodSpec};
use topocausal::pipeline::WindowSpec;
use topocausal::universe::{COMMODITIES, SECTORS, US_STOCKS};

use crate::CliError;

pub const DATA_DIR_ENV: &str = "TOPOCAUSAL_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub symbols: Vec<String>,
}

impl Group {
    fn new(name: &str, symbols: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            symbols: symbols.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory holding `<SYMBOL>.csv`. Not part of the config hash.
    pub data_dir: PathBuf,
    /// Inclusive first and exclusive last price date.
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub groups: Vec<Group>,
    pub columns: CsvColumns,
    pub window: usize,
    pub stride: usize,
    pub degrees: Vec<f64>,
    pub alpha: f64,
    pub d_max: usize,
    pub max_lag: Option<usize>,
    pub bonferroni: bool,
    pub min_observations: usize,
    pub periods: Vec<PeriodSpec>,
    pub endpoint: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            start: NaiveDate::from_ymd_opt(2018, 6, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2021, 6, 1).expect("valid date"),
            groups: vec![Group::new("stock", &US_STOCKS), Group::new("commodity", &COMMODITIES)],
            columns: CsvColumns::default(),
            window: 30,
            stride: 1,
            degrees: vec![1.0, 2.0],
            alpha: 0.05,
            d_max: 2,
            max_lag: None,
            bonferroni: false,
            min_observations: 30,
            periods: PeriodSpec::covid_defaults(),
            endpoint: YAHOO_ENDPOINT.to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// US stocks and commodities.
    Markets,
    /// Eleven GICS sectors, five stocks each.
    Sectors,
}

impl RunConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Markets => Self::default(),
            Preset::Sectors => Self {
                groups: SECTORS.iter().map(|(name, s)| Group::new(name, s)).collect(),
                degrees: vec![2.0],
                ..Self::default()
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.start >= self.end {
            return bad(format!("start {} must precede end {}", self.start, self.end));
        }
        if self.groups.is_empty() {
            return bad("no instrument groups configured".into());
        }
        for g in &self.groups {
            if g.symbols.is_empty() {
                return bad(format!("group `{}` has no symbols", g.name));
            }
        }
        let mut names: Vec<&str> = self.groups.iter().map(|g| g.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("group names must be unique".into());
        }
        WindowSpec::new(self.window, self.stride).map_err(CliError::Core)?;
        if self.degrees.is_empty() || self.degrees.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return bad(format!("degrees must be >= 1, got {:?}", self.degrees));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.max_lag == Some(0) {
            return bad("max lag must be >= 1".into());
        }
        Ok(())
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            size: self.window,
            stride: self.stride,
        }
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            alpha: self.alpha,
            d_max: self.d_max,
            max_lag: self.max_lag,
            bonferroni: self.bonferroni,
            min_observations: self.min_observations,
        }
    }

    pub fn symbol_path(&self, symbol: &str) -> PathBuf {
        self.data_dir.join(format!("{symbol}.csv"))
    }

    /// SHA-256 of the canonical JSON of every setting except `data_dir`.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.data_dir = PathBuf::new();
        let json = serde_json::to_vec(&hashed).expect("config serializes");
        hex(&Sha256::digest(json))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// File-name-safe lower-case form of a group name.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
        RunConfig::preset(Preset::Sectors).validate().unwrap();
    }

    #[test]
    fn hash_ignores_data_dir_but_not_window() {
        let a = RunConfig::default();
        let b = RunConfig {
            data_dir: "/elsewhere".into(),
            ..a.clone()
        };
        let c = RunConfig { window: 31, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn partial_config_uses_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"window": 20}"#).unwrap();
        assert_eq!(c.window, 20);
        assert_eq!(c.stride, 1);
        assert!(serde_json::from_str::<RunConfig>(r#"{"windw": 20}"#).is_err());
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Consumer Discretionary"), "consumer_discretionary");
        assert_eq!(slug("IT"), "it");
        assert_eq!(slug("a--b"), "a_b");
    }
}
