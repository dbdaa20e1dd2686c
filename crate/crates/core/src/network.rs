//! Pairwise Granger classification and the resulting causal network.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::econometrics::{
    default_max_lag, ensure_stationary, fpe_select, granger_test, GrangerResult,
};
use crate::error::{Error, Result};
use crate::market_data::DATE_FORMAT;
use crate::pipeline::WdSeries;

/// A labeled half-open date range `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl PeriodSpec {
    pub fn new(label: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        let label = label.into();
        if start >= end {
            return Err(Error::Validation(format!(
                "period `{label}` must start before it ends ({start} >= {end})"
            )));
        }
        Ok(Self { label, start, end })
    }

    /// Parses `label:YYYY-MM-DD:YYYY-MM-DD`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.rsplitn(3, ':');
        let (end, start, label) = match (parts.next(), parts.next(), parts.next()) {
            (Some(e), Some(s), Some(l)) => (e, s, l),
            _ => {
                return Err(Error::Validation(format!(
                    "period `{text}` must look like label:YYYY-MM-DD:YYYY-MM-DD"
                )))
            }
        };
        let date = |s: &str| {
            NaiveDate::parse_from_str(s, DATE_FORMAT)
                .map_err(|e| Error::Validation(format!("period `{text}`: bad date `{s}`: {e}")))
        };
        Self::new(label, date(start)?, date(end)?)
    }

    /// Pre-crash, crash and post-crash years around the COVID-19 crash.
    pub fn covid_defaults() -> Vec<Self> {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        vec![
            Self::new("pre-crash", d(2018, 6, 1), d(2019, 6, 1)).expect("ordered"),
            Self::new("crash", d(2019, 6, 1), d(2020, 6, 1)).expect("ordered"),
            Self::new("post-crash", d(2020, 6, 1), d(2021, 6, 1)).expect("ordered"),
        ]
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    AToB,
    BToA,
    Bidirectional,
    Independent,
}

impl RelationKind {
    pub fn swapped(self) -> Self {
        match self {
            RelationKind::AToB => RelationKind::BToA,
            RelationKind::BToA => RelationKind::AToB,
            other => other,
        }
    }
}

/// `res_ab` tests a -> b, `res_ba` tests b -> a.
pub fn classify_pair(res_ab: &GrangerResult, res_ba: &GrangerResult, alpha: f64) -> RelationKind {
    classify_p_values(res_ab.p_value, res_ba.p_value, alpha)
}

pub fn classify_p_values(p_ab: f64, p_ba: f64, alpha: f64) -> RelationKind {
    match (p_ab < alpha, p_ba < alpha) {
        (true, true) => RelationKind::Bidirectional,
        (true, false) => RelationKind::AToB,
        (false, true) => RelationKind::BToA,
        (false, false) => RelationKind::Independent,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub a: String,
    pub b: String,
    pub kind: RelationKind,
    /// Differencing order applied to both series.
    pub order: usize,
    /// At least one series still had a unit root at the maximum order.
    pub nonstationary: bool,
    pub n_obs: usize,
    pub a_to_b: GrangerResult,
    pub b_to_a: GrangerResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalNetwork {
    pub nodes: Vec<String>,
    pub edges: Vec<Relation>,
    pub period: PeriodSpec,
    /// Level the relations were classified at (after any correction).
    pub alpha: f64,
    /// Metric label, e.g. `WD_2`.
    #[serde(default)]
    pub metric: String,
}

impl CausalNetwork {
    fn validate(&self) -> Result<()> {
        let known: HashSet<&str> = self.nodes.iter().map(String::as_str).collect();
        let mut seen = HashSet::new();
        for e in &self.edges {
            if !known.contains(e.a.as_str()) || !known.contains(e.b.as_str()) {
                return Err(Error::Validation(format!(
                    "edge {}-{} references an unknown node",
                    e.a, e.b
                )));
            }
            let key = if e.a <= e.b { (&e.a, &e.b) } else { (&e.b, &e.a) };
            if e.a == e.b || !seen.insert(key) {
                return Err(Error::Validation(format!(
                    "duplicate or self relation {}-{}",
                    e.a, e.b
                )));
            }
            if classify_pair(&e.a_to_b, &e.b_to_a, self.alpha) != e.kind {
                return Err(Error::Validation(format!(
                    "relation {}-{} is labeled {:?} but its p-values say otherwise",
                    e.a, e.b, e.kind
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub d_max: usize,
    /// `None` uses `min(10, floor(T/10))` per pair.
    pub max_lag: Option<usize>,
    /// Divide `alpha` by the number of pairs.
    pub bonferroni: bool,
    /// Fewest in-period observations a series needs to be analysed.
    pub min_observations: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            d_max: 2,
            max_lag: None,
            bonferroni: false,
            min_observations: 30,
        }
    }
}

fn analyse_pair(
    a: &WdSeries,
    b: &WdSeries,
    period: &PeriodSpec,
    config: &AnalysisConfig,
    alpha: f64,
) -> Result<Relation> {
    let sa = a.slice(period.start, period.end);
    let sb = b.slice(period.start, period.end);
    // pair on common dates
    let in_b: HashSet<NaiveDate> = sb.dates().iter().copied().collect();
    let b_index: BTreeMap<NaiveDate, f64> =
        sb.dates().iter().copied().zip(sb.values().iter().copied()).collect();
    let (xa, xb): (Vec<f64>, Vec<f64>) = sa
        .dates()
        .iter()
        .zip(sa.values())
        .filter(|(d, _)| in_b.contains(d))
        .map(|(d, v)| (*v, b_index[d]))
        .unzip();

    let stationarity = ensure_stationary(&[&xa, &xb], config.alpha, config.d_max)?;
    let ya = &stationarity.series[0].values;
    let yb = &stationarity.series[1].values;
    let max_lag = config.max_lag.unwrap_or_else(|| default_max_lag(ya.len()));
    let lag = fpe_select(yb, ya, max_lag)?;
    let a_to_b = granger_test(yb, ya, lag)?.labeled(&a.label, &b.label);
    let b_to_a = granger_test(ya, yb, lag)?.labeled(&b.label, &a.label);
    Ok(Relation {
        a: a.label.clone(),
        b: b.label.clone(),
        kind: classify_pair(&a_to_b, &b_to_a, alpha),
        order: stationarity.order,
        nonstationary: !stationarity.all_stationary(),
        n_obs: xa.len(),
        a_to_b,
        b_to_a,
    })
}

/// Tests every unordered pair of series (named by their labels) over `period`.
///
/// Per pair: slice to the period, difference both to a common stationary
/// order, pick one lag by FPE, run both directional F-tests and classify.
/// Pairs are ordered by the input order of their nodes.
pub fn pairwise_analysis(
    series: &[WdSeries],
    period: &PeriodSpec,
    config: &AnalysisConfig,
) -> Result<CausalNetwork> {
    if series.len() < 2 {
        return Err(Error::Validation("pairwise analysis needs at least two series".into()));
    }
    let mut labels = HashSet::new();
    if let Some(dup) = series.iter().find(|s| !labels.insert(s.label.as_str())) {
        return Err(Error::Validation(format!("duplicate node label `{}`", dup.label)));
    }
    for s in series {
        let n = s.slice(period.start, period.end).len();
        if n < config.min_observations {
            return Err(Error::Coverage {
                node: s.label.clone(),
                period: period.label.clone(),
                message: format!(
                    "{n} observations in [{}, {}), need {}",
                    period.start, period.end, config.min_observations
                ),
            });
        }
    }

    let pairs: Vec<(usize, usize)> = (0..series.len())
        .flat_map(|i| ((i + 1)..series.len()).map(move |j| (i, j)))
        .collect();
    let alpha = if config.bonferroni {
        config.alpha / pairs.len() as f64
    } else {
        config.alpha
    };
    let edges = pairs
        .par_iter()
        .map(|&(i, j)| analyse_pair(&series[i], &series[j], period, config, alpha))
        .collect::<Result<Vec<_>>>()?;
    let metric = format!("WD_{}", series[0].degree);
    Ok(CausalNetwork {
        nodes: series.iter().map(|s| s.label.clone()).collect(),
        edges,
        period: period.clone(),
        alpha,
        metric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeCounts {
    pub cause: usize,
    pub effect: usize,
    pub bidirectional: usize,
}

impl NodeCounts {
    pub fn total(&self) -> usize {
        self.cause + self.effect + self.bidirectional
    }
}

/// Per node: relations where it is the sole cause, the sole effect, or one
/// end of a bidirectional relation. Follows `net.nodes` order.
pub fn relation_counts(net: &CausalNetwork) -> Vec<(String, NodeCounts)> {
    let mut counts: BTreeMap<&str, NodeCounts> = BTreeMap::new();
    for e in &net.edges {
        let (cause, effect) = match e.kind {
            RelationKind::AToB => (&e.a, &e.b),
            RelationKind::BToA => (&e.b, &e.a),
            RelationKind::Bidirectional => {
                counts.entry(&e.a).or_default().bidirectional += 1;
                counts.entry(&e.b).or_default().bidirectional += 1;
                continue;
            }
            RelationKind::Independent => continue,
        };
        counts.entry(cause).or_default().cause += 1;
        counts.entry(effect).or_default().effect += 1;
    }
    net.nodes
        .iter()
        .map(|n| (n.clone(), counts.get(n.as_str()).copied().unwrap_or_default()))
        .collect()
}

const PALETTE: [&str; 5] = ["#4575b4", "#91bfdb", "#ffffbf", "#fc8d59", "#d73027"];

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph. Node fill goes from blue (few relations) to red (many).
pub fn export_dot(net: &CausalNetwork) -> String {
    let counts = relation_counts(net);
    let max_total = counts.iter().map(|(_, c)| c.total()).max().unwrap_or(0);
    let mut out = String::new();
    let title = format!("{} {}", net.metric, net.period.label);
    let _ = writeln!(out, "digraph {} {{", dot_id(title.trim()));
    let _ = writeln!(out, "  node [shape=circle, style=filled];");
    for (node, c) in &counts {
        let bucket = if max_total == 0 {
            0
        } else {
            (c.total() * (PALETTE.len() - 1) + max_total / 2) / max_total
        };
        let _ = writeln!(
            out,
            "  {} [fillcolor=\"{}\", tooltip=\"cause {} / effect {} / bidirectional {}\"];",
            dot_id(node),
            PALETTE[bucket],
            c.cause,
            c.effect,
            c.bidirectional
        );
    }
    for e in &net.edges {
        let line = match e.kind {
            RelationKind::AToB => format!("  {} -> {};", dot_id(&e.a), dot_id(&e.b)),
            RelationKind::BToA => format!("  {} -> {};", dot_id(&e.b), dot_id(&e.a)),
            RelationKind::Bidirectional => {
                format!("  {} -> {} [dir=both];", dot_id(&e.a), dot_id(&e.b))
            }
            RelationKind::Independent => continue,
        };
        let _ = writeln!(out, "{line}");
    }
    out.push_str("}\n");
    out
}

pub fn export_json(net: &CausalNetwork) -> Result<String> {
    let mut s = serde_json::to_string_pretty(net)?;
    s.push('\n');
    Ok(s)
}

pub fn import_json(text: &str) -> Result<CausalNetwork> {
    let net: CausalNetwork = serde_json::from_str(text)?;
    net.validate()?;
    Ok(net)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// `node,unidirectional_cause,unidirectional_effect,bidirectional` rows.
pub fn write_counts_csv<W: Write>(net: &CausalNetwork, writer: W) -> Result<()> {
    let mut wtr = csv_writer(writer);
    wtr.write_record([
        "period",
        "node",
        "unidirectional_cause",
        "unidirectional_effect",
        "bidirectional",
    ])?;
    for (node, c) in relation_counts(net) {
        wtr.write_record([
            net.period.label.clone(),
            node,
            c.cause.to_string(),
            c.effect.to_string(),
            c.bidirectional.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// One row per tested direction:
/// `period,metric,direction,lag,order,f_statistic,p_value,decision`.
pub fn write_granger_table_csv<W: Write>(nets: &[CausalNetwork], writer: W) -> Result<()> {
    let mut wtr = csv_writer(writer);
    wtr.write_record([
        "period",
        "metric",
        "direction",
        "lag",
        "order",
        "f_statistic",
        "p_value",
        "decision",
    ])?;
    for net in nets {
        for e in &net.edges {
            for r in [&e.a_to_b, &e.b_to_a] {
                let decision = if r.significant(net.alpha) {
                    "reject"
                } else {
                    "accept"
                };
                wtr.write_record([
                    net.period.label.clone(),
                    net.metric.clone(),
                    format!("{} -> {}", r.cause, r.effect),
                    r.lag.to_string(),
                    e.order.to_string(),
                    r.f_statistic.to_string(),
                    r.p_value.to_string(),
                    decision.to_owned(),
                ])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
