use std::cell::{OnceCell, RefCell};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::Days;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use topocausal::econometrics::{adf_test, difference, pp_test, UnitRootResult};
use topocausal::fetch::fetch_prices;
use topocausal::market_data::{
    align, load_price_csv_with, log_returns, point_cloud, write_price_csv, PointCloud,
    PriceMatrix, PriceTable, DATE_FORMAT,
};
use topocausal::network::{
    export_dot, export_json, pairwise_analysis, write_counts_csv, write_granger_table_csv,
    CausalNetwork, PeriodSpec,
};
use topocausal::pipeline::{crash_summary, wd_series_cross, wd_series_self, WdSeries};
use topocausal::plot::line_chart_svg;
use topocausal::synth::{CrashFixture, RNG_NAME};

use crate::config::{hex, slug, Group, RunConfig};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn degree_tag(p: f64) -> String {
    format!("p{p}").replace('.', "_")
}

pub struct Context {
    cfg: RunConfig,
    hash: String,
    dir: PathBuf,
    data_hash: OnceCell<String>,
    clouds: OnceCell<Vec<PointCloud>>,
    written: RefCell<BTreeMap<String, String>>,
}

impl Context {
    pub fn new(cfg: RunConfig, out_root: &Path) -> Result<Self> {
        let hash = cfg.hash();
        let dir = out_root.join(&hash[..12]);
        Ok(Self {
            cfg,
            hash,
            dir,
            data_hash: OnceCell::new(),
            clouds: OnceCell::new(),
            written: RefCell::new(BTreeMap::new()),
        })
    }

    fn load_table(&self, symbol: &str) -> Result<PriceTable> {
        let t = load_price_csv_with(self.cfg.symbol_path(symbol), symbol, &self.cfg.columns)?;
        let rows = t
            .rows()
            .iter()
            .filter(|r| r.date >= self.cfg.start && r.date < self.cfg.end)
            .copied()
            .collect();
        Ok(PriceTable::new(symbol, rows)?)
    }

    fn group_prices(&self, g: &Group) -> Result<PriceMatrix> {
        let tables = g
            .symbols
            .iter()
            .map(|s| self.load_table(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(align(&tables)?)
    }

    fn clouds(&self) -> Result<&[PointCloud]> {
        if self.clouds.get().is_none() {
            let clouds = self
                .cfg
                .groups
                .iter()
                .map(|g| Ok(point_cloud(&log_returns(&self.group_prices(g)?)?)))
                .collect::<Result<Vec<_>>>()?;
            let _ = self.clouds.set(clouds);
        }
        Ok(self.clouds.get().expect("just set"))
    }

    /// SHA-256 over every configured input file, in group and symbol order.
    fn data_hash(&self) -> Result<&str> {
        if self.data_hash.get().is_none() {
            let mut h = Sha256::new();
            for g in &self.cfg.groups {
                for s in &g.symbols {
                    let path = self.cfg.symbol_path(s);
                    let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
                    h.update(s.as_bytes());
                    h.update([0]);
                    h.update(Sha256::digest(&bytes));
                }
            }
            let _ = self.data_hash.set(hex(&h.finalize()));
        }
        Ok(self.data_hash.get().expect("just set"))
    }

    fn header(&self) -> Result<Vec<String>> {
        Ok(vec![
            format!("config_hash={}", self.hash),
            format!("data_hash={}", self.data_hash()?),
        ])
    }

    fn commented_csv(&self, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        for line in self.header()? {
            writeln!(buf, "# {line}").expect("write to memory");
        }
        body(&mut buf)?;
        Ok(buf)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written
            .borrow_mut()
            .insert(name.to_owned(), hex(&Sha256::digest(bytes)));
        println!("wrote {}", path.display());
        Ok(())
    }

    fn group_index(&self, name: &str) -> Result<usize> {
        self.cfg
            .groups
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| CliError::Config(format!("unknown group `{name}`")))
    }

    fn fetch(&self) -> Result<()> {
        let mut symbols: Vec<String> = Vec::new();
        for s in self.cfg.groups.iter().flat_map(|g| &g.symbols) {
            if !symbols.contains(s) {
                symbols.push(s.clone());
            }
        }
        let dir = &self.cfg.data_dir;
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let outcome = fetch_prices(
            &symbols,
            self.cfg.start,
            self.cfg.end,
            &self.cfg.endpoint,
            &self.cfg.columns,
        );
        for t in &outcome.tables {
            let path = self.cfg.symbol_path(t.symbol());
            let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            write_price_csv(t, file)?;
            println!("fetched {} ({} rows)", t.symbol(), t.len());
        }
        for f in &outcome.failures {
            eprintln!("warning: {}: {}", f.symbol, f.error);
        }
        if outcome.failures.is_empty() {
            Ok(())
        } else {
            let names: Vec<&str> = outcome.failures.iter().map(|f| f.symbol.as_str()).collect();
            Err(CliError::Fetch(names.join(", ")))
        }
    }

    pub fn ingest(&self, fetch: bool) -> Result<()> {
        if fetch {
            self.fetch()?;
        }
        for g in &self.cfg.groups {
            let prices = self.group_prices(g)?;
            let returns = log_returns(&prices)?;
            let wide = |symbols: &[String], dates: &[chrono::NaiveDate], row: &dyn Fn(usize) -> Vec<f64>| {
                self.commented_csv(|buf| {
                    let mut w = csv_writer(buf);
                    let mut head = vec!["date".to_owned()];
                    head.extend(symbols.iter().cloned());
                    w.write_record(&head).map_err(topocausal::Error::from)?;
                    for (j, d) in dates.iter().enumerate() {
                        let mut rec = vec![d.format(DATE_FORMAT).to_string()];
                        rec.extend(row(j).iter().map(f64::to_string));
                        w.write_record(&rec).map_err(topocausal::Error::from)?;
                    }
                    w.flush().map_err(|e| CliError::io(Path::new("<memory>"), e))?;
                    Ok(())
                })
            };
            let tag = slug(&g.name);
            self.write(
                &format!("prices_{tag}.csv"),
                &wide(prices.symbols(), prices.dates(), &|j| prices.row(j).to_vec())?,
            )?;
            self.write(
                &format!("returns_{tag}.csv"),
                &wide(returns.symbols(), returns.dates(), &|j| returns.row(j).to_vec())?,
            )?;
            println!(
                "{}: {} instruments, {} aligned days ({} to {})",
                g.name,
                prices.n_instruments(),
                prices.n_days(),
                prices.dates()[0],
                prices.dates()[prices.n_days() - 1]
            );
        }
        Ok(())
    }

    /// `[degree][group]` self-mode series, labeled by group name.
    fn compute_series(&self) -> Result<Vec<Vec<WdSeries>>> {
        let clouds = self.clouds()?;
        self.cfg
            .degrees
            .iter()
            .map(|&p| {
                clouds
                    .iter()
                    .zip(&self.cfg.groups)
                    .map(|(c, g)| {
                        Ok(wd_series_self(c, self.cfg.window_spec(), p)?.with_label(&g.name))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn wdseries(&self) -> Result<Vec<Vec<WdSeries>>> {
        let all = self.compute_series()?;
        let header = self.header()?;
        let mut summary = self.commented_csv(|buf| {
            csv_writer(buf)
                .write_record(["series", "degree", "mean", "max", "max_date"])
                .map_err(topocausal::Error::from)?;
            Ok(())
        })?;
        for (p, per_group) in self.cfg.degrees.iter().zip(&all) {
            for s in per_group {
                let mut buf = Vec::new();
                s.write_csv(&mut buf, &header)?;
                self.write(&format!("wd_{}_{}.csv", slug(&s.label), degree_tag(*p)), &buf)?;
                let sum = crash_summary(s)?;
                let mut w = csv_writer(&mut summary);
                w.write_record([
                    s.label.clone(),
                    p.to_string(),
                    sum.mean.to_string(),
                    sum.max.to_string(),
                    sum.max_date.format(DATE_FORMAT).to_string(),
                ])
                .map_err(topocausal::Error::from)?;
                w.flush().map_err(|e| CliError::io(Path::new("<memory>"), e))?;
                drop(w);
                println!(
                    "{} WD_{p}: mean {:.6}, max {:.6} on {}",
                    s.label, sum.mean, sum.max, sum.max_date
                );
            }
        }
        self.write("summary.csv", &summary)?;
        Ok(all)
    }

    pub fn compare(&self, a: Option<&str>, b: Option<&str>) -> Result<()> {
        if self.cfg.groups.len() < 2 && (a.is_none() || b.is_none()) {
            return Err(CliError::Config("compare needs two groups".into()));
        }
        let ia = a.map_or(Ok(0), |n| self.group_index(n))?;
        let ib = b.map_or(Ok(1), |n| self.group_index(n))?;
        let (ga, gb) = (&self.cfg.groups[ia], &self.cfg.groups[ib]);
        let tables = ga
            .symbols
            .iter()
            .chain(&gb.symbols)
            .map(|s| self.load_table(s))
            .collect::<Result<Vec<_>>>()?;
        let joint = align(&tables)?;
        let na = ga.symbols.len();
        let cols_a: Vec<usize> = (0..na).collect();
        let cols_b: Vec<usize> = (na..na + gb.symbols.len()).collect();
        let ca = point_cloud(&log_returns(&joint.select_columns(&cols_a)?)?);
        let cb = point_cloud(&log_returns(&joint.select_columns(&cols_b)?)?);
        let header = self.header()?;
        for &p in &self.cfg.degrees {
            let label = format!("{}~{}", ga.name, gb.name);
            let s = wd_series_cross(&ca, &cb, self.cfg.window_spec(), p)?.with_label(label);
            let mut buf = Vec::new();
            s.write_csv(&mut buf, &header)?;
            self.write(
                &format!("cross_{}_{}_{}.csv", slug(&ga.name), slug(&gb.name), degree_tag(p)),
                &buf,
            )?;
            let sum = crash_summary(&s)?;
            println!("{} WD_{p}: mean {:.6}, max {:.6} on {}", s.label, sum.mean, sum.max, sum.max_date);
        }
        Ok(())
    }

    fn stationarity_rows(&self, all: &[Vec<WdSeries>]) -> Result<Vec<u8>> {
        self.commented_csv(|buf| {
            let mut w = csv_writer(buf);
            w.write_record([
                "period", "series", "degree", "order", "test", "statistic", "p_value", "lags",
                "n_obs", "reject_unit_root",
            ])
            .map_err(topocausal::Error::from)?;
            for period in &self.cfg.periods {
                for (p, per_group) in self.cfg.degrees.iter().zip(all) {
                    for s in per_group {
                        let sliced = s.slice(period.start, period.end);
                        for order in 0..=self.cfg.d_max {
                            let values = difference(sliced.values(), order).ok();
                            let tests: [(&str, Option<UnitRootResult>); 2] = [
                                ("ADF", values.as_deref().and_then(|v| adf_test(v).ok())),
                                ("PP", values.as_deref().and_then(|v| pp_test(v).ok())),
                            ];
                            for (name, r) in tests {
                                let na = || "NA".to_owned();
                                w.write_record([
                                    period.label.clone(),
                                    s.label.clone(),
                                    p.to_string(),
                                    order.to_string(),
                                    name.to_owned(),
                                    r.map_or_else(na, |r| r.statistic.to_string()),
                                    r.map_or_else(na, |r| r.p_value.to_string()),
                                    r.map_or_else(na, |r| r.lags.to_string()),
                                    r.map_or_else(na, |r| r.n_obs.to_string()),
                                    r.is_some_and(|r| r.rejects_unit_root(self.cfg.alpha))
                                        .to_string(),
                                ])
                                .map_err(topocausal::Error::from)?;
                            }
                        }
                    }
                }
            }
            w.flush().map_err(|e| CliError::io(Path::new("<memory>"), e))?;
            Ok(())
        })
    }

    pub fn stationarity(&self) -> Result<()> {
        let all = self.compute_series()?;
        let rows = self.stationarity_rows(&all)?;
        self.write("stationarity.csv", &rows)
    }

    fn networks(&self, all: &[Vec<WdSeries>]) -> Result<Vec<(f64, Vec<CausalNetwork>)>> {
        if self.cfg.groups.len() < 2 {
            return Err(CliError::Config("causality needs at least two groups".into()));
        }
        self.cfg
            .degrees
            .iter()
            .zip(all)
            .map(|(&p, series)| {
                let nets = self
                    .cfg
                    .periods
                    .iter()
                    .map(|period| Ok(pairwise_analysis(series, period, &self.cfg.analysis())?))
                    .collect::<Result<Vec<_>>>()?;
                Ok((p, nets))
            })
            .collect()
    }

    fn write_causality(&self, nets: &[(f64, Vec<CausalNetwork>)]) -> Result<()> {
        for (p, per_period) in nets {
            let tag = degree_tag(*p);
            let table = self.commented_csv(|buf| Ok(write_granger_table_csv(per_period, buf)?))?;
            self.write(&format!("granger_{tag}.csv"), &table)?;
            for net in per_period {
                let counts = self.commented_csv(|buf| Ok(write_counts_csv(net, buf)?))?;
                self.write(&format!("counts_{tag}_{}.csv", slug(&net.period.label)), &counts)?;
                for e in &net.edges {
                    println!(
                        "WD_{p} {}: {} ~ {}: {:?} (lag {}, p {:.4} / {:.4})",
                        net.period.label,
                        e.a,
                        e.b,
                        e.kind,
                        e.a_to_b.lag,
                        e.a_to_b.p_value,
                        e.b_to_a.p_value
                    );
                }
            }
        }
        Ok(())
    }

    pub fn causality(&self) -> Result<Vec<(f64, Vec<CausalNetwork>)>> {
        let all = self.compute_series()?;
        let nets = self.networks(&all)?;
        self.write_causality(&nets)?;
        Ok(nets)
    }

    fn write_networks(&self, nets: &[(f64, Vec<CausalNetwork>)]) -> Result<()> {
        for (p, per_period) in nets {
            let tag = degree_tag(*p);
            for net in per_period {
                let base = format!("network_{tag}_{}", slug(&net.period.label));
                let dot = format!("// config_hash={}\n{}", self.hash, export_dot(net));
                self.write(&format!("{base}.dot"), dot.as_bytes())?;
                let wrapped = json!({
                    "config_hash": self.hash,
                    "data_hash": self.data_hash()?,
                    "network": serde_json::from_str::<serde_json::Value>(&export_json(net)?)
                        .map_err(topocausal::Error::from)?,
                });
                self.write(&format!("{base}.json"), &pretty(&wrapped)?)?;
            }
        }
        Ok(())
    }

    pub fn network(&self) -> Result<()> {
        let all = self.compute_series()?;
        let nets = self.networks(&all)?;
        self.write_networks(&nets)
    }

    pub fn report(&self) -> Result<()> {
        self.ingest(false)?;
        let all = self.wdseries()?;
        if self.cfg.groups.len() >= 2 {
            self.compare(None, None)?;
        }
        self.write("stationarity.csv", &self.stationarity_rows(&all)?)?;
        if self.cfg.groups.len() >= 2 {
            let nets = self.networks(&all)?;
            self.write_causality(&nets)?;
            self.write_networks(&nets)?;
        }
        let band = self.cfg.periods.iter().find(|p| p.label == "crash");
        for (p, per_group) in self.cfg.degrees.iter().zip(&all) {
            let refs: Vec<&WdSeries> = per_group.iter().collect();
            let svg = line_chart_svg(&format!("WD_{p} to the diagonal"), &refs, band);
            let svg = format!("<!-- config_hash={} -->\n{svg}", self.hash);
            self.write(&format!("plot_{}.svg", degree_tag(*p)), svg.as_bytes())?;
        }
        self.write_metadata()
    }

    fn write_metadata(&self) -> Result<()> {
        let artifacts: Vec<_> = self
            .written
            .borrow()
            .iter()
            .map(|(file, sha)| json!({ "file": file, "sha256": sha }))
            .collect();
        let meta = json!({
            "config_hash": self.hash,
            "data_hash": self.data_hash()?,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "rng": RNG_NAME,
            "config": self.cfg,
            "close_columns": self.cfg.columns.close,
            "summary_scope": "full series",
            "artifacts": artifacts,
        });
        self.write("metadata.json", &pretty(&meta)?)
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(topocausal::Error::from)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes a synthetic crash panel as per-symbol CSVs plus `config.json` and
/// `synth.json` into `dir`.
pub fn synth(dir: &Path, seed: u64, window: Option<usize>) -> Result<()> {
    let fixture = CrashFixture {
        seed,
        ..CrashFixture::default()
    };
    let data = fixture.generate()?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for t in data.prices.to_tables() {
        let path = dir.join(format!("{}.csv", t.symbol()));
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_price_csv(&t, file)?;
    }
    let symbols = fixture.symbols();
    let half = symbols.len() / 2;
    let r = data.returns.dates();
    let pd = data.prices.dates();
    let cut_a = r[fixture.burst_start.saturating_sub(40)];
    let cut_b = r[(fixture.burst_start + fixture.burst_len + 40).min(r.len() - 1)];
    let end = pd[pd.len() - 1] + Days::new(1);
    let cfg = RunConfig {
        data_dir: dir.to_owned(),
        start: pd[0],
        end,
        groups: vec![
            Group {
                name: "left".into(),
                symbols: symbols[..half].to_vec(),
            },
            Group {
                name: "right".into(),
                symbols: symbols[half..].to_vec(),
            },
        ],
        window: window.unwrap_or(30),
        periods: vec![
            PeriodSpec::new("before", pd[0], cut_a)?,
            PeriodSpec::new("crash", cut_a, cut_b)?,
            PeriodSpec::new("after", cut_b, end)?,
        ],
        ..RunConfig::default()
    };
    cfg.validate()?;
    fs::write(dir.join("config.json"), pretty(&cfg)?)
        .map_err(|e| CliError::io(&dir.join("config.json"), e))?;
    let info = json!({
        "rng": RNG_NAME,
        "fixture": fixture,
        "burst_start": data.burst.0,
        "burst_end": data.burst.1,
    });
    fs::write(dir.join("synth.json"), pretty(&info)?)
        .map_err(|e| CliError::io(&dir.join("synth.json"), e))?;
    println!(
        "wrote {} instruments x {} days to {}; burst {} to {}",
        symbols.len(),
        pd.len(),
        dir.display(),
        data.burst.0,
        data.burst.1
    );
    Ok(())
}
