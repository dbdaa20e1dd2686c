//! Minimal SVG line charts for WD series.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::pipeline::WdSeries;
use crate::network::PeriodSpec;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders one or more series on a shared date axis. `band` shades a period,
/// typically the crash window. Ticks are labeled `mm-yyyy` at month starts.
pub fn line_chart_svg(title: &str, series: &[&WdSeries], band: Option<&PeriodSpec>) -> String {
    let all_dates = series.iter().flat_map(|s| s.dates().iter().copied());
    let (Some(first), Some(last)) = (all_dates.clone().min(), all_dates.max()) else {
        return format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\"><text x=\"10\" y=\"20\">{}: no data</text></svg>\n",
            escape(title)
        );
    };
    let values = series.iter().flat_map(|s| s.values().iter().copied()).filter(|v| v.is_finite());
    let y_max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let y_min = values.fold(f64::INFINITY, f64::min).min(0.0);
    let y_max = if y_max > y_min { y_max } else { y_min + 1.0 };

    let span = (last - first).num_days().max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |d: NaiveDate| MARGIN_LEFT + (d - first).num_days() as f64 / span * plot_w;
    let y = |v: f64| MARGIN_TOP + (1.0 - (v - y_min) / (y_max - y_min)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN_LEFT}\" y=\"18\" font-size=\"14\">{}</text>",
        escape(title)
    );

    if let Some(p) = band {
        let lo = p.start.max(first);
        let hi = p.end.min(last);
        if lo < hi {
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{MARGIN_TOP}\" width=\"{:.2}\" height=\"{plot_h}\" fill=\"#f4cccc\" opacity=\"0.6\"/>",
                x(lo),
                x(hi) - x(lo)
            );
        }
    }

    let bottom = MARGIN_TOP + plot_h;
    let _ = writeln!(
        out,
        "<path d=\"M{MARGIN_LEFT},{MARGIN_TOP}V{bottom}H{}\" stroke=\"black\" fill=\"none\"/>",
        MARGIN_LEFT + plot_w
    );

    let months = month_starts(first, last);
    let step = months.len().div_ceil(12).max(1);
    for d in months.iter().step_by(step) {
        let px = x(*d);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{bottom}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:02}-{}</text>",
            bottom + 4.0,
            bottom + 18.0,
            d.month(),
            d.year()
        );
    }
    for i in 0..=4 {
        let v = y_min + (y_max - y_min) * i as f64 / 4.0;
        let py = y(v);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.4}</text>",
            MARGIN_LEFT - 4.0,
            MARGIN_LEFT - 6.0,
            py + 4.0
        );
    }

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, (date, v)) in s.dates().iter().zip(s.values()).enumerate() {
            if !v.is_finite() {
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { 'M' } else { 'L' }, x(*date), y(*v));
        }
        let _ = writeln!(
            out,
            "<path d=\"{d}\" stroke=\"{color}\" stroke-width=\"1.2\" fill=\"none\"/>"
        );
        let ly = MARGIN_TOP + 14.0 * (k as f64 + 1.0);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{ly:.2}\" text-anchor=\"end\" fill=\"{color}\">{}</text>",
            WIDTH - MARGIN_RIGHT - 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn month_starts(first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let mut d = NaiveDate::from_ymd_opt(first.year(), first.month(), 1).expect("valid month start");
    if d < first {
        d = d.checked_add_months(chrono::Months::new(1)).expect("date in range");
    }
    while d <= last {
        out.push(d);
        d = d.checked_add_months(chrono::Months::new(1)).expect("date in range");
    }
    out
}
