//! CSV rows and SVG charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::base::watts_to_dbm;
use crate::schemes::{Scheme, SchemeConfig};
use crate::solvers::SweepRow;

use super::CliError;

pub const SWEEP_HEADER: [&str; 18] = [
    "n",
    "P_dbm",
    "p1",
    "alpha",
    "beta",
    "scheme",
    "feasible",
    "l1",
    "l2",
    "p_r1_w",
    "p_r2_w",
    "eta1",
    "eta2",
    "p_fa",
    "p_miss",
    "energy_wsamples",
    "p_continue",
    "savings_vs_bmac_pct",
];

/// Scientific notation with 10 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Receiver settings of a result in CSV terms. Baselines fill the first
/// power and threshold. An AdaSense result that skips its first phase
/// reports `l1 = 0` and the single test as phase two.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConfigColumns {
    pub l1: Option<usize>,
    pub l2: Option<usize>,
    pub p_r1: Option<f64>,
    pub p_r2: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
}

impl ConfigColumns {
    pub fn of(scheme: Scheme, config: &SchemeConfig) -> Self {
        match (scheme, config) {
            (Scheme::AdaSense, SchemeConfig::SinglePhase(c)) => Self {
                l1: Some(0),
                l2: Some(c.n),
                p_r2: Some(c.receiver_power_watts),
                eta2: Some(c.threshold),
                ..Self::default()
            },
            (_, SchemeConfig::SinglePhase(c)) => {
                Self { p_r1: Some(c.receiver_power_watts), eta1: Some(c.threshold), ..Self::default() }
            }
            (_, SchemeConfig::Bmac(c)) => {
                Self { p_r1: Some(c.receiver_power_watts), eta1: Some(c.threshold), ..Self::default() }
            }
            (_, SchemeConfig::AdaSense(c)) => Self {
                l1: Some(c.l1),
                l2: Some(c.l2),
                p_r1: Some(c.p_r1),
                p_r2: Some(c.p_r2),
                eta1: Some(c.eta1),
                eta2: Some(c.eta2),
            },
        }
    }

    pub fn record(&self) -> [String; 6] {
        [
            opt_int(self.l1),
            opt_int(self.l2),
            opt_num(self.p_r1),
            opt_num(self.p_r2),
            opt_num(self.eta1),
            opt_num(self.eta2),
        ]
    }
}

pub fn dbm_field(p_watts: f64) -> Result<String, CliError> {
    Ok(format!("{:.4}", watts_to_dbm(p_watts)?))
}

pub fn sweep_record(row: &SweepRow) -> Result<Vec<String>, CliError> {
    let r = &row.result;
    let mut rec = vec![
        row.scenario.preamble_len().to_string(),
        dbm_field(row.scenario.received_power_watts())?,
        num(row.scenario.prior_p1()),
        num(row.target.alpha()),
        num(row.target.beta()),
        row.scheme.name().to_string(),
        r.feasible.to_string(),
    ];
    rec.extend(ConfigColumns::of(row.scheme, &r.config).record());
    rec.extend([
        num(r.report.p_fa),
        num(r.report.p_miss),
        num(r.report.energy),
        opt_num(r.report.p_continue),
        opt_num(row.savings_vs_bmac_pct),
    ]);
    Ok(rec)
}

pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], records: &[Vec<S>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for rec in records {
        w.write_record(rec.iter().map(|s| s.as_ref())).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

fn series_color(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::SinglePhase => "#1f77b4",
        Scheme::Bmac => "#2ca02c",
        Scheme::AdaSense => "#d62728",
    }
}

/// Log-log chart of energy against the miss target, one line per scheme.
pub fn svg_chart(title: &str, rows: &[&SweepRow]) -> String {
    let pts: Vec<(Scheme, f64, f64)> = rows
        .iter()
        .filter(|r| r.result.feasible && r.result.report.energy > 0.0)
        .map(|r| (r.scheme, r.target.beta().log10(), r.result.report.energy.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (x0, x1) = span(pts.iter().map(|p| p.1));
    let (y0, y1) = span(pts.iter().map(|p| p.2));
    let (ml, mr, mt, mb) = MARGIN;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (WIDTH - ml - mr);
    let sy = |y: f64| HEIGHT - mb - (y - y0) / (y1 - y0) * (HEIGHT - mt - mb);

    let _ = writeln!(
        svg,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - ml - mr,
        HEIGHT - mt - mb
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(d as f64);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{d}</text>"#, HEIGHT - mb + 16.0);
    }
    for d in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(d as f64);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">1e{d}</text>"#, ml - 6.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">miss probability</text>"#, WIDTH / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">energy (W samples)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (i, scheme) in Scheme::ALL.iter().enumerate() {
        let line: Vec<String> = pts
            .iter()
            .filter(|p| p.0 == *scheme)
            .map(|p| format!("{:.2},{:.2}", sx(p.1), sy(p.2)))
            .collect();
        if line.is_empty() {
            continue;
        }
        let color = series_color(*scheme);
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, line.join(" "));
        let ly = mt + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
            WIDTH - mr - 110.0,
            scheme.name()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
