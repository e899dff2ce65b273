//! Log-log SVG plots of `defects.csv`, one file per experiment.
//!
//! Output depends only on the CSV contents: series are ordered by name,
//! coordinates are printed with fixed precision, and no timestamps are
//! embedded.

use std::collections::BTreeMap;
use std::fmt::Write;

use fineq::experiments::{fit_rate, FLOOR};

use crate::error::{CliError, Result};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 560.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 400.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    k: usize,
    defect: f64,
    numerical_error: f64,
}

impl Point {
    fn drawable(&self) -> bool {
        self.k > 0 && self.defect > 0.0 && self.defect.is_finite()
    }

    /// Same rule as the reports: unresolved above roundoff or its own error.
    fn exact(&self) -> bool {
        self.defect <= FLOOR.max(self.numerical_error)
    }
}

/// Series of one experiment: report name -> points.
pub type Series = BTreeMap<String, Vec<Point>>;

/// Parses the `defects.csv` text into per-experiment series.
pub fn read_defects(csv_text: &str, origin: &std::path::Path) -> Result<BTreeMap<String, Series>> {
    let bad = |source| CliError::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers().map_err(bad)?.clone();
    if header.iter().collect::<Vec<_>>() != ["experiment", "k", "defect", "p", "extra"] {
        return Err(CliError::Usage(format!(
            "{}: expected header experiment,k,defect,p,extra",
            origin.display()
        )));
    }
    let mut out: BTreeMap<String, Series> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(bad)?;
        let malformed = || CliError::Usage(format!("{}: malformed row {}", origin.display(), line + 2));
        let name = record.get(0).ok_or_else(malformed)?;
        let k: usize = record.get(1).and_then(|s| s.parse().ok()).ok_or_else(malformed)?;
        let defect: f64 = record.get(2).and_then(|s| s.parse().ok()).ok_or_else(malformed)?;
        let numerical_error = record
            .get(4)
            .unwrap_or("")
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix("numerical_error=")?.parse().ok())
            .unwrap_or(0.0);
        let experiment = name.split('/').next().unwrap_or(name).to_string();
        out.entry(experiment)
            .or_default()
            .entry(name.to_string())
            .or_default()
            .push(Point {
                k,
                defect,
                numerical_error,
            });
    }
    Ok(out)
}

/// `(file name, svg)` for every experiment in the CSV.
pub fn render_all(csv_text: &str, origin: &std::path::Path) -> Result<Vec<(String, String)>> {
    Ok(read_defects(csv_text, origin)?
        .iter()
        .map(|(experiment, series)| (format!("{experiment}.svg"), render(experiment, series)))
        .collect())
}

/// Keeps both ends of long labels; the full name goes into a tooltip.
fn shorten(label: &str) -> String {
    const MAX: usize = 34;
    let chars: Vec<char> = label.chars().collect();
    if chars.len() <= MAX {
        return label.to_string();
    }
    let head: String = chars[..MAX / 2 - 1].iter().collect();
    let tail: String = chars[chars.len() - (MAX / 2 - 2)..].iter().collect();
    format!("{head}...{tail}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Decade bounds `[floor(log10 lo), ceil(log10 hi)]`, at least one decade wide.
fn decades(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.log10().floor();
    let b = hi.log10().ceil();
    if b > a {
        (a, b)
    } else {
        (a, a + 1.0)
    }
}

fn render(experiment: &str, series: &Series) -> String {
    let positive: Vec<(usize, f64)> = series
        .values()
        .flatten()
        .filter(|p| p.drawable())
        .map(|p| (p.k, p.defect))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(experiment)
    );
    if positive.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">all defects are zero</text>"#,
            (LEFT + RIGHT) / 2.0,
            (TOP + BOTTOM) / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }
    let k_lo = positive.iter().map(|p| p.0).min().expect("non-empty") as f64;
    let k_hi = positive.iter().map(|p| p.0).max().expect("non-empty") as f64;
    let (x0, x1) = if k_hi > k_lo {
        (k_lo.log10(), k_hi.log10())
    } else {
        (k_lo.log10() - 0.5, k_lo.log10() + 0.5)
    };
    let (y0, y1) = decades(
        positive.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        positive.iter().map(|p| p.1).fold(0.0, f64::max),
    );
    let pad = 0.04 * (x1 - x0);
    let sx = |k: f64| LEFT + (k.log10() - x0 + pad) / (x1 - x0 + 2.0 * pad) * (RIGHT - LEFT);
    let sy = |d: f64| BOTTOM - (d.log10() - y0) / (y1 - y0) * (BOTTOM - TOP);

    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let step = ((y1 - y0) / 8.0).ceil().max(1.0) as i32;
    let mut e = y0 as i32;
    while e <= y1 as i32 {
        let y = sy(10f64.powi(e));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{RIGHT}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            LEFT - 6.0,
            y + 4.0
        );
        e += step;
    }
    let mut ks: Vec<usize> = positive.iter().map(|p| p.0).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() > 12 {
        // Dense sweeps: label powers of two only.
        ks = (0..usize::BITS)
            .map(|e| 1usize << e)
            .filter(|&k| k as f64 >= k_lo && k as f64 <= k_hi)
            .collect();
    }
    for &k in &ks {
        let x = sx(k as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{BOTTOM}" stroke="#eeeeee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{k}</text>"##,
            BOTTOM + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">k</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 36.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">defect</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    let mut legend_y = TOP + 6.0;
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut drawn: Vec<Point> = points.iter().copied().filter(Point::drawable).collect();
        drawn.sort_by_key(|p| p.k);
        let pts: Vec<(usize, f64)> = drawn.iter().map(|p| (p.k, p.defect)).collect();
        let fitted: Vec<(usize, f64)> = drawn
            .iter()
            .filter(|p| !p.exact())
            .map(|p| (p.k, p.defect))
            .collect();
        let label = name.split_once('/').map_or(name.as_str(), |(_, rest)| rest);
        let slope = match fit_rate(&fitted) {
            Ok(f) => format!("slope {:.3}", f.slope),
            Err(_) if fitted.is_empty() => "exact".to_string(),
            Err(_) => "no fit".to_string(),
        };
        if !pts.is_empty() {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(k, d)| format!("{:.2},{:.2}", sx(k as f64), sy(d)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                coords.join(" ")
            );
            if pts.len() <= 32 {
                for &(k, d) in &pts {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        sx(k as f64),
                        sy(d)
                    );
                }
            }
        }
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}"><title>{}</title>{} ({slope})</text>"#,
            RIGHT + 14.0,
            RIGHT + 32.0,
            RIGHT + 38.0,
            legend_y + 4.0,
            escape(name),
            escape(&shorten(label))
        );
        legend_y += 18.0;
    }
    svg.push_str("</svg>\n");
    svg
}
