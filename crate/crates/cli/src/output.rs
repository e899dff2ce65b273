//! Report files: `defects.csv`, `rates.csv` and `report.json`.
//!
//! `defects.csv` has one row per sample with header
//! `experiment,k,defect,p,extra`; `p` is `inf` for the operator norm and
//! `extra` is a space-separated `key=value` list that always carries the
//! sample's `numerical_error`.
//! `rates.csv` has one row per report with header
//! `experiment,slope,intercept,r2,verdict`; the fit columns are empty when no
//! fit was made. Floats are written with 17 significant digits.

use std::io::Write;
use std::path::Path;

use fineq::experiments::{RateReport, SuiteConfig, Verdict};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn defects_csv(reports: &[RateReport]) -> Vec<u8> {
    let rows = reports.iter().flat_map(|r| {
        r.samples.iter().map(|s| {
            let error = format!("numerical_error={}", float(s.numerical_error));
            let extra = if s.extra.is_empty() { error } else { format!("{} {error}", s.extra) };
            vec![r.name.clone(), s.k.to_string(), float(s.defect), float(s.p), extra]
        })
    });
    csv_bytes(&["experiment", "k", "defect", "p", "extra"], rows)
}

pub fn rates_csv(reports: &[RateReport]) -> Vec<u8> {
    let rows = reports.iter().map(|r| {
        let (slope, intercept, r2) = match r.fit {
            Some(f) => (float(f.slope), float(f.intercept), float(f.r_squared)),
            None => Default::default(),
        };
        vec![r.name.clone(), slope, intercept, r2, r.verdict.to_string()]
    });
    csv_bytes(&["experiment", "slope", "intercept", "r2", "verdict"], rows)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    ks: &'a [usize],
    seed: u64,
    l_cap: usize,
    summary: Summary,
    reports: Vec<JsonRate<'a>>,
}

#[derive(Serialize, Default, Debug, PartialEq, Eq, Clone, Copy)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub invalid: usize,
}

impl Summary {
    pub fn of(reports: &[RateReport]) -> Self {
        let mut s = Self::default();
        for r in reports {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Invalid => s.invalid += 1,
            }
        }
        s
    }

    pub fn all_pass(&self) -> bool {
        self.fail == 0 && self.invalid == 0
    }
}

#[derive(Serialize)]
struct JsonRate<'a> {
    experiment: &'a str,
    verdict: String,
    slope: Option<f64>,
    intercept: Option<f64>,
    r2: Option<f64>,
    note: &'a str,
    thresholds: JsonThresholds,
    samples: Vec<JsonSample<'a>>,
}

#[derive(Serialize)]
struct JsonThresholds {
    max_slope: Option<f64>,
    min_slope: Option<f64>,
    min_r2: Option<f64>,
    max_abs: Option<f64>,
    min_abs: Option<f64>,
}

#[derive(Serialize)]
struct JsonSample<'a> {
    k: usize,
    defect: f64,
    /// `null` for the operator norm.
    p: Option<f64>,
    numerical_error: f64,
    extra: &'a str,
}

pub fn report_json(config: &SuiteConfig, reports: &[RateReport]) -> Vec<u8> {
    let doc = JsonReport {
        schema_version: SCHEMA_VERSION,
        ks: &config.ks,
        seed: config.seed,
        l_cap: config.l_cap,
        summary: Summary::of(reports),
        reports: reports
            .iter()
            .map(|r| JsonRate {
                experiment: &r.name,
                verdict: r.verdict.to_string(),
                slope: r.fit.map(|f| f.slope),
                intercept: r.fit.map(|f| f.intercept),
                r2: r.fit.map(|f| f.r_squared),
                note: &r.note,
                thresholds: JsonThresholds {
                    max_slope: r.thresholds.max_slope,
                    min_slope: r.thresholds.min_slope,
                    min_r2: r.thresholds.min_r2,
                    max_abs: r.thresholds.max_abs,
                    min_abs: r.thresholds.min_abs,
                },
                samples: r
                    .samples
                    .iter()
                    .map(|s| JsonSample {
                        k: s.k,
                        defect: s.defect,
                        p: s.p.is_finite().then_some(s.p),
                        numerical_error: s.numerical_error,
                        extra: &s.extra,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("plain data serializes");
    out.push(b'\n');
    out
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fineq::experiments::{Sample, Thresholds};

    fn reports() -> Vec<RateReport> {
        let samples = [8, 16, 32]
            .iter()
            .map(|&k| Sample::new(k, 1.0 / (k * k) as f64).with_extra("note=a,b"))
            .collect();
        vec![RateReport::evaluate(
            "p2_bracket/fine/u2,xy",
            samples,
            Thresholds::slope_at_most(-1.5),
        )]
    }

    #[test]
    fn floats_carry_17_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(f64::INFINITY), "inf");
        assert_eq!(float(-0.0), "-0.0000000000000000e0");
    }

    #[test]
    fn csv_quotes_names_with_commas() {
        let text = String::from_utf8(defects_csv(&reports())).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("experiment,k,defect,p,extra"));
        assert_eq!(
            lines.next(),
            Some("\"p2_bracket/fine/u2,xy\",8,1.5625000000000000e-2,inf,\"note=a,b numerical_error=0.0000000000000000e0\"")
        );
        let rates = String::from_utf8(rates_csv(&reports())).unwrap();
        assert!(rates.starts_with("experiment,slope,intercept,r2,verdict\n"));
        assert!(rates.trim_end().ends_with(",pass"));
    }

    #[test]
    fn json_has_schema_version() {
        let v: serde_json::Value =
            serde_json::from_slice(&report_json(&SuiteConfig::default(), &reports())).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["summary"]["pass"], 1);
        assert_eq!(v["reports"][0]["samples"][0]["p"], serde_json::Value::Null);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
