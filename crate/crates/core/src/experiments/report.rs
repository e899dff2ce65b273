use std::fmt;

use crate::error::{Error, Result};

/// Defects at or below this are "exact" and left out of slope fits.
pub const FLOOR: f64 = 1e-13;

/// Numerical error must stay below this fraction of the smallest fitted defect.
pub const SEPARATION_RATIO: f64 = 0.01;

/// One measurement of an experiment at level `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub k: usize,
    pub defect: f64,
    /// Schatten exponent of the norm used (`f64::INFINITY` for the operator norm).
    pub p: f64,
    /// Estimated numerical (integrator, quadrature, truncation) error in `defect`.
    pub numerical_error: f64,
    pub extra: String,
}

impl Sample {
    pub fn new(k: usize, defect: f64) -> Self {
        Self {
            k,
            defect,
            p: f64::INFINITY,
            numerical_error: 0.0,
            extra: String::new(),
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_error(mut self, e: f64) -> Self {
        self.numerical_error = e;
        self
    }

    pub fn with_extra(mut self, extra: impl Into<String>) -> Self {
        self.extra = extra.into();
        self
    }

    /// At or below [`FLOOR`], or not resolved above its own numerical error.
    pub fn is_exact(&self) -> bool {
        self.defect <= FLOOR.max(self.numerical_error)
    }
}

/// Least-squares line through `(log k, log defect)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares on the log-log data, skipping defects at or below
/// [`FLOOR`].
pub fn fit_rate(samples: &[(usize, f64)]) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, d)| *d > FLOOR)
        .map(|&(k, d)| ((k as f64).ln(), d.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { usable: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { usable: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    // A perfectly flat series is fitted exactly.
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(Fit {
        slope,
        intercept,
        r_squared,
    })
}

/// Acceptance thresholds; unset fields are not checked.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Thresholds {
    pub max_slope: Option<f64>,
    pub min_slope: Option<f64>,
    pub min_r2: Option<f64>,
    /// Every defect must be at most this.
    pub max_abs: Option<f64>,
    /// Every defect must be at least this.
    pub min_abs: Option<f64>,
}

impl Thresholds {
    pub fn slope_at_most(s: f64) -> Self {
        Self {
            max_slope: Some(s),
            ..Self::default()
        }
    }

    pub fn abs_at_most(v: f64) -> Self {
        Self {
            max_abs: Some(v),
            ..Self::default()
        }
    }

    pub fn abs_at_least(v: f64) -> Self {
        Self {
            min_abs: Some(v),
            ..Self::default()
        }
    }

    fn wants_slope(&self) -> bool {
        self.max_slope.is_some() || self.min_slope.is_some() || self.min_r2.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The measurement cannot support a verdict (too few usable samples, or
    /// numerical error too close to the defects).
    Invalid,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Invalid => "invalid",
        })
    }
}

/// Samples of one measured quantity across `k`, with fit and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `experiment/variant`, e.g. `p2_bracket/fine/u2,xy`.
    pub name: String,
    pub samples: Vec<Sample>,
    pub fit: Option<Fit>,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
    /// Why the verdict came out as it did.
    pub note: String,
}

impl RateReport {
    /// Sorts the samples, fits where needed and applies the thresholds.
    pub fn evaluate(name: impl Into<String>, mut samples: Vec<Sample>, thresholds: Thresholds) -> Self {
        samples.sort_by(|a, b| a.k.cmp(&b.k).then(a.p.total_cmp(&b.p)));
        let mut failures = Vec::new();
        let mut invalid = Vec::new();
        if let Some(max) = thresholds.max_abs {
            if let Some(s) = samples.iter().find(|s| !(s.defect <= max)) {
                failures.push(format!("defect {:.3e} at k = {} exceeds {max:.1e}", s.defect, s.k));
            }
        }
        if let Some(min) = thresholds.min_abs {
            if let Some(s) = samples.iter().find(|s| !(s.defect >= min)) {
                failures.push(format!("defect {:.3e} at k = {} below {min}", s.defect, s.k));
            }
        }
        let usable: Vec<&Sample> = samples.iter().filter(|s| !s.is_exact()).collect();
        let pairs: Vec<(usize, f64)> = usable.iter().map(|s| (s.k, s.defect)).collect();
        let fit = fit_rate(&pairs).ok();
        let mut notes = Vec::new();
        if thresholds.wants_slope() {
            if usable.is_empty() {
                notes.push("all samples exact".to_string());
            } else if let Some(fit) = fit {
                if let Some(max) = thresholds.max_slope {
                    if !(fit.slope <= max) {
                        failures.push(format!("slope {:.3} > {max}", fit.slope));
                    }
                }
                if let Some(min) = thresholds.min_slope {
                    if !(fit.slope >= min) {
                        failures.push(format!("slope {:.3} < {min}", fit.slope));
                    }
                }
                if let Some(min) = thresholds.min_r2 {
                    if !(fit.r_squared >= min) {
                        failures.push(format!("r2 {:.4} < {min}", fit.r_squared));
                    }
                }
                let smallest = usable.iter().map(|s| s.defect).fold(f64::INFINITY, f64::min);
                let worst = usable.iter().map(|s| s.numerical_error).fold(0.0, f64::max);
                if worst > SEPARATION_RATIO * smallest {
                    invalid.push(format!(
                        "numerical error {worst:.2e} exceeds 1% of smallest defect {smallest:.2e}"
                    ));
                }
            } else {
                invalid.push(format!(
                    "insufficient data: {} usable sample(s), need 3",
                    usable.len()
                ));
            }
        }
        let verdict = if !invalid.is_empty() {
            Verdict::Invalid
        } else if !failures.is_empty() {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        notes.extend(invalid);
        notes.extend(failures);
        Self {
            name: name.into(),
            samples,
            fit,
            thresholds,
            verdict,
            note: notes.join("; "),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn max_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.defect).fold(0.0, f64::max)
    }

    pub fn min_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.defect).fold(f64::INFINITY, f64::min)
    }

    /// Experiment name without the variant suffix.
    pub fn experiment(&self) -> &str {
        self.name.split('/').next().unwrap_or(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KS: [usize; 5] = [8, 16, 32, 64, 128];

    #[test]
    fn exact_power_law() {
        let s: Vec<_> = KS.iter().map(|&k| (k, 3.7 * (k as f64).powi(-3))).collect();
        let fit = fit_rate(&s).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-9);
        assert!((fit.intercept - 3.7f64.ln()).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_defects_have_zero_slope() {
        let s: Vec<_> = KS.iter().map(|&k| (k, 0.25)).collect();
        assert!(fit_rate(&s).unwrap().slope.abs() < 1e-9);
    }

    #[test]
    fn two_term_model() {
        let s: Vec<_> = KS
            .iter()
            .map(|&k| (k, (k as f64).powi(-2) + (k as f64).powi(-3)))
            .collect();
        let slope = fit_rate(&s).unwrap().slope;
        assert!(slope > -2.2 && slope < -1.9, "{slope}");
    }

    #[test]
    fn insufficient_data_is_distinct() {
        let s = vec![(8, 1e-3), (16, 1e-20), (32, 0.0), (64, 1e-4)];
        assert!(matches!(fit_rate(&s), Err(Error::InsufficientData { usable: 2 })));
        let samples = s.iter().map(|&(k, d)| Sample::new(k, d)).collect();
        let r = RateReport::evaluate("x", samples, Thresholds::slope_at_most(-1.0));
        assert_eq!(r.verdict, Verdict::Invalid);
    }

    #[test]
    fn all_exact_passes_slope_gates() {
        let samples = KS.iter().map(|&k| Sample::new(k, 0.0)).collect();
        let r = RateReport::evaluate("dim", samples, Thresholds::slope_at_most(-2.0));
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.note.contains("exact"));
    }

    #[test]
    fn verdicts() {
        let mk = |slope: f64, err: f64| -> Vec<Sample> {
            KS.iter()
                .rev()
                .map(|&k| Sample::new(k, (k as f64).powf(slope)).with_error(err))
                .collect()
        };
        let r = RateReport::evaluate("a", mk(-2.0, 0.0), Thresholds::slope_at_most(-1.6));
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.samples[0].k, 8);
        let r = RateReport::evaluate("a", mk(-1.0, 0.0), Thresholds::slope_at_most(-1.6));
        assert_eq!(r.verdict, Verdict::Fail);
        let r = RateReport::evaluate("a", mk(-2.0, 1e-5), Thresholds::slope_at_most(-1.6));
        assert_eq!(r.verdict, Verdict::Invalid);
        let r = RateReport::evaluate("a", mk(-2.0, 0.0), Thresholds::abs_at_least(0.5));
        assert_eq!(r.verdict, Verdict::Fail);
        let r = RateReport::evaluate("a", mk(-2.0, 0.0), Thresholds::abs_at_most(0.1));
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.experiment(), "a");
    }
}
