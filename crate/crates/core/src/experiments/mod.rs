//! Sweeps over `k` that turn the asymptotic statements into fitted rates.
//!
//! Every experiment returns one or more [`RateReport`]s named
//! `experiment/variant/...`. Defects that are zero up to their own numerical
//! error are reported as exact and do not enter slope fits.

pub mod catalog;
mod config;
mod report;

use rayon::prelude::*;

pub use catalog::EXPERIMENTS;
pub use config::{ExperimentSpec, Param, SuiteConfig, DEFAULT_KS, MAX_K};
pub use report::{fit_rate, Fit, RateReport, Sample, Thresholds, Verdict, FLOOR, SEPARATION_RATIO};

use crate::error::Result;

/// Runs every configured experiment; reports come back sorted by name.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<RateReport>> {
    config.validate()?;
    let ctx = catalog::Context {
        ks: config.ks.clone(),
        seed: config.seed,
        l_cap: config.l_cap,
    };
    let nested: Vec<Vec<RateReport>> = config
        .experiments
        .par_iter()
        .map(|e| catalog::run_experiment(e, &ctx))
        .collect::<Result<_>>()?;
    let mut reports: Vec<RateReport> = nested.into_iter().flatten().collect();
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

/// Runs a single experiment under the suite-wide settings of `config`.
pub fn run_one(config: &SuiteConfig, spec: &ExperimentSpec) -> Result<Vec<RateReport>> {
    let one = SuiteConfig {
        experiments: vec![spec.clone()],
        ..config.clone()
    };
    run_suite(&one)
}
