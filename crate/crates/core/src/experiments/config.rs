use std::collections::BTreeMap;

use super::report::Thresholds;
use crate::error::{Error, Result};

/// Parameter value of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Num(f64),
    Str(String),
    Bool(bool),
    List(Vec<Param>),
}

impl Param {
    pub fn str(s: &str) -> Self {
        Self::Str(s.to_string())
    }

    pub fn strs(items: &[&str]) -> Self {
        Self::List(items.iter().map(|s| Self::str(s)).collect())
    }

    pub fn pairs(items: &[(&str, &str)]) -> Self {
        Self::List(items.iter().map(|(a, b)| Self::strs(&[a, b])).collect())
    }

    pub fn nums(items: &[f64]) -> Self {
        Self::List(items.iter().map(|&v| Self::Num(v)).collect())
    }
}

/// One experiment of the suite with its parameters.
///
/// Thresholds are overridden with the keys `max_slope`, `min_slope`,
/// `min_r2`, `max_abs` and `min_abs`; a key prefixed by `<tag>.` only applies
/// to reports whose name has `<tag>` as a `/`-separated component
/// (`fine.max_slope` for `p2_bracket/fine/u2,xy`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: BTreeMap<String, Param>,
}

const THRESHOLD_KEYS: [&str; 5] = ["max_slope", "min_slope", "min_r2", "max_abs", "min_abs"];

impl ExperimentSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Param) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn num(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(Param::Num(v)) => Ok(*v),
            Some(other) => Err(self.bad(key, "a number", other)),
        }
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String> {
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(Param::Str(s)) => Ok(s.clone()),
            Some(other) => Err(self.bad(key, "a string", other)),
        }
    }

    pub fn strings(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        match self.params.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(Param::List(items)) => items
                .iter()
                .map(|p| match p {
                    Param::Str(s) => Ok(s.clone()),
                    other => Err(self.bad(key, "a list of strings", other)),
                })
                .collect(),
            Some(other) => Err(self.bad(key, "a list of strings", other)),
        }
    }

    pub fn numbers(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(Param::List(items)) => items
                .iter()
                .map(|p| match p {
                    Param::Num(v) => Ok(*v),
                    other => Err(self.bad(key, "a list of numbers", other)),
                })
                .collect(),
            Some(other) => Err(self.bad(key, "a list of numbers", other)),
        }
    }

    /// A list of two-element string lists.
    pub fn pairs(&self, key: &str, default: &[(&str, &str)]) -> Result<Vec<(String, String)>> {
        let Some(p) = self.params.get(key) else {
            return Ok(default.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect());
        };
        let err = |other: &Param| self.bad(key, "a list of [a, b] pairs", other);
        let Param::List(items) = p else {
            return Err(err(p));
        };
        items
            .iter()
            .map(|item| match item {
                Param::List(ab) => match ab.as_slice() {
                    [Param::Str(a), Param::Str(b)] => Ok((a.clone(), b.clone())),
                    _ => Err(err(item)),
                },
                other => Err(err(other)),
            })
            .collect()
    }

    /// The `ks` parameter if present, else `default`; a `k_range = [lo, hi]`
    /// parameter expands to every integer in between.
    pub fn ks(&self, default: &[usize]) -> Result<Vec<usize>> {
        let mut ks = if let Some(range) = self.params.get("k_range") {
            match range {
                Param::List(v) => match v.as_slice() {
                    [Param::Num(lo), Param::Num(hi)] if *lo >= 1.0 && hi >= lo => {
                        (*lo as usize..=*hi as usize).collect()
                    }
                    _ => return Err(self.bad("k_range", "[lo, hi] with 1 <= lo <= hi", range)),
                },
                other => return Err(self.bad("k_range", "[lo, hi]", other)),
            }
        } else if self.params.contains_key("ks") {
            let vals = self.numbers("ks", &[])?;
            vals.iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Config(format!("{}: ks must be positive integers, got {v}", self.name)))
                    }
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            default.to_vec()
        };
        ks.sort_unstable();
        ks.dedup();
        Ok(ks)
    }

    /// `base` with overrides from the parameters applied for `report_name`.
    pub fn thresholds(&self, report_name: &str, base: Thresholds) -> Result<Thresholds> {
        let mut t = base;
        let tags: Vec<&str> = report_name.split('/').skip(1).collect();
        // Plain keys first so that tagged keys win.
        for tagged in [false, true] {
            for (key, value) in &self.params {
                let field = match key.split_once('.') {
                    Some((tag, field)) if tagged && tags.contains(&tag) => field,
                    None if !tagged => key.as_str(),
                    _ => continue,
                };
                if !THRESHOLD_KEYS.contains(&field) {
                    continue;
                }
                let Param::Num(v) = value else {
                    return Err(self.bad(key, "a number", value));
                };
                let slot = match field {
                    "max_slope" => &mut t.max_slope,
                    "min_slope" => &mut t.min_slope,
                    "min_r2" => &mut t.min_r2,
                    "max_abs" => &mut t.max_abs,
                    _ => &mut t.min_abs,
                };
                *slot = Some(*v);
            }
        }
        Ok(t)
    }

    fn bad(&self, key: &str, expected: &str, got: &Param) -> Error {
        Error::Config(format!("{}: parameter '{key}' must be {expected}, got {got:?}", self.name))
    }
}

/// Everything a suite run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub ks: Vec<usize>,
    pub seed: u64,
    /// Band-limit cap for transported functions.
    pub l_cap: usize,
    pub experiments: Vec<ExperimentSpec>,
}

pub const DEFAULT_KS: [usize; 5] = [8, 16, 32, 64, 128];
pub const MAX_K: usize = 512;

impl Default for SuiteConfig {
    /// The full catalog with default parameters.
    fn default() -> Self {
        Self {
            ks: DEFAULT_KS.to_vec(),
            seed: 20240607,
            l_cap: crate::sphere::DEFAULT_L_CAP,
            experiments: super::catalog::EXPERIMENTS
                .iter()
                .map(|name| ExperimentSpec::new(name))
                .collect(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return Err(Error::Config("ks is empty".to_string()));
        }
        if self.ks[0] == 0 || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("ks must be positive and strictly increasing".to_string()));
        }
        if *self.ks.last().expect("non-empty") > MAX_K {
            return Err(Error::Config(format!("k above {MAX_K} is not supported")));
        }
        if self.l_cap < 4 {
            return Err(Error::Config("l_cap must be at least 4".to_string()));
        }
        for e in &self.experiments {
            if !super::catalog::EXPERIMENTS.contains(&e.name.as_str()) {
                return Err(Error::Config(format!("unknown experiment '{}'", e.name)));
            }
            for k in e.ks(&self.ks)? {
                if k > MAX_K {
                    return Err(Error::Config(format!("{}: k above {MAX_K} is not supported", e.name)));
                }
            }
        }
        Ok(())
    }
}
