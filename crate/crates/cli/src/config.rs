//! Run configuration in TOML.
//!
//! ```toml
//! ks = [8, 16, 32, 64, 128]
//! seed = 20240607
//! l_cap = 64
//! output_dir = "fineq-out"
//! emit_plots = true
//!
//! [experiments.p2_bracket]
//! pairs = [["u2", "xy"], ["u2", "x"]]
//!
//! [experiments.p2_bracket.fine]
//! max_slope = -2.6
//! ```
//!
//! Every top-level key is optional. Without an `[experiments]` table the
//! whole catalog runs with default parameters; with one, only the listed
//! experiments run. A sub-table such as `[experiments.p2_bracket.fine]` is
//! shorthand for the tagged keys `fine.max_slope` and so on. A relative
//! `output_dir` is resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use fineq::experiments::{ExperimentSpec, Param, SuiteConfig, EXPERIMENTS};
use toml::{Table, Value};

use crate::error::{CliError, Result};

const TOP_LEVEL_KEYS: [&str; 6] = ["ks", "seed", "l_cap", "output_dir", "emit_plots", "experiments"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub suite: SuiteConfig,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        let defaults = SuiteConfig::default();
        let ks = match table.get("ks") {
            Some(v) => integers(v, "ks")?.into_iter().map(|k| k as usize).collect(),
            None => defaults.ks.clone(),
        };
        let seed = match table.get("seed") {
            Some(v) => integer(v, "seed")? as u64,
            None => defaults.seed,
        };
        let l_cap = match table.get("l_cap") {
            Some(v) => integer(v, "l_cap")? as usize,
            None => defaults.l_cap,
        };
        let experiments = match table.get("experiments") {
            None => defaults.experiments,
            Some(Value::Table(t)) => experiment_specs(t)?,
            Some(_) => return Err(CliError::Config("'experiments' must be a table".to_string())),
        };
        let output_dir = match table.get("output_dir") {
            None => PathBuf::from("fineq-out"),
            Some(Value::String(s)) => PathBuf::from(s),
            Some(_) => return Err(CliError::Config("'output_dir' must be a string".to_string())),
        };
        let emit_plots = match table.get("emit_plots") {
            None => true,
            Some(Value::Boolean(b)) => *b,
            Some(_) => return Err(CliError::Config("'emit_plots' must be true or false".to_string())),
        };
        let suite = SuiteConfig {
            ks,
            seed,
            l_cap,
            experiments,
        };
        suite.validate()?;
        Ok(Self {
            suite,
            output_dir: base_dir.join(output_dir),
            emit_plots,
        })
    }
}

fn integer(v: &Value, key: &str) -> Result<i64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i),
        _ => Err(CliError::Config(format!("'{key}' must be a non-negative integer"))),
    }
}

fn integers(v: &Value, key: &str) -> Result<Vec<i64>> {
    match v {
        Value::Array(items) => items.iter().map(|i| integer(i, key)).collect(),
        _ => Err(CliError::Config(format!("'{key}' must be a list of integers"))),
    }
}

/// Catalog order, so that the run order does not depend on the file layout.
fn experiment_specs(table: &Table) -> Result<Vec<ExperimentSpec>> {
    if let Some(name) = table.keys().find(|k| !EXPERIMENTS.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown experiment '{name}'")));
    }
    let mut specs = Vec::new();
    for name in EXPERIMENTS {
        let Some(value) = table.get(name) else {
            continue;
        };
        let Value::Table(params) = value else {
            return Err(CliError::Config(format!("experiments.{name} must be a table")));
        };
        let mut spec = ExperimentSpec::new(name);
        flatten(params, "", &mut |key, v| {
            spec.params.insert(key, param(v, name)?);
            Ok(())
        })?;
        specs.push(spec);
    }
    Ok(specs)
}

fn flatten(table: &Table, prefix: &str, sink: &mut dyn FnMut(String, &Value) -> Result<()>) -> Result<()> {
    for (key, value) in table {
        let full = format!("{prefix}{key}");
        match value {
            Value::Table(inner) => flatten(inner, &format!("{full}."), sink)?,
            other => sink(full, other)?,
        }
    }
    Ok(())
}

fn param(v: &Value, experiment: &str) -> Result<Param> {
    Ok(match v {
        Value::Integer(i) => Param::Num(*i as f64),
        Value::Float(f) => Param::Num(*f),
        Value::String(s) => Param::Str(s.clone()),
        Value::Boolean(b) => Param::Bool(*b),
        Value::Array(items) => Param::List(
            items
                .iter()
                .map(|i| param(i, experiment))
                .collect::<Result<_>>()?,
        ),
        other => {
            return Err(CliError::Config(format!(
                "experiments.{experiment}: unsupported value {other}"
            )))
        }
    })
}
