//! `fineq`: runs the rate experiments and inspects single operators.
//!
//! Exit codes: 0 when every verdict passes (or the lattice condition holds),
//! 1 when some verdict fails or is invalid (or the condition is violated),
//! 2 on usage and config errors.

mod config;
mod error;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fineq::dynamics::{path_by_name, propagate_with, PropagateOptions};
use fineq::experiments::run_suite;
use fineq::lattice::{analyze_condition_c, parse_rational, CohomologyData};
use fineq::quantization::{op_norm, quantize, trace, CMatrix, QuantizationLevel, Quantizer};
use fineq::sphere::registry::function_by_name;
use fineq::sphere::DEFAULT_L_CAP;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{float, write_atomic, Summary};

#[derive(Parser)]
#[command(name = "fineq", version, about = "Semiclassical rate experiments for quantizations of the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment suite described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check condition (C) for integer cohomological data.
    ConditionC(ConditionArgs),
    /// Summarize the quantization of a named function.
    Quantize {
        #[command(flatten)]
        op: OperatorArgs,
        /// Also print the matrix, one row per line as re,im pairs.
        #[arg(long)]
        dump: bool,
    },
    /// Summarize the propagator of a named Hamiltonian path.
    Propagate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        path: String,
        #[arg(long, default_value = "fine")]
        quantizer: String,
        #[arg(long, default_value_t = DEFAULT_L_CAP)]
        l_cap: usize,
        #[arg(long)]
        dump: bool,
    },
    /// Write an operator or propagator matrix, row-major, as re,im pairs.
    DumpOperator {
        #[arg(long)]
        k: usize,
        /// Function to quantize.
        #[arg(long, conflicts_with = "path", required_unless_present = "path")]
        f: Option<String>,
        /// Path whose propagator to dump instead.
        #[arg(long)]
        path: Option<String>,
        /// Defaults to toeplitz for --f and fine for --path.
        #[arg(long)]
        quantizer: Option<String>,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render log-log SVG plots from a defects.csv file.
    Plot {
        csv: PathBuf,
        /// Directory for the SVG files; defaults to `plots/` next to the CSV.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    f: String,
    #[arg(long, default_value = "toeplitz")]
    quantizer: String,
}

#[derive(Args)]
struct ConditionArgs {
    /// Values of [omega]/2pi on a basis, comma separated rationals p/q.
    #[arg(long, allow_hyphen_values = true, requires = "c1", conflicts_with = "config")]
    omega: Option<String>,
    /// Values of c1 on the same basis, comma separated integers.
    #[arg(long, allow_hyphen_values = true, requires = "omega")]
    c1: Option<String>,
    /// TOML file with `omega` (strings or integers) and `c1` lists.
    #[arg(long, required_unless_present = "omega")]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fineq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("FINEQ_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("FINEQ_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::ConditionC(args) => condition_c(&args),
        Command::Quantize { op, dump } => quantize_cmd(&op, dump),
        Command::Propagate {
            k,
            path,
            quantizer,
            l_cap,
            dump,
        } => propagate_cmd(k, &path, &quantizer, l_cap, dump),
        Command::DumpOperator {
            k,
            f,
            path,
            quantizer,
            output,
        } => dump_cmd(k, f.as_deref(), path.as_deref(), quantizer.as_deref(), output.as_deref()),
        Command::Plot { csv, output_dir } => plot_cmd(&csv, output_dir),
    }
}

fn run(config_path: &Path, output_dir: Option<PathBuf>) -> Result<u8> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    let reports = run_suite(&config.suite)?;
    let dir = &config.output_dir;
    let defects = output::defects_csv(&reports);
    write_atomic(&dir.join("defects.csv"), &defects)?;
    write_atomic(&dir.join("rates.csv"), &output::rates_csv(&reports))?;
    write_atomic(&dir.join("report.json"), &output::report_json(&config.suite, &reports))?;
    if config.emit_plots {
        write_plots(&defects, &dir.join("defects.csv"), &dir.join("plots"))?;
    }
    for r in &reports {
        let fit = r
            .fit
            .map(|f| format!(" slope {:.3} r2 {:.4}", f.slope, f.r_squared))
            .unwrap_or_default();
        let note = if r.note.is_empty() { String::new() } else { format!(" ({})", r.note) };
        println!("{:<7} {}{fit}{note}", r.verdict.to_string(), r.name);
    }
    let summary = Summary::of(&reports);
    println!(
        "{} pass, {} fail, {} invalid; artifacts in {}",
        summary.pass,
        summary.fail,
        summary.invalid,
        dir.display()
    );
    Ok(if summary.all_pass() { 0 } else { 1 })
}

fn write_plots(csv: &[u8], origin: &Path, dir: &Path) -> Result<()> {
    let text = String::from_utf8_lossy(csv);
    for (name, svg) in plot::render_all(&text, origin)? {
        write_atomic(&dir.join(name), svg.as_bytes())?;
    }
    Ok(())
}

fn plot_cmd(csv: &Path, output_dir: Option<PathBuf>) -> Result<u8> {
    let bytes = std::fs::read(csv).map_err(|source| CliError::Read {
        path: csv.to_path_buf(),
        source,
    })?;
    let dir = output_dir.unwrap_or_else(|| csv.parent().unwrap_or(Path::new(".")).join("plots"));
    write_plots(&bytes, csv, &dir)?;
    Ok(0)
}

fn parse_integers(list: &str) -> Result<Vec<i64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("'{s}' is not an integer")))
        })
        .collect()
}

fn condition_data(args: &ConditionArgs) -> Result<CohomologyData> {
    if let (Some(omega), Some(c1)) = (&args.omega, &args.c1) {
        let omega: Vec<&str> = omega.split(',').collect();
        return Ok(CohomologyData::parse(&omega, &parse_integers(c1)?)?);
    }
    let path = args.config.as_ref().expect("clap enforces one input");
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let list = |key: &str| -> Result<Vec<toml::Value>> {
        match table.get(key) {
            Some(toml::Value::Array(items)) => Ok(items.clone()),
            _ => Err(CliError::Config(format!("'{key}' must be a list"))),
        }
    };
    let omega = list("omega")?
        .iter()
        .map(|v| match v {
            toml::Value::String(s) => Ok(parse_rational(s)?),
            toml::Value::Integer(i) => Ok(parse_rational(&i.to_string())?),
            other => Err(CliError::Config(format!("omega entry {other} must be \"p/q\" or an integer"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let c1 = list("c1")?
        .iter()
        .map(|v| match v {
            toml::Value::Integer(i) => Ok((*i).into()),
            other => Err(CliError::Config(format!("c1 entry {other} must be an integer"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(rank) = table.get("basis_rank") {
        if rank.as_integer() != Some(omega.len() as i64) {
            return Err(CliError::Config(format!(
                "basis_rank {rank} does not match {} omega values",
                omega.len()
            )));
        }
    }
    Ok(CohomologyData::new(omega, c1)?)
}

fn condition_c(args: &ConditionArgs) -> Result<u8> {
    let report = analyze_condition_c(&condition_data(args)?)?;
    println!("{report}");
    Ok(if report.satisfied { 0 } else { 1 })
}

fn level(k: usize) -> Result<QuantizationLevel> {
    if k > fineq::experiments::MAX_K {
        return Err(CliError::Usage(format!(
            "k = {k} is above the supported maximum {}",
            fineq::experiments::MAX_K
        )));
    }
    Ok(QuantizationLevel::new(k)?)
}

fn parse_quantizer(name: &str) -> Result<Quantizer> {
    Ok(name.parse()?)
}

fn print_matrix(out: &mut dyn std::io::Write, m: &CMatrix) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{},{}", float(m[(i, j)].re), float(m[(i, j)].im)))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn stdout_matrix(m: &CMatrix) -> Result<()> {
    print_matrix(&mut std::io::stdout().lock(), m).map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn quantize_cmd(args: &OperatorArgs, dump: bool) -> Result<u8> {
    let lv = level(args.k)?;
    let q = parse_quantizer(&args.quantizer)?;
    let f = function_by_name(&args.f)?;
    let op = quantize(&lv, &f, q);
    let eig = op.eigenvalues();
    println!("function = {}", args.f);
    println!("quantizer = {}", q.name());
    println!("dim = {}", op.dim());
    println!("op-norm = {}", float(op.op_norm()));
    println!("trace = {}", float(op.trace().re));
    println!("min-eigenvalue = {}", float(eig.iter().copied().fold(f64::INFINITY, f64::min)));
    println!("max-eigenvalue = {}", float(eig.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    if dump {
        stdout_matrix(op.matrix())?;
    }
    Ok(0)
}

fn propagator(k: usize, path: &str, quantizer: &str, l_cap: usize) -> Result<fineq::quantization::UnitaryPropagator> {
    let lv = level(k)?;
    let options = PropagateOptions {
        quantizer: parse_quantizer(quantizer)?,
        ..PropagateOptions::default()
    };
    Ok(propagate_with(&lv, &path_by_name(path, l_cap)?, &options)?)
}

fn propagate_cmd(k: usize, path: &str, quantizer: &str, l_cap: usize, dump: bool) -> Result<u8> {
    let u = propagator(k, path, quantizer, l_cap)?;
    let dim = u.level.dim;
    let tr = trace(&u.matrix);
    println!("path = {}", u.meta.path);
    println!("dim = {dim}");
    println!("steps = {}", u.meta.steps);
    println!("error-estimate = {}", float(u.meta.error_estimate));
    println!("unitarity-defect = {}", float(u.unitarity_defect()));
    println!("distance-to-identity = {}", float(op_norm(&(&u.matrix - CMatrix::identity(dim, dim)))));
    println!("trace = {},{}", float(tr.re), float(tr.im));
    if dump {
        stdout_matrix(&u.matrix)?;
    }
    Ok(0)
}

fn dump_cmd(k: usize, f: Option<&str>, path: Option<&str>, quantizer: Option<&str>, output: Option<&Path>) -> Result<u8> {
    let matrix = match (f, path) {
        (Some(f), _) => {
            let q = parse_quantizer(quantizer.unwrap_or("toeplitz"))?;
            quantize(&level(k)?, &function_by_name(f)?, q).into_matrix()
        }
        (None, Some(p)) => propagator(k, p, quantizer.unwrap_or("fine"), DEFAULT_L_CAP)?.matrix,
        (None, None) => return Err(CliError::Usage("one of --f or --path is required".to_string())),
    };
    match output {
        Some(file) => {
            let mut bytes = Vec::new();
            print_matrix(&mut bytes, &matrix).expect("writing to memory");
            write_atomic(file, &bytes)?;
        }
        None => stdout_matrix(&matrix)?,
    }
    Ok(0)
}
