//! Command-line front end: `describe`, `verify`, `sample`, `coherent`.
//!
//! Settings come from flags, then an optional JSON config file, then
//! defaults. Exit codes: 0 success, 1 validation error, 2 verification
//! failure, 3 I/O error.

mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactpoly::{format_rational, parse_rational, rational_from_json, Rational};
use crate::family::{family_from_json, Family, Preset};
use crate::fockalg::{classify_algebra, coherent_profile, coherent_state, sample_grid};
use crate::ladder::associated_function;
use crate::output::{csv_table, format_float};
use crate::schrod::{MapSign, SchrodingerSystem};

pub use verify::{run_suite, CheckRecord, Suite, Tolerances, VerifyReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_VERIFICATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hyperladder", version, about = "Ladder operators, coherent states and solvable potentials for hypergeometric-type equations")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class, weight, eigenvalue table and algebra of a family.
    Describe,
    /// Run an identity suite and emit a JSON report.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
    /// Write sampled functions as CSV or JSON.
    Sample {
        #[arg(long, value_enum)]
        what: Option<What>,
    },
    /// Truncated coherent state coefficients.
    Coherent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum What {
    Wavefunction,
    Potential,
    Superpotential,
    Coherent,
    /// `Φ_{l,m}` on an s-grid.
    Associated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
struct Options {
    /// Family as inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Named family (legendre, jacobi, laguerre, hermite, poschl-teller).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Preset parameter `k=v` (repeatable).
    #[arg(long = "param", global = true)]
    params: Vec<String>,
    #[arg(long, global = true)]
    l: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Complex label, e.g. `1`, `i`, `0.5-2i`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, global = true)]
    trunc: Option<usize>,
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Sign of ds/dx = ±κ; defaults to -1 for quadratic σ and +1 otherwise.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sign: Option<String>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override `name=value`; may only tighten the default.
    #[arg(long = "tol", global = true)]
    tols: Vec<String>,
    /// JSON config file supplying any of the above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Settings read from `--config`. Keys mirror the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    family: Option<Value>,
    preset: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    l: Option<usize>,
    m: Option<usize>,
    z: Option<String>,
    trunc: Option<usize>,
    grid_n: Option<usize>,
    sign: Option<String>,
    format: Option<Format>,
    out: Option<PathBuf>,
    #[serde(default)]
    tol: BTreeMap<String, f64>,
    suite: Option<Suite>,
    what: Option<What>,
}

/// Fully resolved run settings.
#[derive(Debug)]
pub struct RunConfig {
    pub family: Family,
    pub l: usize,
    pub m: usize,
    pub z: Complex64,
    pub trunc: usize,
    pub grid_n: usize,
    pub sign: MapSign,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub tolerances: Tolerances,
}

/// Error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

pub fn run(cli: Cli) -> std::result::Result<u8, Failure> {
    let file = match &cli.opts.config {
        Some(path) => read_config(path)?,
        None => FileConfig::default(),
    };
    let cfg = resolve(&cli.opts, &file)?;
    match cli.command {
        Command::Describe => {
            emit(&cfg, &describe(&cfg)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify { suite } => {
            let suite = suite.or(file.suite).unwrap_or(Suite::All);
            let report = run_suite(&cfg, suite)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
            emit(&cfg, &(text + "\n"))?;
            Ok(if report.failed == 0 { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Sample { what } => {
            let what = what.or(file.what).unwrap_or(What::Wavefunction);
            emit(&cfg, &sample(&cfg, what)?)?;
            Ok(EXIT_OK)
        }
        Command::Coherent => {
            emit(&cfg, &coherent(&cfg)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn read_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse("config", e.to_string()))
}

fn resolve(opts: &Options, file: &FileConfig) -> Result<RunConfig> {
    let family = resolve_family(opts, file)?;
    let z_text = opts.z.clone().or_else(|| file.z.clone());
    let z = match z_text {
        Some(t) => t
            .trim()
            .parse::<Complex64>()
            .map_err(|_| Error::parse("z", format!("`{t}` is not a complex number")))?,
        None => Complex64::new(1.0, 0.0),
    };
    let sign = match opts.sign.as_ref().or(file.sign.as_ref()) {
        Some(t) => MapSign::parse(t)?,
        None if family.sigma().degree() == Some(2) => MapSign::Minus,
        None => MapSign::Plus,
    };
    let mut tolerances = Tolerances::default();
    for (name, value) in &file.tol {
        tolerances.tighten(name, *value)?;
    }
    for item in &opts.tols {
        let (name, value) = split_pair("tol", item)?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse("tol", format!("`{value}` is not a number")))?;
        tolerances.tighten(name, value)?;
    }
    Ok(RunConfig {
        family,
        l: opts.l.or(file.l).unwrap_or(2),
        m: opts.m.or(file.m).unwrap_or(0),
        z,
        trunc: opts.trunc.or(file.trunc).unwrap_or(60),
        grid_n: opts.grid_n.or(file.grid_n).unwrap_or(201),
        sign,
        format: opts.format.or(file.format).unwrap_or(Format::Json),
        out: opts.out.clone().or_else(|| file.out.clone()),
        tolerances,
    })
}

fn split_pair<'a>(field: &str, item: &'a str) -> Result<(&'a str, &'a str)> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::parse(field, format!("expected name=value, got `{item}`")))
}

fn resolve_family(opts: &Options, file: &FileConfig) -> Result<Family> {
    if let Some(arg) = &opts.family {
        return family_from_arg(arg);
    }
    if let Some(name) = &opts.preset {
        let mut params = BTreeMap::new();
        for item in &opts.params {
            let (k, v) = split_pair("param", item)?;
            params.insert(k.to_string(), parse_rational(v).map_err(|e| Error::parse(format!("param.{k}"), e.to_string()))?);
        }
        return Preset::from_name(name, &params)?.build();
    }
    if let Some(value) = &file.family {
        return match value {
            Value::String(s) => family_from_arg(s),
            v => family_from_json(v),
        };
    }
    if let Some(name) = &file.preset {
        let mut params: BTreeMap<String, Rational> = BTreeMap::new();
        for (k, v) in &file.params {
            let r = rational_from_json(v).map_err(|e| Error::parse(format!("params.{k}"), e.to_string()))?;
            params.insert(k.clone(), r);
        }
        return Preset::from_name(name, &params)?.build();
    }
    Err(Error::parse("family", "no family given; use --family or --preset"))
}

/// Inline JSON when the text starts with `{`, otherwise a file path.
fn family_from_arg(arg: &str) -> Result<Family> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg)?
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::parse("family", e.to_string()))?;
    family_from_json(&value)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn float_value(x: f64) -> Value {
    match format_float(x).parse::<serde_json::Number>() {
        Ok(n) if x.is_finite() => Value::Number(n),
        _ => Value::Null,
    }
}

fn to_json_text(v: &Value) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Internal(e.to_string()))
}

fn describe(cfg: &RunConfig) -> Result<String> {
    let f = &cfg.family;
    let top = cfg.l.max(10);
    let lambdas: Vec<String> = (0..=top).map(|l| format_rational(&f.eigenvalue(l))).collect();
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("l,eigenvalue\n");
            for (l, v) in lambdas.iter().enumerate() {
                out.push_str(&format!("{l},{v}\n"));
            }
            Ok(out)
        }
        Format::Json => to_json_text(&json!({
            "family": f.descriptor(),
            "class_tag": f.class_tag().to_string(),
            "weight": f.weight().closed_form(),
            "eigenvalues": lambdas,
            "algebra": classify_algebra(f).algebra.to_string(),
        })),
    }
}

/// Columns as a CSV table or a JSON object of arrays.
fn columns_output(cfg: &RunConfig, names: &[&str], columns: &[Vec<f64>]) -> Result<String> {
    let rows = (0..columns[0].len()).map(|i| columns.iter().map(|c| c[i]).collect());
    match cfg.format {
        Format::Csv => Ok(csv_table(names, rows)),
        Format::Json => {
            let obj: serde_json::Map<String, Value> = names
                .iter()
                .zip(columns)
                .map(|(n, c)| (n.to_string(), Value::Array(c.iter().map(|&x| float_value(x)).collect())))
                .collect();
            to_json_text(&Value::Object(obj))
        }
    }
}

fn sample(cfg: &RunConfig, what: What) -> Result<String> {
    let f = &cfg.family;
    if what == What::Associated || what == What::Coherent {
        let grid = sample_grid(f, cfg.grid_n)?;
        return if what == What::Associated {
            let phi = associated_function(f, cfg.l, cfg.m)?.value;
            let values: Vec<f64> = grid.iter().map(|&s| phi.eval_f64(s)).collect();
            columns_output(cfg, &["s", "phi"], &[grid, values])
        } else {
            let cs = coherent_state(f, cfg.m, cfg.z, cfg.trunc)?;
            let prof = coherent_profile(&cs, f, &grid)?;
            let re = prof.iter().map(|c| c.re).collect();
            let im = prof.iter().map(|c| c.im).collect();
            columns_output(cfg, &["s", "re", "im"], &[grid, re, im])
        };
    }
    let sys = SchrodingerSystem::new(f.clone(), cfg.sign, cfg.m)?;
    let grid = sys.x_grid(cfg.grid_n)?;
    let (name, values) = match what {
        What::Wavefunction => ("psi", sys.wavefunction(cfg.l, cfg.m, &grid)?),
        What::Potential => ("V", sys.potential(cfg.m, &grid)?),
        What::Superpotential => ("W", sys.superpotential(cfg.m, &grid)?),
        _ => unreachable!(),
    };
    columns_output(cfg, &["x", name], &[grid, values])
}

fn coherent(cfg: &RunConfig) -> Result<String> {
    let cs = coherent_state(&cfg.family, cfg.m, cfg.z, cfg.trunc)?;
    match cfg.format {
        Format::Csv => {
            let rows = cs.coeffs.iter().enumerate().map(|(n, c)| vec![n as f64, c.re, c.im]);
            Ok(csv_table(&["n", "re", "im"], rows))
        }
        Format::Json => {
            let coeffs: Vec<Value> = cs
                .coeffs
                .iter()
                .map(|c| json!([float_value(c.re), float_value(c.im)]))
                .collect();
            to_json_text(&json!({
                "family": cfg.family.label(),
                "m": cs.m,
                "z": [float_value(cs.z.re), float_value(cs.z.im)],
                "truncation": cs.truncation,
                "normalizer": float_value(cs.normalizer),
                "normalizer_squared": float_value(cs.normalizer_squared),
                "residual": float_value(cs.residual),
                "coeffs": coeffs,
            }))
        }
    }
}
