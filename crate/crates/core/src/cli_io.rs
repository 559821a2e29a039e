//! Command-line surface: argument and config-file parsing, result tables,
//! and the run manifest.
//!
//! Result tables come in two formats with the same fields:
//!
//! * CSV: a cell table with columns [`CELL_COLUMNS`], a blank line, then a
//!   fit table with columns [`FIT_COLUMNS`] (sizes joined with `;`). When the
//!   destination is a file, the manifest goes to `<file>.manifest.json`.
//! * JSON: `{ "manifest": ..., "cells": [...], "fits": [...], "failures": [...] }`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::{sample_depth, LambdaParam};
use crate::error::{Error, Result};
use crate::experiment::{
    fit_scaling, run_campaign_with_workers, CampaignResult, CellFailure, EnergyStats,
    ExperimentConfig, Protocol, ScalingFit, Starts,
};
use crate::oracle::brute_force_ground_state;
use crate::seed::Stream;
use crate::sk_model::{InstanceFile, GENERATOR_VERSION};

pub const CELL_COLUMNS: [&str; 10] = [
    "protocol",
    "n",
    "lambda",
    "nreal",
    "starts_or_budget",
    "runs",
    "tau",
    "tau_stderr",
    "h_n",
    "h_n_stderr",
];

pub const FIT_COLUMNS: [&str; 6] = [
    "lambda",
    "exponent",
    "prefactor",
    "r_squared",
    "sizes_used",
    "sizes_excluded",
];

/// Relative `--out` paths are resolved under this directory when set.
pub const ENV_OUT_DIR: &str = "SKDESCENT_OUT_DIR";
/// Worker threads when `--workers` is absent.
pub const ENV_WORKERS: &str = "SKDESCENT_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "skdescent",
    version,
    about = "Lambda-interpolated greedy/reluctant descent on SK spin glasses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a measurement campaign over a grid of sizes and lambdas.
    Run(RunArgs),
    /// Re-fit scaling exponents from an existing result CSV.
    Fit(FitArgs),
    /// Exhaustive ground state of a small instance.
    Oracle(OracleArgs),
    /// Print draws of the move-depth distribution, one per line.
    SampleDepth(SampleDepthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `fixed-starts` or `fixed-budget`.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub nreal: Option<u32>,
    /// Restarts per realization, or `N` for one per spin.
    #[arg(long)]
    pub starts: Option<String>,
    /// Work units per realization for the fixed-budget protocol.
    #[arg(long)]
    pub budget_flips: Option<u64>,
    /// Extra wall-clock cap per realization (non-reproducible).
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sizes left out of the scaling fits.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Option<Vec<usize>>,
    /// Output path, `-` for standard output (default).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for `.json` paths, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Result CSV written by `run`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<usize>,
    /// Only fit these lambdas.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, required_unless_present = "instance")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instance file to load instead of generating from `--n`/`--seed`.
    #[arg(long, conflicts_with = "n")]
    pub instance: Option<PathBuf>,
    /// Also write the instance (with its matrix) to this path.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleDepthArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Seeds in TOML: integers above `i64::MAX` are written as strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SeedRepr {
    Int(i64),
    Str(String),
}

impl SeedRepr {
    fn from_u64(v: u64) -> Self {
        i64::try_from(v).map_or_else(|_| SeedRepr::Str(v.to_string()), SeedRepr::Int)
    }

    fn to_u64(&self) -> Result<u64> {
        match self {
            SeedRepr::Int(v) => u64::try_from(*v)
                .map_err(|_| Error::usage("master_seed", format!("must be non-negative, got {v}"))),
            SeedRepr::Str(s) => s.trim().parse().map_err(|_| {
                Error::usage(
                    "master_seed",
                    format!("not a 64-bit unsigned integer: `{s}`"),
                )
            }),
        }
    }
}

/// On-disk config: every key optional, unknown keys rejected.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol: Option<Protocol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nreal: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    starts_per_realization: Option<Starts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flip_budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", alias = "seed")]
    master_seed: Option<SeedRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exclude_sizes_from_fit: Option<Vec<usize>>,
}

/// Renders a config in the TOML form accepted by `run --config`.
pub fn config_to_toml(config: &ExperimentConfig) -> String {
    let file = ConfigFile {
        protocol: Some(config.protocol),
        sizes: Some(config.sizes.clone()),
        lambdas: Some(config.lambdas.clone()),
        nreal: Some(config.nreal),
        starts_per_realization: Some(config.starts_per_realization),
        flip_budget: config.flip_budget,
        wall_clock_seconds: config.wall_clock_seconds,
        master_seed: Some(SeedRepr::from_u64(config.master_seed)),
        exclude_sizes_from_fit: Some(config.exclude_sizes_from_fit.clone()),
    };
    toml::to_string(&file).expect("config is always representable in TOML")
}

fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| {
        let field = e
            .message()
            .split('`')
            .nth(1)
            .unwrap_or("config")
            .to_string();
        Error::usage(field, format!("{}: {}", path.display(), e.message()))
    })
}

/// Defaults, then the config file, then command-line flags; validated.
pub fn parse_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let file = read_config_file(path)?;
        if let Some(v) = file.protocol {
            config.protocol = v;
        }
        if let Some(v) = file.sizes {
            config.sizes = v;
        }
        if let Some(v) = file.lambdas {
            config.lambdas = v;
        }
        if let Some(v) = file.nreal {
            config.nreal = v;
        }
        if let Some(v) = file.starts_per_realization {
            config.starts_per_realization = v;
        }
        if file.flip_budget.is_some() {
            config.flip_budget = file.flip_budget;
        }
        if file.wall_clock_seconds.is_some() {
            config.wall_clock_seconds = file.wall_clock_seconds;
        }
        if let Some(v) = file.master_seed {
            config.master_seed = v.to_u64()?;
        }
        if let Some(v) = file.exclude_sizes_from_fit {
            config.exclude_sizes_from_fit = v;
        }
    }
    if let Some(p) = &args.protocol {
        config.protocol = p.parse()?;
    }
    if let Some(v) = &args.sizes {
        config.sizes = v.clone();
    }
    if let Some(v) = &args.lambdas {
        config.lambdas = v.clone();
    }
    if let Some(v) = args.nreal {
        config.nreal = v;
    }
    if let Some(s) = &args.starts {
        config.starts_per_realization = s.parse()?;
    }
    if args.budget_flips.is_some() {
        config.flip_budget = args.budget_flips;
    }
    if args.budget_seconds.is_some() {
        config.wall_clock_seconds = args.budget_seconds;
    }
    if let Some(v) = args.seed {
        config.master_seed = v;
    }
    if let Some(v) = &args.exclude {
        config.exclude_sizes_from_fit = v.clone();
    }
    config.validate()?;
    Ok(config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_echo: ExperimentConfig,
    pub build_version: String,
    pub generator_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(
        config: &ExperimentConfig,
        started_at: String,
        finished_at: String,
        warnings: Vec<String>,
    ) -> Self {
        RunManifest {
            config_echo: config.clone(),
            build_version: env!("CARGO_PKG_VERSION").to_string(),
            generator_version: GENERATOR_VERSION.to_string(),
            started_at,
            finished_at,
            warnings,
        }
    }
}

/// One row of the cell table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub protocol: Protocol,
    pub n: usize,
    pub lambda: f64,
    pub nreal: u32,
    pub starts_or_budget: u64,
    pub runs: u64,
    pub tau: Option<f64>,
    pub tau_stderr: Option<f64>,
    pub h_n: Option<f64>,
    pub h_n_stderr: Option<f64>,
}

impl From<&EnergyStats> for CellRow {
    fn from(s: &EnergyStats) -> Self {
        CellRow {
            protocol: s.protocol,
            n: s.n,
            lambda: s.lambda,
            nreal: s.nreal,
            starts_or_budget: s.starts_or_budget,
            runs: s.runs,
            tau: s.tau,
            tau_stderr: s.tau_stderr,
            h_n: s.h_n,
            h_n_stderr: s.h_n_stderr,
        }
    }
}

#[derive(Debug, Serialize)]
struct FitCsvRow<'a> {
    lambda: f64,
    exponent: f64,
    prefactor: f64,
    r_squared: f64,
    sizes_used: &'a str,
    sizes_excluded: &'a str,
}

fn join_sizes(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn write_fit_table<W: Write>(fits: &[ScalingFit], w: &mut W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(FIT_COLUMNS)?;
    for f in fits {
        let used = join_sizes(&f.sizes_used);
        let excluded = join_sizes(&f.sizes_excluded);
        out.serialize(FitCsvRow {
            lambda: f.lambda,
            exponent: f.exponent,
            prefactor: f.prefactor,
            r_squared: f.r_squared,
            sizes_used: &used,
            sizes_excluded: &excluded,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the two-section CSV (cells, blank line, fits).
pub fn write_csv<W: Write>(result: &CampaignResult, mut w: W) -> Result<()> {
    {
        let mut out = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut w);
        out.write_record(CELL_COLUMNS)?;
        for cell in &result.cells {
            out.serialize(CellRow::from(cell))?;
        }
        out.flush()?;
    }
    writeln!(w)?;
    write_fit_table(&result.fits, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    manifest: &'a RunManifest,
    cells: Vec<CellRow>,
    fits: &'a [ScalingFit],
    failures: &'a [CellFailure],
}

pub fn write_json<W: Write>(
    result: &CampaignResult,
    manifest: &RunManifest,
    mut w: W,
) -> Result<()> {
    let doc = JsonDocument {
        manifest,
        cells: result.cells.iter().map(CellRow::from).collect(),
        fits: &result.fits,
        failures: &result.failures,
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    pub fn from_arg(out: Option<&Path>, out_dir: Option<&Path>) -> Self {
        match out {
            None => Destination::Stdout,
            Some(p) if p.as_os_str() == "-" => Destination::Stdout,
            Some(p) => match out_dir {
                Some(dir) if p.is_relative() => Destination::File(dir.join(p)),
                _ => Destination::File(p.to_path_buf()),
            },
        }
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the result tables; for CSV files the manifest goes to a sidecar.
pub fn emit_results(
    result: &CampaignResult,
    manifest: &RunManifest,
    format: OutputFormat,
    destination: &Destination,
) -> Result<()> {
    if result.cells.is_empty() && result.failures.is_empty() {
        return Err(Error::invalid("no results to emit"));
    }
    match destination {
        Destination::Stdout => {
            let stdout = io::stdout();
            let lock = stdout.lock();
            match format {
                OutputFormat::Csv => write_csv(result, lock),
                OutputFormat::Json => write_json(result, manifest, lock),
            }
        }
        Destination::File(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            let w = BufWriter::new(File::create(path)?);
            match format {
                OutputFormat::Csv => {
                    write_csv(result, w)?;
                    let side = BufWriter::new(File::create(manifest_path(path))?);
                    serde_json::to_writer_pretty(side, manifest)?;
                    Ok(())
                }
                OutputFormat::Json => write_json(result, manifest, w),
            }
        }
    }
}

/// Reads the cell table (first section) of a CSV written by [`write_csv`].
pub fn read_cells_csv<R: Read>(r: R) -> Result<Vec<CellRow>> {
    let mut section = String::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if line.trim().is_empty() {
            break;
        }
        section.push_str(&line);
        section.push('\n');
    }
    let mut rdr = csv::Reader::from_reader(section.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CELL_COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected cell table header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Reads the fit table of a CSV written by [`write_csv`] (second section) or
/// by the `fit` subcommand (sole section).
pub fn read_fits_csv<R: Read>(r: R) -> Result<Vec<ScalingFit>> {
    #[derive(Deserialize)]
    struct Row {
        lambda: f64,
        exponent: f64,
        prefactor: f64,
        r_squared: f64,
        sizes_used: String,
        sizes_excluded: String,
    }
    fn split(s: &str) -> Result<Vec<usize>> {
        s.split(';')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse()
                    .map_err(|e| Error::Parse(format!("size `{t}`: {e}")))
            })
            .collect()
    }
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    let section = if text.starts_with(&FIT_COLUMNS.join(",")) {
        text.as_str()
    } else {
        text.split_once("\n\n")
            .map(|(_, b)| b)
            .ok_or_else(|| Error::Parse("missing fit table".into()))?
    };
    let mut rdr = csv::Reader::from_reader(section.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(FIT_COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected fit table header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut fits = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        fits.push(ScalingFit {
            lambda: row.lambda,
            exponent: row.exponent,
            prefactor: row.prefactor,
            r_squared: row.r_squared,
            sizes_used: split(&row.sizes_used)?,
            sizes_excluded: split(&row.sizes_excluded)?,
        });
    }
    Ok(fits)
}

/// Fits `tau ~ N^alpha` per lambda over the rows of a cell table.
pub fn refit(rows: &[CellRow], exclude: &[usize], only: Option<&[f64]>) -> Result<Vec<ScalingFit>> {
    let mut by_lambda: BTreeMap<u64, (f64, Vec<(usize, f64)>)> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rows {
        if only.is_some_and(|ls| !ls.contains(&row.lambda)) {
            continue;
        }
        let Some(tau) = row.tau else { continue };
        let key = row.lambda.to_bits();
        if !by_lambda.contains_key(&key) {
            order.push(key);
        }
        by_lambda
            .entry(key)
            .or_insert((row.lambda, Vec::new()))
            .1
            .push((row.n, tau));
    }
    order
        .into_iter()
        .map(|k| {
            let (lambda, points) = &by_lambda[&k];
            fit_scaling(*lambda, points, exclude)
        })
        .collect()
}

fn worker_count(flag: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return Ok(w.max(1));
    }
    match std::env::var(ENV_WORKERS) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|_| Error::usage(ENV_WORKERS, format!("not a positive integer: `{v}`"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = parse_config(args)?;
    let workers = worker_count(args.workers)?;
    let out_dir = std::env::var_os(ENV_OUT_DIR).map(PathBuf::from);
    let destination = Destination::from_arg(args.out.as_deref(), out_dir.as_deref());
    let format = args.format.unwrap_or(match &destination {
        Destination::File(p) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });

    let started_at = now();
    let result = run_campaign_with_workers(&config, workers)?;
    let manifest = RunManifest::new(&config, started_at, now(), result.warnings.clone());
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    emit_results(&result, &manifest, format, &destination)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let rows = read_cells_csv(File::open(&args.input)?)?;
    let fits = refit(&rows, &args.exclude, args.lambdas.as_deref())?;
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match args.format {
        OutputFormat::Csv => write_fit_table(&fits, &mut lock),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut lock, &fits)?;
            writeln!(lock)?;
            Ok(())
        }
    }
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let inst = match (&args.instance, args.n) {
        (Some(path), _) => InstanceFile::read_from(BufReader::new(File::open(path)?))?,
        (None, Some(n)) => InstanceFile::new(n, args.seed, true)?,
        (None, None) => return Err(Error::usage("n", "either --n or --instance is required")),
    };
    let couplings = inst.couplings()?;
    if let Some(path) = &args.dump {
        let full = InstanceFile {
            matrix: Some(couplings.clone()),
            ..inst.clone()
        };
        full.write_to(BufWriter::new(File::create(path)?))?;
    }
    let gt = brute_force_ground_state(&couplings)?;
    #[derive(Serialize)]
    struct Report<'a> {
        n: usize,
        seed: u64,
        generator_version: &'a str,
        #[serde(flatten)]
        truth: &'a crate::oracle::GroundTruth,
    }
    let report = Report {
        n: inst.n,
        seed: inst.seed,
        generator_version: &inst.generator_version,
        truth: &gt,
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, &report)?;
    writeln!(lock)?;
    Ok(())
}

fn cmd_sample_depth(args: &SampleDepthArgs) -> Result<()> {
    let lambda =
        LambdaParam::new(args.lambda).map_err(|e| Error::usage("lambda", e.to_string()))?;
    let mut stream = Stream::new(args.seed);
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    for _ in 0..args.count {
        writeln!(w, "{}", sample_depth(lambda, &mut stream))?;
    }
    w.flush()?;
    Ok(())
}

/// Executes a parsed command line.
pub fn run_cli(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::SampleDepth(a) => cmd_sample_depth(a),
    }
}
