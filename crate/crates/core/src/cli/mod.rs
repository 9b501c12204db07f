// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line surface. Every subcommand is a thin wrapper over a library
//! call; the argument types live here so they can be parsed in tests.

mod document;
mod ingest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{adjusted_rand, rand_index, Partition};
use crate::simlab::{self, Scenario, ScenarioKind, StudyReport};
use crate::divisive::DivisiveConfig;
use crate::energy::Alpha;

pub use document::{detect, emit_plot_data, round_sig, DetectConfig, EstimateRecord, Method, ResultDocument};
pub use ingest::{ingest_csv, CsvOptions};

/// Environment variable read for the default worker thread count.
pub const THREADS_ENV: &str = "ENERGY_CPD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "energy-cpd", version, about = "Energy-statistic multiple change-point detection")]
pub struct Cli {
    /// Worker threads for permutation replicates (default: available parallelism).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate change points in a CSV time series.
    Detect(DetectArgs),
    /// Run a Monte Carlo study on a simulated scenario.
    Simulate(SimulateArgs),
    /// Compare two sets of change points with the Rand and adjusted Rand indices.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// CSV file with one observation per row.
    #[arg(long)]
    pub input: PathBuf,
    /// First row holds column names.
    #[arg(long)]
    pub header: bool,
    /// Field separator.
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Comma-separated columns to use (1-based positions or header names).
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Impute missing cells from neighbouring rows instead of failing.
    #[arg(long)]
    pub impute: bool,
    /// Hierarchical bisection with permutation tests, or adjacent merging.
    #[arg(long, value_enum, default_value = "divisive")]
    pub method: Method,
    /// Distance exponent α in (0, 2).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Smallest number of observations between change points.
    #[arg(long, default_value_t = crate::divisive::DEFAULT_MIN_SIZE)]
    pub min_size: usize,
    /// Permutations R per significance test.
    #[arg(long, default_value_t = crate::divisive::DEFAULT_PERMUTATIONS)]
    pub perms: usize,
    /// Significance level p0.
    #[arg(long, default_value_t = crate::divisive::DEFAULT_SIGNIFICANCE)]
    pub sig: f64,
    /// Seed for the permutation tests.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial cluster width for the agglomerative method (default: --min-size).
    #[arg(long)]
    pub init_width: Option<usize>,
    /// Upper bound on the number of change points (divisive).
    #[arg(long)]
    pub max_cp: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Directory for per-segment summary tables.
    #[arg(long)]
    pub emit_plot_data: Option<PathBuf>,
    /// Leave the wall-clock duration out of the result.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    UniMean,
    UniVariance,
    UniTail,
    BiMean,
    BiCorrelation,
    DimCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioName,
    /// μ, σ², ν or ρ of the middle cluster (dim-correlation: ρ, default 0.9).
    #[arg(long, allow_negative_numbers = true)]
    pub param: Option<f64>,
    /// Series length, a multiple of 3.
    #[arg(long = "T")]
    pub len: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dimension for dim-correlation.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// dim-correlation: only the first two coordinates change.
    #[arg(long)]
    pub noise: bool,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = crate::divisive::DEFAULT_MIN_SIZE)]
    pub min_size: usize,
    #[arg(long, default_value_t = 199)]
    pub perms: usize,
    #[arg(long, default_value_t = crate::divisive::DEFAULT_SIGNIFICANCE)]
    pub sig: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: ReportFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Reference change points: "100,200", "[100,200]", or a result JSON file.
    #[arg(long, allow_hyphen_values = true)]
    pub truth: String,
    /// Estimated change points, same forms as --truth.
    #[arg(long, allow_hyphen_values = true)]
    pub estimate: String,
    /// Series length.
    #[arg(long = "T")]
    pub len: usize,
}

impl SimulateArgs {
    pub fn scenario(&self) -> Result<Scenario> {
        let need = || {
            self.param
                .ok_or_else(|| Error::invalid("--param is required for this scenario"))
        };
        let kind = match self.scenario {
            ScenarioName::UniMean => ScenarioKind::UniMean { mu: need()? },
            ScenarioName::UniVariance => ScenarioKind::UniVariance { variance: need()? },
            ScenarioName::UniTail => ScenarioKind::UniTail { dof: need()? },
            ScenarioName::BiMean => ScenarioKind::BiMean { mu: need()? },
            ScenarioName::BiCorrelation => ScenarioKind::BiCorrelation { rho: need()? },
            ScenarioName::DimCorrelation => ScenarioKind::DimCorrelation {
                dim: self.d,
                noise: self.noise,
                rho: self.param.unwrap_or(0.9),
            },
        };
        Scenario::new(kind, self.len, self.seed)
    }

    pub fn detector(&self) -> Result<DivisiveConfig> {
        let cfg = DivisiveConfig {
            alpha: Alpha::new(self.alpha)?,
            min_size: self.min_size,
            permutations: self.perms,
            significance: self.sig,
            max_change_points: None,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl DetectArgs {
    pub fn csv_options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::invalid("delimiter must be a single ASCII character"));
        }
        Ok(CsvOptions {
            has_header: self.header,
            delimiter: self.delimiter as u8,
            columns: self.columns.clone(),
            impute: self.impute,
        })
    }

    pub fn config(&self) -> DetectConfig {
        DetectConfig {
            method: self.method,
            alpha: self.alpha,
            min_size: self.min_size,
            permutations: self.perms,
            significance: self.sig,
            max_change_points: self.max_cp,
            init_width: self.init_width,
            seed: self.seed,
        }
    }
}

/// Parses change points given inline or as a path to a result document.
pub fn parse_change_points(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    let path = Path::new(text);
    if !text.is_empty() && path.is_file() {
        return Ok(ResultDocument::from_json(&fs::read_to_string(path)?)?.change_points);
    }
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::invalid(format!("not a change point index: {s:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub rand: f64,
    pub adjusted_rand: f64,
}

pub fn evaluate(truth: &[usize], estimate: &[usize], len: usize) -> Result<EvalReport> {
    let u = Partition::new(truth.to_vec(), len)?;
    let v = Partition::new(estimate.to_vec(), len)?;
    Ok(EvalReport {
        rand: round_sig(rand_index(&u, &v)?),
        adjusted_rand: round_sig(adjusted_rand(&u, &v)?),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let series = ingest_csv(&args.input, &args.csv_options()?)?;
    let start = Instant::now();
    let mut doc = detect(&series, &args.config())?;
    if !args.no_timing {
        doc.duration_s = Some(round_sig(start.elapsed().as_secs_f64()));
    }
    if let Some(dir) = &args.emit_plot_data {
        emit_plot_data(dir, &series, &doc)?;
    }
    write_output(args.output.as_deref(), &doc.to_json()?)
}

pub fn format_reports(reports: &[StudyReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            simlab::write_csv(reports, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports)?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let report = simlab::run_study(&args.scenario()?, args.reps, &args.detector()?)?;
    write_output(args.output.as_deref(), &format_reports(&[report], args.format)?)
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let report = evaluate(
        &parse_change_points(&args.truth)?,
        &parse_change_points(&args.estimate)?,
        args.len,
    )?;
    let mut s = serde_json::to_string_pretty(&report)?;
    s.push('\n');
    write_output(None, &s)
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be >= 1"));
        }
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

/// Process entry point: exit code 0 on success, 1 on detection errors, 2 on
/// usage errors.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidInput(_) if matches!(cli.command, Command::Simulate(_) | Command::Eval(_)) => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn change_point_lists() {
        assert_eq!(parse_change_points("100,200").unwrap(), vec![100, 200]);
        assert_eq!(parse_change_points("[3, 7]").unwrap(), vec![3, 7]);
        assert_eq!(parse_change_points("").unwrap(), Vec::<usize>::new());
        assert!(parse_change_points("1,x").is_err());
    }

    #[test]
    fn eval_examples() {
        let r = evaluate(&[100, 200], &[100, 200], 300).unwrap();
        assert_eq!((r.rand, r.adjusted_rand), (1.0, 1.0));
        assert_eq!(evaluate(&[2], &[1], 4).unwrap().rand, 0.5);
    }

    #[test]
    fn usage_errors() {
        assert!(Cli::try_parse_from(["energy-cpd", "detect"]).is_err());
        assert!(Cli::try_parse_from(["energy-cpd", "simulate", "--scenario", "nope", "--T", "30"]).is_err());
        let c = Cli::try_parse_from(["energy-cpd", "detect", "--input", "x.csv", "--method", "agglo"]).unwrap();
        match c.command {
            Command::Detect(a) => assert_eq!(a.method, Method::Agglo),
            _ => unreachable!(),
        }
    }
}
