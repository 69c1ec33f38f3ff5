//! Command-line front end.
//!
//! Every subcommand prints to stdout, or with `--out DIR` writes its files plus
//! a `manifest.json` into `DIR`. A `--config FILE` of `key = value` lines is
//! spliced in ahead of the command-line flags, so explicit flags win. Failures
//! print one JSON object `{"error", "message"}` on stderr and exit non-zero.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::ensembles::{EnsembleKind, MatrixRealization};
use crate::error::{Error, Result};
use crate::limits::{
    brute_card, card_a, card_b, card_b_k, irwin_hall_density, limit_var_circulant,
    limit_var_reverse_circulant, limit_var_symmetric_circulant_with, BruteQuery,
    CardinalityFamily, EvenBranchExponent, LimitValue,
};
use crate::montecarlo::{
    run_replicates, standardized_csv, summarize, variance_convergence_with, ExperimentConfig,
    GrowthSchedule,
};
use crate::spectra::{norm_scan, norm_scan_csv, spectrum};

/// Thread-count override for the parallel experiments.
pub const THREADS_ENV: &str = "PATTERNED_RMT_THREADS";

pub const DEFAULT_NORM_GRID: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

#[derive(Debug, Parser)]
#[command(name = "patterned-rmt", version, about = "Patterned random matrix experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form limiting variance ratio.
    #[command(args_override_self = true)]
    Limit(LimitArgs),
    /// Size of a constrained index set.
    #[command(args_override_self = true)]
    Count(CountArgs),
    /// Irwin-Hall density.
    #[command(args_override_self = true)]
    Density(DensityArgs),
    /// Monte Carlo fluctuation report for Tr(A^p).
    #[command(args_override_self = true)]
    Clt(CltArgs),
    /// Variance ratio along a grid of dimensions.
    #[command(args_override_self = true)]
    Variance(VarianceArgs),
    /// Mean spectral norm over sqrt(n ln n) along a grid of dimensions.
    #[command(name = "norm-scan", args_override_self = true)]
    NormScan(NormScanArgs),
    /// Eigenvalues (or the matrix itself) of one realization.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Directory receiving the output files and their manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<EnsembleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct LimitArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: EnsembleKind,
    /// Power(s); for the reverse circulant, half the matrix power.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, required = true)]
    pub p: Vec<u32>,
    /// Power-of-two reading for even symmetric circulant powers.
    #[arg(long, default_value = "doubled")]
    pub reading: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// A, B or Bk.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub p: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<i64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub n: u64,
    /// Also count by direct enumeration.
    #[arg(long)]
    pub brute: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct CltArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: EnsembleKind,
    #[arg(long)]
    pub n: usize,
    /// Fixed power; ignored with `--p-schedule`.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Growth coefficient c in p(n) = max(2, floor(c ln n / ln ln n)).
    #[arg(long)]
    pub p_schedule: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct VarianceArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: EnsembleKind,
    #[arg(long)]
    pub p: u32,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, required = true)]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: u64,
    /// Add the exact variance ratio where the expansion is affordable.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct NormScanArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: EnsembleKind,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: EnsembleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Dump the matrix instead of its eigenvalues.
    #[arg(long)]
    pub matrix: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at_unix: u64,
    pub finished_at_unix: u64,
    pub outputs: Vec<String>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Parses a flat `key = value` file into flag arguments.
pub fn config_arguments(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(Error::Usage(format!("config line {}: invalid key", lineno + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

/// Inserts config-file flags right after the subcommand name.
fn splice_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path: Option<String> = None;
    for (i, a) in args.iter().enumerate() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = args.get(i + 1).map(|p| p.to_string_lossy().into_owned());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Usage(format!("cannot read config {path}: {e}")))?;
    let extra = config_arguments(&text)?;
    // the subcommand is the first argument after the program name
    if args.len() < 2 {
        return Ok(args);
    }
    let mut out: Vec<OsString> = args[..2].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
        // a pool built earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

struct Output {
    name: String,
    content: String,
}

fn emit(
    command: &str,
    parameters: impl Serialize,
    seed: Option<u64>,
    common: &Common,
    started: u64,
    outputs: Vec<Output>,
    stdout: &mut dyn Write,
) -> Result<()> {
    match &common.out {
        None => {
            // only the primary output goes to stdout
            if let Some(first) = outputs.first() {
                stdout.write_all(first.content.as_bytes())?;
                if !first.content.ends_with('\n') {
                    stdout.write_all(b"\n")?;
                }
            }
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut written = Vec::new();
            for o in &outputs {
                let path = dir.join(&o.name);
                std::fs::write(&path, &o.content)?;
                written.push(path.display().to_string());
            }
            let manifest = RunManifest {
                command: command.to_string(),
                parameters: serde_json::to_value(parameters)?,
                seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                started_at_unix: started,
                finished_at_unix: unix_now(),
                outputs: written,
            };
            std::fs::write(
                dir.join("manifest.json"),
                serde_json::to_string_pretty(&manifest)? + "\n",
            )?;
        }
    }
    Ok(())
}

fn json_output(name: &str, value: &impl Serialize) -> Result<Output> {
    Ok(Output {
        name: format!("{name}.json"),
        content: serde_json::to_string_pretty(value)? + "\n",
    })
}

fn csv_output(name: &str, content: String) -> Output {
    Output {
        name: format!("{name}.csv"),
        content,
    }
}

fn limit_value(kind: EnsembleKind, p: u32, reading: EvenBranchExponent) -> Result<LimitValue> {
    match kind {
        EnsembleKind::Circulant => limit_var_circulant(p),
        EnsembleKind::ReverseCirculant => limit_var_reverse_circulant(p),
        EnsembleKind::SymmetricCirculant => limit_var_symmetric_circulant_with(p, reading),
        EnsembleKind::Hankel => Err(Error::UnsupportedLimit("the Hankel ensemble".into())),
    }
}

fn cmd_limit(args: &LimitArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    let reading: EvenBranchExponent = args.reading.parse()?;
    let values = args
        .p
        .iter()
        .map(|&p| limit_value(args.kind, p, reading))
        .collect::<Result<Vec<_>>>()?;
    let method = match args.kind {
        EnsembleKind::ReverseCirculant => "closed form, exact rational; p is half the matrix power",
        _ => "closed form, exact rational",
    };
    let output = match args.common.format {
        Format::Json => {
            let records: Vec<_> = values
                .iter()
                .map(|v| {
                    json!({
                        "inputs": {"kind": args.kind, "p": v.p, "reading": reading},
                        "value": v.value,
                        "exact": v.exact.to_string(),
                        "parity": v.parity,
                        "method": method,
                    })
                })
                .collect();
            if records.len() == 1 {
                json_output("limit", &records[0])?
            } else {
                json_output("limit", &records)?
            }
        }
        Format::Csv => {
            let mut csv = String::from("kind,p,value,exact\n");
            for v in &values {
                csv.push_str(&format!("{},{},{:?},{}\n", v.kind, v.p, v.value, v.exact));
            }
            csv_output("limit", csv)
        }
    };
    emit("limit", args, None, &args.common, started, vec![output], stdout)
}

fn cmd_count(args: &CountArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    let family: CardinalityFamily = args.family.parse()?;
    let need_s = || {
        args.s
            .ok_or_else(|| Error::Usage(format!("family {} needs --s", args.family)))
    };
    let (result, query, note) = match family {
        CardinalityFamily::A => {
            let s = need_s()?;
            let note = (!crate::limits::a_level_in_range(args.p, s))
                .then(|| format!("s = {s} lies outside 0..={}", args.p as i64 - 1));
            (card_a(args.p, s, args.n)?, BruteQuery::A { p: args.p, s }, note)
        }
        CardinalityFamily::B => {
            let s = need_s()?;
            let note = (!crate::limits::b_level_in_range(args.p, s)).then(|| {
                let m = args.p as i64 - 1;
                format!("s = {s} lies outside -{m}..={m}")
            });
            (card_b(args.p, s, args.n)?, BruteQuery::B { p: args.p, s }, note)
        }
        CardinalityFamily::BK => {
            let k = args
                .k
                .ok_or_else(|| Error::Usage("family Bk needs --k".into()))?;
            (card_b_k(args.p, k, args.n)?, BruteQuery::BK { p: args.p, k }, None)
        }
    };
    let brute = if args.brute {
        Some(brute_card(query, args.n)?)
    } else {
        None
    };
    let count_json = |c: &num_bigint::BigInt| match u64::try_from(c) {
        Ok(v) => json!(v),
        Err(_) => json!(c.to_string()),
    };
    let output = match args.common.format {
        Format::Json => {
            let mut record = json!({
                "inputs": {"family": family, "p": args.p, "s": args.s, "k": args.k, "n": args.n},
                "value": count_json(&result.count),
                "method": "generating-function closed form",
            });
            if let Some(b) = &brute {
                record["brute"] = count_json(&b.count);
                record["equal"] = json!(b.count == result.count);
            }
            if let Some(note) = &note {
                record["note"] = json!(note);
            }
            json_output("count", &record)?
        }
        Format::Csv => {
            let mut csv = String::from("family,p,s,k,n,count,brute,equal\n");
            let opt = |v: Option<String>| v.unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                args.family,
                args.p,
                opt(args.s.map(|s| s.to_string())),
                opt(args.k.map(|k| k.to_string())),
                args.n,
                result.count,
                opt(brute.as_ref().map(|b| b.count.to_string())),
                opt(brute.as_ref().map(|b| (b.count == result.count).to_string())),
            ));
            csv_output("count", csv)
        }
    };
    emit("count", args, None, &args.common, started, vec![output], stdout)
}

fn cmd_density(args: &DensityArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    if args.p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let values: Vec<(f64, f64)> = args
        .x
        .iter()
        .map(|&x| (x, irwin_hall_density(args.p, x)))
        .collect();
    let output = match args.common.format {
        Format::Json => {
            let records: Vec<_> = values
                .iter()
                .map(|&(x, f)| {
                    json!({
                        "inputs": {"p": args.p, "x": x},
                        "value": f,
                        "method": "exact rational alternating sum",
                    })
                })
                .collect();
            if records.len() == 1 {
                json_output("density", &records[0])?
            } else {
                json_output("density", &records)?
            }
        }
        Format::Csv => {
            let mut csv = String::from("p,x,density\n");
            for (x, f) in values {
                csv.push_str(&format!("{},{x:?},{f:?}\n", args.p));
            }
            csv_output("density", csv)
        }
    };
    emit("density", args, None, &args.common, started, vec![output], stdout)
}

fn cmd_clt(args: &CltArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    let config = match args.p_schedule {
        Some(c) => ExperimentConfig::with_growth(
            args.kind,
            args.n,
            GrowthSchedule::new(c)?,
            args.replicates,
            args.seed,
        )?,
        None => ExperimentConfig::new(args.kind, args.n, args.p, args.replicates, args.seed)?,
    };
    let samples = run_replicates(&config)?;
    let report = summarize(&samples, &config)?;
    let mut outputs = vec![json_output("clt_report", &report)?];
    if args.common.out.is_some() {
        outputs.push(csv_output("samples", standardized_csv(&samples)?));
    }
    emit("clt", args, Some(args.seed), &args.common, started, outputs, stdout)
}

fn cmd_variance(args: &VarianceArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    let table = variance_convergence_with(
        args.kind,
        args.p,
        &args.n_grid,
        args.replicates,
        args.seed,
        args.exact,
    )?;
    let output = match args.common.format {
        Format::Csv => csv_output("variance", table.to_csv()),
        Format::Json => json_output("variance", &table)?,
    };
    emit("variance", args, Some(args.seed), &args.common, started, vec![output], stdout)
}

fn cmd_norm_scan(args: &NormScanArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    let grid = args
        .n_grid
        .clone()
        .unwrap_or_else(|| DEFAULT_NORM_GRID.to_vec());
    let rows = norm_scan(args.kind, &grid, args.replicates, args.seed)?;
    let output = match args.common.format {
        Format::Csv => csv_output("norm_scan", norm_scan_csv(&rows)),
        Format::Json => json_output("norm_scan", &rows)?,
    };
    emit("norm-scan", args, Some(args.seed), &args.common, started, vec![output], stdout)
}

fn cmd_spectrum(args: &SpectrumArgs, started: u64, stdout: &mut dyn Write) -> Result<()> {
    let real = MatrixRealization::sample(args.kind, args.n, args.seed, args.stream)?;
    let output = match (args.matrix, args.common.format) {
        (true, Format::Csv) => csv_output("matrix", real.to_csv()?),
        (true, Format::Json) => Output {
            name: "matrix.json".into(),
            content: real.to_json()? + "\n",
        },
        (false, Format::Json) => Output {
            name: "spectrum.json".into(),
            content: spectrum(&real)?.to_json()? + "\n",
        },
        (false, Format::Csv) => {
            let mut csv = String::from("k,re,im\n");
            for (i, z) in spectrum(&real)?.eigenvalues.iter().enumerate() {
                csv.push_str(&format!("{},{:?},{:?}\n", i + 1, z.re, z.im));
            }
            csv_output("spectrum", csv)
        }
    };
    emit("spectrum", args, Some(args.seed), &args.common, started, vec![output], stdout)
}

/// Parses `args` (program name first) and runs the selected subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = splice_config(args.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            Error::Usage(e.to_string())
        }
        _ => Error::Usage(condense(&e.to_string())),
    })?;
    configure_threads()?;
    let started = unix_now();
    match &cli.command {
        Command::Limit(a) => cmd_limit(a, started, stdout),
        Command::Count(a) => cmd_count(a, started, stdout),
        Command::Density(a) => cmd_density(a, started, stdout),
        Command::Clt(a) => cmd_clt(a, started, stdout),
        Command::Variance(a) => cmd_variance(a, started, stdout),
        Command::NormScan(a) => cmd_norm_scan(a, started, stdout),
        Command::Spectrum(a) => cmd_spectrum(a, started, stdout),
    }
}

/// Clap's message without the usage and help trailer, on one line.
fn condense(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .filter(|l| !l.is_empty())
        .map(|l| l.trim_start_matches("error: "))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Single-line JSON diagnostic for `err`.
pub fn error_json(err: &Error) -> String {
    json!({"error": err.kind(), "message": err.to_string()}).to_string()
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    // help and version go to stdout with a zero exit
    if let Err(e) = Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(argv, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

/// Reads a manifest written by a previous run.
pub fn read_manifest(path: &Path) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
