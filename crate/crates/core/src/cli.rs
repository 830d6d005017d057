//! `varlen` command-line front end.
//!
//! Each subcommand writes a CSV table and a JSON summary into `--out`. Every
//! CSV starts with a `# {...}` line holding the resolved configuration, and
//! the JSON carries the same keys, so an artifact can be regenerated from its
//! own header. Exit codes: 0 success, 1 usage, 2 numerical or I/O failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::autocorr::{self, FreqGrid, SymbolCount};
use crate::error::Error;
use crate::llr_oracle::{validate_density, WienerConfig};
use crate::output::sig15;
use crate::spectrum::{self, DEFAULT_BETA, DEFAULT_FREQ_RESOLUTION, DEFAULT_TAU_MAX, DEFAULT_TAU_STEP};
use crate::stopping_time::{calibrate_threshold, db_to_ratio, LengthDistribution};
use crate::waveform_sim::{self, MIN_MEANINGFUL_ENSEMBLE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "varlen", version, about = "Spectra of variable-length antipodal signalling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the symbol-length pdf and cdf.
    Pdf(PdfArgs),
    /// Autocorrelation curves: analytic, simulated, or both.
    Acf(AcfArgs),
    /// Power spectral density and occupied bandwidth.
    Psd(PsdArgs),
    /// Cross-check the length law against a simulated LLR random walk.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Channel {
    /// Eb/N0 in dB (equals gamma when E{T} = 1).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "gamma",
          required_unless_present = "gamma")]
    pub gamma_db: Option<f64>,
    /// Raw SNR ratio gamma, for runs with a mean length other than 1.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mean symbol length used to calibrate the threshold L.
    #[arg(long, default_value_t = 1.0)]
    pub target_mean: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PdfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: Channel,
    /// Last tabulated length (defaults to the numerical support).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcfMode {
    AnalyticFinite,
    AnalyticLimit,
    Simulate,
    Compare,
}

/// `K` as an integer or `inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub struct Symbols(pub SymbolCount);

impl FromStr for Symbols {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Self(SymbolCount::Infinite));
        }
        s.parse::<u32>().map(|k| Self(SymbolCount::Finite(k))).map_err(|e| format!("{e}; expected an integer or `inf`"))
    }
}

impl From<Symbols> for String {
    fn from(s: Symbols) -> String {
        match s.0 {
            SymbolCount::Finite(k) => k.to_string(),
            SymbolCount::Infinite => "inf".into(),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AcfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: Channel,
    #[arg(long, value_enum, default_value_t = AcfMode::AnalyticLimit)]
    pub mode: AcfMode,
    /// Observation time t of R(t, tau).
    #[arg(long, default_value_t = 20.0)]
    pub t: f64,
    /// Symbols after the first (K); `inf` for an unbounded train.
    #[arg(long, default_value = "100")]
    pub k_symbols: Symbols,
    /// Realizations for the simulated curve.
    #[arg(long, default_value_t = 100_000)]
    pub ensemble: usize,
    #[arg(long, default_value_t = 2.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau_step: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PsdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: Channel,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    pub tau_max: f64,
    #[arg(long, default_value_t = DEFAULT_TAU_STEP)]
    pub tau_step: f64,
    #[arg(long, default_value_t = DEFAULT_FREQ_RESOLUTION)]
    pub freq_res: f64,
    /// Largest |f| written to the CSV (the OBW always uses the full band).
    #[arg(long, default_value_t = 10.0)]
    pub f_max: f64,
    /// Use fixed-length BPSK (unit symbols) instead of the variable-length train.
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: Channel,
    /// Number of simulated symbols.
    #[arg(long, default_value_t = 50_000)]
    pub ensemble: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(Error),
    Io(std::io::Error),
    /// The command ran but its check did not pass.
    Check(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numerical(e) => {
                write!(f, "numerical failure: {e}")?;
                match e {
                    Error::Truncation { .. } => write!(f, " (increase --tau-max)"),
                    Error::Resolution(_) => write!(f, " (decrease --freq-res or widen the grid)"),
                    Error::WindowExceeded { .. } => write!(f, " (reduce --t)"),
                    _ => Ok(()),
                }
            }
            Self::Io(e) => write!(f, "i/o failure: {e}"),
            Self::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("varlen: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; returns the JSON summary it wrote.
pub fn run(command: &Command) -> Result<Value, CliError> {
    let channel = match command {
        Command::Pdf(a) => &a.channel,
        Command::Acf(a) => &a.channel,
        Command::Psd(a) => &a.channel,
        Command::Validate(a) => &a.channel,
    };
    configure_threads(channel.threads)?;
    std::fs::create_dir_all(&channel.out)?;
    match command {
        Command::Pdf(a) => cmd_pdf(a),
        Command::Acf(a) => cmd_acf(a),
        Command::Psd(a) => cmd_psd(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    {
        // A pool can be installed once per process; later calls keep the first.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {x}")))
    }
}

fn resolve_channel(c: &Channel) -> Result<(LengthDistribution, Map<String, Value>), CliError> {
    positive("target-mean", c.target_mean)?;
    let gamma = match (c.gamma_db, c.gamma) {
        (Some(db), None) => {
            if !db.is_finite() {
                return Err(CliError::Usage(format!("--gamma-db must be finite, got {db}")));
            }
            if c.target_mean != 1.0 {
                return Err(CliError::Usage(
                    "--gamma-db labels Eb/N0 only when E{T} = 1; pass --gamma with --target-mean".into(),
                ));
            }
            db_to_ratio(db)
        }
        (None, Some(g)) => {
            positive("gamma", g)?;
            g
        }
        _ => return Err(CliError::Usage("give exactly one of --gamma-db and --gamma".into())),
    };
    let params = calibrate_threshold(gamma, c.target_mean)?;
    let dist = LengthDistribution::exact(params)?;
    let mut resolved = Map::new();
    resolved.insert("gamma".into(), json!(params.gamma()));
    resolved.insert("threshold_l".into(), json!(params.threshold_l()));
    resolved.insert("mean_t".into(), json!(dist.mean()));
    Ok((dist, resolved))
}

/// Flat JSON object: the command's flags, then resolved values, then results.
fn summary(args: &impl Serialize, resolved: Map<String, Value>, results: Value) -> Value {
    let mut obj = match serde_json::to_value(args).expect("arguments serialize") {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    obj.extend(resolved);
    if let Value::Object(m) = results {
        obj.extend(m);
    }
    Value::Object(obj)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// CSV with a `# {config}` provenance line, a header row and one row per record.
fn write_csv(dir: &Path, name: &str, config: &Value, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    writeln!(w, "# {config}")?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| sig15(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn tau_grid(tau_max: f64, tau_step: f64) -> Result<Vec<f64>, CliError> {
    positive("tau-max", tau_max)?;
    positive("tau-step", tau_step)?;
    let n = (tau_max / tau_step + 1e-9).floor() as usize;
    if n > 50_000_000 {
        return Err(CliError::Usage("tau grid is too large".into()));
    }
    Ok((0..=n).map(|i| i as f64 * tau_step).collect())
}

pub fn cmd_pdf(a: &PdfArgs) -> Result<Value, CliError> {
    let (dist, resolved) = resolve_channel(&a.channel)?;
    let t_max = a.t_max.unwrap_or(dist.upper_support());
    positive("t-max", t_max)?;
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let ts: Vec<f64> = (0..a.points).map(|i| t_max * i as f64 / (a.points - 1) as f64).collect();
    let cdf = dist.cdf_sorted(&ts)?;
    let rows: Vec<Vec<f64>> = ts
        .iter()
        .zip(&cdf)
        .map(|(&t, &c)| Ok(vec![t, dist.pdf(t)?, c]))
        .collect::<Result<_, Error>>()?;
    let config = summary(a, resolved, json!({}));
    write_csv(&a.channel.out, "pdf.csv", &config, &["t", "pdf", "cdf"], &rows)?;
    write_json(&a.channel.out, "pdf.json", &config)?;
    Ok(config)
}

pub fn cmd_acf(a: &AcfArgs) -> Result<Value, CliError> {
    let (dist, resolved) = resolve_channel(&a.channel)?;
    let taus = tau_grid(a.tau_max, a.tau_step)?;
    positive("t", a.t)?;
    let symbols = a.k_symbols.0;
    let finite_count = || match symbols {
        SymbolCount::Finite(k) => Ok(k as usize + 1),
        SymbolCount::Infinite => Err(CliError::Usage("simulation needs a finite --k-symbols".into())),
    };
    if matches!(a.mode, AcfMode::Simulate | AcfMode::Compare) && a.ensemble == 0 {
        return Err(CliError::Usage("--ensemble must be positive".into()));
    }
    let analytic = || -> Result<Vec<f64>, CliError> {
        let grid = FreqGrid::auto(&dist, symbols, a.t)?;
        Ok(autocorr::acf_finite_surface(&dist, &grid, &[a.t], &taus, symbols)?.remove(0).values)
    };
    let out = &a.channel.out;
    match a.mode {
        AcfMode::AnalyticLimit | AcfMode::AnalyticFinite => {
            let values = if a.mode == AcfMode::AnalyticLimit {
                autocorr::acf_limit_curve(&dist, &taus)?.values
            } else {
                analytic()?
            };
            let config = summary(a, resolved, json!({}));
            let rows: Vec<Vec<f64>> = taus.iter().zip(&values).map(|(&t, &r)| vec![t, r]).collect();
            write_csv(out, "acf.csv", &config, &["tau", "r"], &rows)?;
            write_json(out, "acf.json", &config)?;
            Ok(config)
        }
        AcfMode::Simulate => {
            let e = waveform_sim::empirical_acf(&dist, a.t, &taus, finite_count()?, a.ensemble, a.channel.seed)?;
            let config = summary(a, resolved, json!({ "low_ensemble_warning": e.low_ensemble_warning }));
            let rows: Vec<Vec<f64>> = (0..taus.len()).map(|i| vec![taus[i], e.curve.values[i], e.std_errors[i]]).collect();
            write_csv(out, "acf.csv", &config, &["tau", "r", "std_error"], &rows)?;
            write_json(out, "acf.json", &config)?;
            Ok(config)
        }
        AcfMode::Compare => {
            let e = waveform_sim::empirical_acf(&dist, a.t, &taus, finite_count()?, a.ensemble, a.channel.seed)?;
            let exact = analytic()?;
            let mut max_dev = 0.0f64;
            let mut rows = Vec::with_capacity(taus.len());
            for i in 0..taus.len() {
                let dev = e.curve.values[i] - exact[i];
                max_dev = max_dev.max(dev.abs());
                rows.push(vec![taus[i], exact[i], e.curve.values[i], dev, e.std_errors[i]]);
            }
            let config = summary(
                a,
                resolved,
                json!({
                    "low_ensemble_warning": a.ensemble < MIN_MEANINGFUL_ENSEMBLE,
                    "max_abs_deviation": max_dev,
                }),
            );
            write_csv(out, "acf.csv", &config, &["tau", "analytic", "empirical", "deviation", "std_error"], &rows)?;
            write_json(out, "acf.json", &config)?;
            Ok(config)
        }
    }
}

pub fn cmd_psd(a: &PsdArgs) -> Result<Value, CliError> {
    let (dist, resolved) = resolve_channel(&a.channel)?;
    if !(a.beta > 0.0 && a.beta < 1.0) {
        return Err(CliError::Usage(format!("--beta must lie in (0, 1), got {}", a.beta)));
    }
    positive("freq-res", a.freq_res)?;
    positive("f-max", a.f_max)?;
    let taus = tau_grid(a.tau_max, a.tau_step)?;
    // The reference goes through the same transform as the variable-length
    // curve so both bandwidths share one discretization.
    let curve = if a.reference {
        spectrum::triangle_acf(1.0, &taus)
    } else {
        autocorr::acf_limit_curve(&dist, &taus)?
    };
    let s = spectrum::psd_from_acf(&curve, a.freq_res)?;
    let obw = spectrum::occupied_bandwidth(&s, a.beta)?;
    let config = summary(a, resolved, json!({ "obw": obw, "total_power": s.total_power }));
    let shown = s.band_limited(a.f_max);
    let rows: Vec<Vec<f64>> = shown.freqs.iter().zip(&shown.values).map(|(&f, &v)| vec![f, v]).collect();
    write_csv(&a.channel.out, "psd.csv", &config, &["f", "s"], &rows)?;
    write_json(&a.channel.out, "psd.json", &config)?;
    Ok(config)
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<Value, CliError> {
    if a.ensemble == 0 {
        return Err(CliError::Usage("--ensemble must be positive".into()));
    }
    let (dist, resolved) = resolve_channel(&a.channel)?;
    let cfg = WienerConfig::for_distribution(&dist);
    let v = validate_density(&cfg, &dist, a.ensemble, a.channel.seed)?;
    let config = summary(
        a,
        resolved,
        json!({
            "ks_pass": v.ks.pass,
            "ks_statistic": v.ks.statistic,
            "ks_critical": v.ks.critical,
            "error_rate": v.error_rate,
            "predicted_error_rate": v.predicted_error_rate,
            "error_rate_std_error": v.error_rate_std_error,
            "mean_t_empirical": v.mean_t_empirical,
            "mean_t_std_error": v.mean_t_std_error,
            "censored": v.censored,
            "dt": cfg.dt(),
        }),
    );
    write_json(&a.channel.out, "validate.json", &config)?;
    if !v.ks.pass {
        return Err(CliError::Check(format!(
            "KS statistic {} exceeds the 1% critical value {}",
            v.ks.statistic, v.ks.critical
        )));
    }
    Ok(config)
}
