//! Command-line front end: argument parsing, config loading, orchestration
//! and deterministic result files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid config or input,
//! 3 numerical failure (reported with the master seed).

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::Error;
use config::*;
use run::Outcome;

/// Environment variable overriding the worker count (the only one read).
pub const WORKERS_ENV: &str = "LYAPLAB_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(Error),
    #[error("{source} [master seed {seed}]")]
    Numerical { seed: u64, source: Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e)
    }
}

/// Whether a library error is the caller's fault rather than a numerical one.
pub fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::InvalidArgument(_)
            | Error::InvalidMeasure(_)
            | Error::InvalidGauge(_)
            | Error::InvalidRep(_)
            | Error::TooLarge(..)
    )
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Invalid(_) => 2,
            CliError::Input(e) | CliError::Numerical { source: e, .. } => {
                if is_input_error(e) {
                    2
                } else {
                    3
                }
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lyaplab", version, about = "Monte Carlo and optimal-transport experiments on random matrix products")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0: all cores); overrides LYAPLAB_WORKERS and the config.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write a gnuplot script `plot.gp` next to the CSV output.
    #[arg(long, global = true)]
    pub emit_plot: bool,
    /// Override a config field, e.g. `--set n=500` or `--set measure.params.std=0.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Top Lyapunov exponent.
    Lyap,
    /// λ₁, λ₁ + λ₂ and the gap via the exterior square.
    Gap,
    /// CLT variance by the direct and coboundary routes.
    Variance,
    /// Large-deviation curve with decay fits.
    Lde,
    /// Concave Wasserstein or W∞ distance between two atomic measures.
    Wdist,
    /// Regularity of the empirical stationary measure.
    Regularity,
    /// One estimator across a family of measures.
    Family,
    /// Schrödinger transfer matrices.
    #[command(subcommand)]
    Anderson(AndersonCmd),
    /// Random words in surface-group representations.
    #[command(subcommand)]
    Hyperbolic(HyperbolicCmd),
    /// Print the JSON schema of one experiment config (or all of them).
    Schema { experiment: Option<String> },
    /// Check a config or results file.
    Validate {
        file: PathBuf,
        /// Experiment of a bare config file (results files carry their own).
        #[arg(long)]
        experiment: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AndersonCmd {
    /// λ(E) over an energy grid.
    Sweep(AndersonSweepArgs),
    /// Deviation curve of a transfer-matrix coefficient.
    Lde(AndersonLdeArgs),
}

#[derive(Debug, Args)]
pub struct AndersonSweepArgs {
    /// Potential law: `bernoulli:V`, `uniform:A:B`, `gaussian:M:S` or `log_pareto:P`.
    #[arg(long, value_name = "KIND:PARAMS", allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AndersonLdeArgs {
    #[arg(long, value_name = "KIND:PARAMS", allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated walk lengths.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum HyperbolicCmd {
    /// Length growth rate and CLT spread of random words.
    Clt(HyperbolicCltArgs),
    /// Deformation sweep `g₁ ↦ diag(e^t, e^{−t})·g₁`, t from 0 to tmax.
    Sweep(HyperbolicSweepArgs),
}

#[derive(Debug, Args)]
pub struct HyperbolicCltArgs {
    /// Built-in representation (`octagon`).
    #[arg(long)]
    pub rep: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// `norm` or `translation`.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct HyperbolicSweepArgs {
    #[arg(long)]
    pub rep: Option<String>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub mode: Option<String>,
}

fn push<T: serde::Serialize>(out: &mut Vec<(String, Value)>, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        out.push((key.to_string(), serde_json::to_value(v).expect("plain value")));
    }
}

fn potential_override(out: &mut Vec<(String, Value)>, p: &Option<String>) -> Result<(), CliError> {
    if let Some(p) = p {
        out.push(("potential".into(), parse_potential(p)?));
    }
    Ok(())
}

/// Parse arguments and run; returns the process exit code.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let mut extra = Vec::new();
    match &cli.command {
        Command::Lyap => run_experiment::<LyapConfig>(g, extra, run::lyap),
        Command::Gap => run_experiment::<GapConfig>(g, extra, run::gap),
        Command::Variance => run_experiment::<VarianceConfig>(g, extra, run::variance),
        Command::Lde => run_experiment::<LdeFileConfig>(g, extra, run::lde),
        Command::Wdist => run_experiment::<WdistConfig>(g, extra, run::wdist),
        Command::Regularity => run_experiment::<RegularityConfig>(g, extra, run::regularity),
        Command::Family => run_experiment::<FamilyConfig>(g, extra, run::family),
        Command::Anderson(AndersonCmd::Sweep(a)) => {
            potential_override(&mut extra, &a.potential)?;
            push(&mut extra, "emin", &a.emin);
            push(&mut extra, "emax", &a.emax);
            push(&mut extra, "count", &a.count);
            push(&mut extra, "n", &a.n);
            push(&mut extra, "trials", &a.trials);
            run_experiment::<AndersonSweepConfig>(g, extra, run::anderson_sweep)
        }
        Command::Anderson(AndersonCmd::Lde(a)) => {
            potential_override(&mut extra, &a.potential)?;
            push(&mut extra, "energy", &a.energy);
            push(&mut extra, "eps", &a.eps);
            push(&mut extra, "n_grid", &a.n_grid);
            push(&mut extra, "trials", &a.trials);
            run_experiment::<AndersonLdeConfig>(g, extra, run::anderson_lde)
        }
        Command::Hyperbolic(HyperbolicCmd::Clt(a)) => {
            push(&mut extra, "rep", &a.rep);
            push(&mut extra, "n", &a.n);
            push(&mut extra, "trials", &a.trials);
            push(&mut extra, "mode", &a.mode);
            run_experiment::<HyperbolicCltConfig>(g, extra, run::hyperbolic_clt)
        }
        Command::Hyperbolic(HyperbolicCmd::Sweep(a)) => {
            push(&mut extra, "rep", &a.rep);
            push(&mut extra, "tmax", &a.tmax);
            push(&mut extra, "steps", &a.steps);
            push(&mut extra, "n", &a.n);
            push(&mut extra, "trials", &a.trials);
            push(&mut extra, "mode", &a.mode);
            run_experiment::<HyperbolicSweepConfig>(g, extra, run::hyperbolic_sweep)
        }
        Command::Schema { experiment } => {
            let v = match experiment {
                Some(name) => schema_of(name)?,
                None => {
                    let mut all = serde_json::Map::new();
                    for name in EXPERIMENTS {
                        all.insert(name.to_string(), schema_of(name)?);
                    }
                    Value::Object(all)
                }
            };
            say(&pretty(&v));
            Ok(())
        }
        Command::Validate { file, experiment } => {
            let (name, hash) = validate_file(file, experiment.as_deref())?;
            say(&format!("ok: {name} config {hash}"));
            Ok(())
        }
    }
}

/// Print a line to stdout, ignoring a closed pipe.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

/// Typed config from the file plus overrides.
fn load<C: ExperimentConfig>(g: &Global, mut extra: Vec<(String, Value)>) -> Result<C, CliError> {
    for s in &g.overrides {
        extra.push(parse_override(s)?);
    }
    let text = match &g.config {
        Some(p) => Some(read(p)?),
        None => None,
    };
    let cfg = match (text, extra.is_empty()) {
        // direct parse keeps line and column numbers in diagnostics
        (Some(t), true) => parse_text::<C>(&t)?,
        (t, _) => {
            let mut v = match t {
                Some(t) => serde_json::from_str(&t).map_err(|e| Error::Parse(format!("config: {e}")))?,
                None => json!({}),
            };
            for (k, val) in extra {
                set_path(&mut v, &k, val)?;
            }
            parse_value::<C>(v)?
        }
    };
    Ok(cfg)
}

/// `--workers`, then `LYAPLAB_WORKERS`, then the config, then 0.
fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return Ok(w);
    }
    if let Ok(s) = std::env::var(WORKERS_ENV) {
        return s.trim().parse().map_err(|_| CliError::Invalid(format!("{WORKERS_ENV}={s:?} is not a count")));
    }
    Ok(config.unwrap_or(0))
}

fn run_experiment<C: ExperimentConfig>(
    g: &Global,
    extra: Vec<(String, Value)>,
    runner: fn(&C, usize) -> crate::error::Result<Outcome>,
) -> Result<(), CliError> {
    let mut cfg = load::<C>(g, extra)?;
    if let Some(s) = g.seed {
        *cfg.seed_mut() = s;
    }
    let workers = resolve_workers(g.workers, cfg.workers_mut().take())?;
    let seed = *cfg.seed_mut();
    let canon = canonical(&cfg)?;
    let hash = config_hash(C::NAME, &canon);
    let outcome = runner(&cfg, workers).map_err(|e| {
        if is_input_error(&e) {
            CliError::Input(e)
        } else {
            CliError::Numerical { seed, source: e }
        }
    })?;
    fs::create_dir_all(&g.out_dir).map_err(|source| CliError::Io { path: g.out_dir.clone(), source })?;
    let mut names = Vec::new();
    for (name, bytes) in &outcome.files {
        write(&g.out_dir.join(name), bytes)?;
        names.push(name.clone());
    }
    if g.emit_plot {
        if let Some(script) = &outcome.plot {
            write(&g.out_dir.join("plot.gp"), script.as_bytes())?;
            names.push("plot.gp".into());
        }
    }
    let doc = json!({
        "tool": "lyaplab",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": C::NAME,
        "config_hash": hash,
        "seed": seed,
        "config": canon,
        "results": outcome.results,
        "files": names,
    });
    write(&g.out_dir.join("results.json"), (pretty(&doc) + "\n").as_bytes())?;
    say(&format!("{}: wrote {} (config {hash})", C::NAME, g.out_dir.join("results.json").display()));
    Ok(())
}

/// Canonical form of a config for the named experiment.
pub fn canonical_named(name: &str, v: Value) -> crate::error::Result<Value> {
    fn go<C: ExperimentConfig>(v: Value) -> crate::error::Result<Value> {
        canonical(&parse_value::<C>(v)?)
    }
    match name {
        "lyap" => go::<LyapConfig>(v),
        "gap" => go::<GapConfig>(v),
        "variance" => go::<VarianceConfig>(v),
        "lde" => go::<LdeFileConfig>(v),
        "wdist" => go::<WdistConfig>(v),
        "regularity" => go::<RegularityConfig>(v),
        "family" => go::<FamilyConfig>(v),
        "anderson_sweep" => go::<AndersonSweepConfig>(v),
        "anderson_lde" => go::<AndersonLdeConfig>(v),
        "hyperbolic_clt" => go::<HyperbolicCltConfig>(v),
        "hyperbolic_sweep" => go::<HyperbolicSweepConfig>(v),
        other => Err(Error::Parse(format!("unknown experiment {other:?}"))),
    }
}

/// Validate a config file (experiment given) or a results file (experiment
/// and hash embedded). Returns the experiment name and config hash.
pub fn validate_file(path: &Path, experiment: Option<&str>) -> Result<(String, String), CliError> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if v.get("tool").and_then(Value::as_str) == Some("lyaplab") {
        let name = v
            .get("experiment")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::Invalid("results file without `experiment`".into()))?
            .to_string();
        let config = v.get("config").cloned().ok_or_else(|| CliError::Invalid("results file without `config`".into()))?;
        let canon = canonical_named(&name, config)?;
        let hash = config_hash(&name, &canon);
        if v.get("config_hash").and_then(Value::as_str) != Some(hash.as_str()) {
            return Err(CliError::Invalid(format!("config hash mismatch in {}", path.display())));
        }
        if v.get("results").is_none() {
            return Err(CliError::Invalid("results file without `results`".into()));
        }
        return Ok((name, hash));
    }
    let name = experiment.ok_or_else(|| CliError::Invalid("bare config files need --experiment".into()))?;
    let canon = canonical_named(name, v)?;
    let hash = config_hash(name, &canon);
    Ok((name.to_string(), hash))
}
