//! Command-line front end. Exit codes: 0 success, 1 invalid input or I/O
//! failure, 2 a study finished with a FAIL verdict.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::output::{output_pair, write_outputs};
use crate::experiment::{
    evaluate_conditions, evaluate_orlicz, run_bias_study, run_estimation, run_rate_study, run_simulation,
    run_variance_study, CsvRow, ExperimentConfig, OrliczQuery, StudyVerdict,
};

pub const THREADS_ENV: &str = "LATTICE_SMOOTH_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lattice-smooth", version, about = "Kernel regression on lattices with dependent errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output base path; writes `<PATH>.csv` and `<PATH>.json`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Suppresses the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draws one error field per configured size.
    Simulate(Common),
    /// Evaluates the estimator once per size and splits its sup deviation.
    Estimate(Common),
    /// Deterministic bias check against `B h`.
    Bias(Common),
    /// Covariance-sum oracle and pointwise variance decay.
    Variance(Common),
    /// Monte Carlo sup-norm rate study.
    Rates(Common),
    /// Certifies the dependence conditions for the configured generator.
    Conditions(Common),
    /// Orlicz norms and quantile coefficients for a marginal law.
    Orlicz(Common),
}

struct Outcome {
    summary: serde_json::Value,
    rows: Vec<CsvRow>,
    verdict: Option<StudyVerdict>,
    headline: String,
}

impl Outcome {
    fn new<S: Serialize>(summary: &S, rows: Vec<CsvRow>, verdict: Option<StudyVerdict>, headline: String) -> Result<Self> {
        Ok(Outcome { summary: serde_json::to_value(summary)?, rows, verdict, headline })
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn verdict_name(v: StudyVerdict) -> &'static str {
    match v {
        StudyVerdict::Pass => "PASS",
        StudyVerdict::Fail => "FAIL",
        StudyVerdict::Degenerate => "DEGENERATE",
    }
}

fn execute(command: &Command) -> Result<(Outcome, Option<ExperimentConfig>)> {
    let outcome = match command {
        Command::Orlicz(common) => {
            let text = std::fs::read_to_string(&common.config)
                .map_err(|e| Error::config(format!("cannot read config {}: {e}", common.config.display())))?;
            let query: OrliczQuery =
                serde_json::from_str(&text).map_err(|e| Error::config(format!("invalid orlicz query: {e}")))?;
            let answer = evaluate_orlicz(&query)?;
            let mut rows = Vec::new();
            for (name, v) in [("luxemburg", answer.luxemburg), ("c_k", answer.c_k), ("d_k", answer.d_k)] {
                if let Some(v) = v {
                    rows.push(CsvRow::new("orlicz", 1, name, v));
                }
            }
            let headline = format!("orlicz: beta = {}, luxemburg = {:?}", answer.beta, answer.luxemburg);
            return Ok((Outcome::new(&answer, rows, None, headline)?, None));
        }
        Command::Conditions(common) => {
            let cfg = load_config(common)?;
            let answer = evaluate_conditions(&cfg)?;
            let rows = answer
                .reports
                .iter()
                .filter_map(|r| r.sum.map(|s| CsvRow::new("conditions", cfg.d, r.condition.as_str(), s)))
                .collect();
            let headline = answer
                .reports
                .iter()
                .map(|r| format!("{}={:?}", r.condition, r.verdict))
                .collect::<Vec<_>>()
                .join(" ");
            (Outcome::new(&answer, rows, None, format!("conditions: {headline}"))?, cfg)
        }
        Command::Simulate(common) => {
            let cfg = load_config(common)?;
            let r = run_simulation(&cfg)?;
            let headline = format!("simulate: {} fields", r.fields.len());
            (Outcome::new(&r, r.csv_rows(), None, headline)?, cfg)
        }
        Command::Estimate(common) => {
            let cfg = load_config(common)?;
            let r = run_estimation(&cfg)?;
            let headline = format!("estimate: {} sizes", r.estimates.len());
            (Outcome::new(&r, r.csv_rows(), None, headline)?, cfg)
        }
        Command::Bias(common) => {
            let cfg = load_config(common)?;
            let r = run_bias_study(&cfg)?;
            let worst = r.ratios.iter().cloned().fold(0.0, f64::max);
            let headline = format!("bias: {} max bias/h = {worst} (B = {})", verdict_name(r.verdict), r.lipschitz);
            (Outcome::new(&r, r.csv_rows(), Some(r.verdict), headline)?, cfg)
        }
        Command::Variance(common) => {
            let cfg = load_config(common)?;
            let r = run_variance_study(&cfg)?;
            let headline = format!(
                "variance: {} slope = {:?} (theory {} +- {}), oracle {}",
                verdict_name(r.verdict),
                r.fit.map(|f| f.slope),
                r.theoretical_slope,
                r.tolerance,
                if r.oracle_holds { "holds" } else { "violated" }
            );
            (Outcome::new(&r, r.csv_rows(), Some(r.verdict), headline)?, cfg)
        }
        Command::Rates(common) => {
            let cfg = load_config(common)?;
            let r = run_rate_study(&cfg)?;
            let headline = format!(
                "rates: {} slope = {:?} (theory {} +- {})",
                verdict_name(r.verdict),
                r.fit.map(|f| f.slope),
                r.theoretical_slope,
                r.tolerance
            );
            (Outcome::new(&r, r.csv_rows(), Some(r.verdict), headline)?, cfg)
        }
    };
    Ok((outcome.0, Some(outcome.1)))
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Simulate(c)
        | Command::Estimate(c)
        | Command::Bias(c)
        | Command::Variance(c)
        | Command::Rates(c)
        | Command::Conditions(c)
        | Command::Orlicz(c) => c,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let threads: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|t| *t > 0)
            .ok_or_else(|| Error::config(format!("{THREADS_ENV} = '{text}' is not a positive integer")))?;
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn run(command: &Command) -> Result<i32> {
    configure_threads()?;
    let flags = common(command);
    let (outcome, cfg) = execute(command)?;
    let (csv_path, json_path) = match (&flags.out, cfg.as_ref().map(|c| &c.outputs)) {
        (Some(base), _) => {
            let (c, j) = output_pair(base);
            (Some(c), Some(j))
        }
        (None, Some(outputs)) => (outputs.csv.clone(), outputs.json.clone()),
        (None, None) => (None, None),
    };
    for p in [&csv_path, &json_path].into_iter().flatten() {
        if same_file(p, &flags.config) {
            return Err(Error::config(format!("output {} would overwrite the config file", p.display())));
        }
    }
    write_outputs(csv_path.as_deref(), json_path.as_deref(), &outcome.rows, &outcome.summary)?;
    if !flags.quiet {
        println!("{}", outcome.headline);
        if json_path.is_none() {
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
        }
        for p in [&csv_path, &json_path].into_iter().flatten() {
            println!("wrote {}", display(p));
        }
    }
    Ok(match outcome.verdict {
        Some(StudyVerdict::Fail) => EXIT_FAIL,
        _ => EXIT_OK,
    })
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
