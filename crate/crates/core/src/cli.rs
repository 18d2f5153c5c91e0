//! Command-line front end: `sample`, `fit`, `check`, `mean`, `experiment`.
//!
//! Exit codes: 0 success, 2 usage error or malformed input, 3 when the answer
//! is negative (no MLE, divergence, or a non-graphic sequence).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    run_consistency_experiment, run_convergence_trace, run_scatter, ExperimentConfig,
};
use crate::graphical::is_graphical;
use crate::meanfn::marginal;
use crate::mle::{fit, SolverOptions};
use crate::model::{DegreeSequence, Potentials, WeightRegime, WeightedGraph};
use crate::sampler::{sample_graph, SeededRng};

/// Version of the file formats (degree CSV, graph JSON, experiment tables).
pub const FORMAT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (format 1)");

#[derive(Debug, Parser)]
#[command(name = "maxent-graphs", version = VERSION, about = "Maximum-entropy weighted graphs with given degrees")]
pub struct Cli {
    /// Worker threads for sampling and experiments.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph at the given potentials.
    Sample(SampleArgs),
    /// Fit potentials to a degree sequence.
    Fit(FitArgs),
    /// Test whether a degree sequence is graphical.
    Check(CheckArgs),
    /// Evaluate Z1, mu and mu' at one point.
    Mean(MeanArgs),
    /// Run a convergence, consistency or scatter study.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeKind {
    Finite,
    Infinite,
    Continuous,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeKind,
    /// Number of weight levels; required for (and only for) `--regime finite`.
    #[arg(long)]
    pub r: Option<u32>,
}

impl RegimeArgs {
    fn resolve(&self) -> Result<WeightRegime> {
        match (self.regime, self.r) {
            (RegimeKind::Finite, Some(r)) => WeightRegime::finite(r),
            (RegimeKind::Finite, None) => Err(Error::Parse("--regime finite requires --r".into())),
            (_, Some(_)) => Err(Error::Parse("--r is only valid with --regime finite".into())),
            (RegimeKind::Infinite, None) => Ok(WeightRegime::InfiniteDiscrete),
            (RegimeKind::Continuous, None) => Ok(WeightRegime::Continuous),
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    /// CSV file with one potential per vertex.
    #[arg(long)]
    pub theta: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Graph JSON destination; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the degree sequence as CSV.
    #[arg(long)]
    pub degrees_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    #[arg(long)]
    pub degrees: PathBuf,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub divergence_norm: Option<f64>,
    /// Per-iteration CSV: iter, step_inf, residual_inf.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    #[arg(long)]
    pub degrees: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Trace,
    Consistency,
    Scatter,
}

impl ExperimentKind {
    fn name(self) -> &'static str {
        match self {
            ExperimentKind::Trace => "trace",
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub kind: ExperimentKind,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses a one-line (or multi-line) list of numbers separated by commas or whitespace.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{s}' is not a number")))
        })
        .collect()
}

pub fn format_number_list(values: &[f64]) -> String {
    let mut line = values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_number_list(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Graph JSON with integer weights for the discrete regimes.
pub fn graph_to_json(g: &WeightedGraph) -> serde_json::Value {
    let discrete = g.regime().is_discrete();
    let edges: Vec<serde_json::Value> = g
        .edges()
        .map(|(i, j, w)| {
            if discrete {
                json!([i, j, w as u64])
            } else {
                json!([i, j, w])
            }
        })
        .collect();
    json!({ "n": g.n(), "regime": g.regime(), "edges": edges })
}

pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    #[derive(serde::Deserialize)]
    struct Raw {
        n: usize,
        regime: WeightRegime,
        edges: Vec<(usize, usize, f64)>,
    }
    let raw: Raw = serde_json::from_str(text)?;
    WeightedGraph::from_edges(raw.n, raw.regime, raw.edges)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(Error::Parse(format!(
            "directory {} does not exist",
            p.display()
        ))),
        _ => Ok(()),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}

/// Outcome of a successful dispatch: the text for standard output and the exit code.
struct Outcome {
    stdout: String,
    code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: EXIT_OK }
    }
}

fn cmd_sample(a: &SampleArgs) -> Result<Outcome> {
    let regime = a.regime.resolve()?;
    for p in a.out.iter().chain(&a.degrees_out) {
        ensure_parent(p)?;
    }
    let theta = Potentials::new(read_numbers(&a.theta)?)?;
    let g = sample_graph(regime, &theta, &SeededRng::new(a.seed, a.stream))?;
    let text = serde_json::to_string(&graph_to_json(&g))? + "\n";
    if let Some(p) = &a.degrees_out {
        fs::write(p, format_number_list(g.degree_sequence().as_slice()))?;
    }
    match &a.out {
        Some(p) => {
            fs::write(p, &text)?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(text)),
    }
}

fn cmd_fit(a: &FitArgs) -> Result<Outcome> {
    let regime = a.regime.resolve()?;
    if let Some(p) = &a.trace {
        ensure_parent(p)?;
    }
    let d = DegreeSequence::new(read_numbers(&a.degrees)?)?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        tol: a.tol.unwrap_or(defaults.tol),
        max_iter: a.max_iter.unwrap_or(defaults.max_iter),
        divergence_norm: a.divergence_norm.unwrap_or(defaults.divergence_norm),
        theta0: None,
        record_trace: a.trace.is_some(),
    };
    opts.validate()?;
    let mut report = match fit(regime, &d, &opts) {
        Ok(r) => r,
        // A zero degree in the finite regime sends its potential to +inf.
        Err(Error::NonPositiveDegree { .. }) | Err(Error::NoMle) => {
            return Ok(Outcome {
                stdout: json!({ "converged": false, "diverged": false, "theta_hat": null, "error": "no MLE exists" })
                    .to_string()
                    + "\n",
                code: EXIT_NEGATIVE,
            })
        }
        Err(e) => return Err(e),
    };
    if let (Some(p), Some(trace)) = (&a.trace, report.trace.take()) {
        let mut csv = String::from("iter,step_inf,residual_inf\n");
        for t in trace {
            let _ = writeln!(csv, "{},{},{}", t.iter, t.step_inf, t.residual_inf);
        }
        fs::write(p, csv)?;
    }
    let code = if report.diverged { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(Outcome {
        stdout: to_json(&report)? + "\n",
        code,
    })
}

fn cmd_check(a: &CheckArgs) -> Result<Outcome> {
    let regime = a.regime.resolve()?;
    let d = DegreeSequence::new(read_numbers(&a.degrees)?)?;
    let verdict = is_graphical(regime, &d)?;
    Ok(Outcome {
        stdout: to_json(&verdict)? + "\n",
        code: if verdict.graphic { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

fn cmd_mean(a: &MeanArgs) -> Result<Outcome> {
    let regime = a.regime.resolve()?;
    Ok(Outcome::ok(to_json(&marginal(regime, a.t)?)? + "\n"))
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", a.config.display())))?;
    cfg.validate()?;
    fs::create_dir_all(&a.out)?;
    let (csv, summary) = match a.kind {
        ExperimentKind::Consistency => {
            let res = run_consistency_experiment(&cfg)?;
            (res.to_csv(), serde_json::to_value(&res.summary)?)
        }
        ExperimentKind::Trace => {
            let mut csv = String::new();
            let mut summaries = Vec::new();
            for &n in &cfg.n_values {
                let res = run_convergence_trace(&cfg.single(n))?;
                append_table(&mut csv, &res.to_csv());
                summaries.push(res.summary);
            }
            (csv, serde_json::to_value(&summaries)?)
        }
        ExperimentKind::Scatter => {
            let mut csv = String::new();
            let mut summaries = Vec::new();
            for &n in &cfg.n_values {
                let res = run_scatter(&cfg.single(n))?;
                append_table(&mut csv, &res.to_csv());
                summaries.push(res.summary);
            }
            (csv, serde_json::to_value(&summaries)?)
        }
    };
    let name = a.kind.name();
    fs::write(a.out.join(format!("{name}.csv")), csv)?;
    let summary = json!({ "kind": name, "config": cfg, "summary": summary });
    fs::write(
        a.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(Outcome::ok(serde_json::to_string(&summary)? + "\n"))
}

/// Appends a CSV table, dropping its header if `acc` already has one.
fn append_table(acc: &mut String, table: &str) {
    if acc.is_empty() {
        acc.push_str(table);
    } else if let Some((_, body)) = table.split_once('\n') {
        acc.push_str(body);
    }
}

/// [`run`] against the process's standard output and error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn run_parsed(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    if cli.threads == 0 {
        return Err(Error::Parse("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Parse(format!("cannot start thread pool: {e}")))?;
    let outcome = pool.install(|| match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Check(a) => cmd_check(a),
        Command::Mean(a) => cmd_mean(a),
        Command::Experiment(a) => cmd_experiment(a),
    })?;
    out.write_all(outcome.stdout.as_bytes())?;
    Ok(outcome.code)
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match run_parsed(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let code = if matches!(e, Error::NoMle) { EXIT_NEGATIVE } else { EXIT_USAGE };
            let _ = writeln!(err, "error: {}", e.to_string().replace('\n', " "));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_lists_round_trip() {
        let v = parse_number_list("1, 2.5,3\n").unwrap();
        assert_eq!(v, vec![1.0, 2.5, 3.0]);
        assert_eq!(format_number_list(&v), "1,2.5,3\n");
        let x = [0.1 + 0.2, 1.0 / 3.0, -2e-300];
        assert_eq!(parse_number_list(&format_number_list(&x)).unwrap(), x);
        assert!(parse_number_list("1,x,3").is_err());
    }

    #[test]
    fn regime_flags() {
        let ra = |regime, r| RegimeArgs { regime, r };
        assert!(ra(RegimeKind::Finite, None).resolve().is_err());
        assert!(ra(RegimeKind::Continuous, Some(3)).resolve().is_err());
        assert_eq!(
            ra(RegimeKind::Finite, Some(3)).resolve().unwrap(),
            WeightRegime::FiniteDiscrete { r: 3 }
        );
    }

    #[test]
    fn graph_json_round_trip() {
        let regime = WeightRegime::finite(3).unwrap();
        let g = WeightedGraph::from_edges(3, regime, vec![(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        let v = graph_to_json(&g);
        assert_eq!(
            v.to_string(),
            r#"{"edges":[[0,1,2],[1,2,1]],"n":3,"regime":{"kind":"finite","r":3}}"#
        );
        assert_eq!(graph_from_json(&v.to_string()).unwrap(), g);
    }

    #[test]
    fn mean_command() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            ["maxent-graphs", "mean", "--regime", "finite", "--r", "5", "--t", "0"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["mu"], 2.0);
        assert_eq!(v["mu_prime"], -2.0);
        assert!((v["z1"].as_f64().unwrap() - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn usage_errors_exit_2() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["maxent-graphs", "mean", "--regime", "finite", "--t", "0"], &mut out, &mut err), 2);
        assert_eq!(run(["maxent-graphs", "bogus"], &mut out, &mut err), 2);
        assert_eq!(
            run(["maxent-graphs", "mean", "--regime", "continuous", "--t", "-1"], &mut out, &mut err),
            2
        );
    }
}
