//! Desk-scale convergence and consistency studies.
//!
//! Every replicate draws its potentials and its graph from disjoint random
//! streams keyed by `(n, replicate)`, so tables are identical for a given seed
//! no matter how many threads execute them. Rows are always ordered by
//! `(n, replicate)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphical::in_mean_interior;
use crate::mle::{
    contraction_delta, fixed_point_solve, newton_solve, sign_symmetry_holds, ContractionInfo,
    SolverOptions,
};
use crate::model::{dist_inf, norm_inf, DegreeSequence, FitReport, Potentials, WeightRegime};
use crate::sampler::{expected_degrees, hash_words, sample_graph, uniform_vector, SeededRng};

/// Potentials closer than this to the final iterate are excluded from rate fits.
pub const TRACE_DISTANCE_FLOOR: f64 = 1e-9;

/// Tie tolerance used for the sign-symmetry diagnostic.
pub const TIE_TOLERANCE: f64 = 1e-8;

const STREAM_THETA: u64 = 0;
const STREAM_GRAPH: u64 = 1;

/// How the true potentials of a replicate are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaLaw {
    /// `theta_i ~ U[lo, hi]` independently.
    UniformBox { lo: f64, hi: f64 },
    /// `theta_i = base + jitter * U[-1, 1]`, so every pairwise sum lies in
    /// `[2(base - jitter), 2(base + jitter)]`.
    SymmetricShifted { base: f64, jitter: f64 },
}

impl ThetaLaw {
    pub fn validate(&self, regime: WeightRegime) -> Result<()> {
        let (lo, hi) = self.support();
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(format!("degenerate theta law {self:?}")));
        }
        if regime.requires_positive_sums() && !(lo > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "theta law {self:?} does not keep pairwise sums positive for the {regime} regime"
            )));
        }
        Ok(())
    }

    /// Range of a single `theta_i`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ThetaLaw::UniformBox { lo, hi } => (lo, hi),
            ThetaLaw::SymmetricShifted { base, jitter } => (base - jitter, base + jitter),
        }
    }

    pub fn draw(&self, rng: &SeededRng, n: usize) -> Vec<f64> {
        let (lo, hi) = self.support();
        uniform_vector(rng, n, lo, hi)
    }
}

/// Which degree sequence a run fits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeSource {
    /// Degrees of one graph sampled at the true potentials.
    #[default]
    Sampled,
    /// The exact expected degrees at the true potentials.
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub regime: WeightRegime,
    pub n_values: Vec<usize>,
    #[serde(default = "one")]
    pub replicates: usize,
    pub theta_law: ThetaLaw,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub degree_source: DegreeSource,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values is empty".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 3) {
            return Err(Error::TooFewVertices(n));
        }
        self.theta_law.validate(self.regime)?;
        self.solver.validate()
    }

    /// The single-run description used by trace and scatter studies at size `n`.
    pub fn single(&self, n: usize) -> SingleRun {
        SingleRun {
            regime: self.regime,
            n,
            theta_law: self.theta_law,
            seed: self.seed,
            solver: self.solver.clone(),
            source: self.degree_source,
        }
    }
}

/// One draw of `theta`, one degree sequence, one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleRun {
    pub regime: WeightRegime,
    pub n: usize,
    pub theta_law: ThetaLaw,
    pub seed: u64,
    pub solver: SolverOptions,
    #[serde(default)]
    pub source: DegreeSource,
}

fn replicate_stream(seed: u64, n: usize, replicate: usize, purpose: u64) -> SeededRng {
    SeededRng::new(seed, hash_words(&[n as u64, replicate as u64, purpose]))
}

struct Draw {
    theta: Potentials,
    degrees: DegreeSequence,
}

fn draw_instance(
    regime: WeightRegime,
    law: &ThetaLaw,
    source: DegreeSource,
    seed: u64,
    n: usize,
    replicate: usize,
) -> Result<Draw> {
    let theta = Potentials::new(law.draw(&replicate_stream(seed, n, replicate, STREAM_THETA), n))?;
    let degrees = match source {
        DegreeSource::Sampled => {
            let rng = replicate_stream(seed, n, replicate, STREAM_GRAPH);
            sample_graph(regime, &theta, &rng)?.degree_sequence()
        }
        DegreeSource::Expected => expected_degrees(regime, &theta)?,
    };
    Ok(Draw { theta, degrees })
}

/// Fits `d`, reporting `Ok(None)` when the MLE provably does not exist
/// (a zero degree in the finite regime, or `d` outside the interior of the
/// mean space for the others).
fn fit_with_iterates(
    regime: WeightRegime,
    d: &DegreeSequence,
    opts: &SolverOptions,
    iterates: Option<&mut Vec<Vec<f64>>>,
) -> Result<Option<FitReport>> {
    let mut iterates = iterates;
    let mut observer = |x: &[f64]| {
        if let Some(store) = iterates.as_mut() {
            store.push(x.to_vec());
        }
    };
    match regime {
        WeightRegime::FiniteDiscrete { r } => {
            if d.as_slice().iter().any(|&x| x <= 0.0) {
                return Ok(None);
            }
            fixed_point_solve(d, r, opts, &mut observer).map(Some)
        }
        _ => {
            if !in_mean_interior(regime, d)? {
                return Ok(None);
            }
            newton_solve(regime, d, opts, &mut observer).map(Some)
        }
    }
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Linear-interpolation quantile (type 7) of unsorted data; `None` if empty.
pub fn quantile(data: &[f64], q: f64) -> Option<f64> {
    if data.is_empty() {
        return None;
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Convergence traces

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// `||theta^(iter) - theta_hat||_inf`, `theta_hat` being the final iterate.
    pub dist_inf: f64,
    pub log10_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub regime: WeightRegime,
    pub n: usize,
    pub existed: bool,
    pub converged: bool,
    pub iterations: usize,
    pub residual_inf: Option<f64>,
    /// `||theta_hat - theta||_inf` against the true potentials.
    pub err_inf: Option<f64>,
    /// Least-squares slope of `log10_dist` per iteration over distances above
    /// [`TRACE_DISTANCE_FLOOR`].
    pub slope: Option<f64>,
    /// Largest `dist(k+2) / dist(k)` over distances above the floor.
    pub max_two_step_ratio: Option<f64>,
    /// Finite discrete only: constants at `K = 2||theta_hat|| + ||theta^(0)||`.
    pub contraction: Option<ContractionInfo>,
    pub log10_beta: Option<f64>,
    /// `||theta^(0) - theta^(1)||_inf`.
    pub first_step: Option<f64>,
    /// `||theta^(0) - theta_hat||_inf`.
    pub initial_dist: Option<f64>,
    /// `||d - E_theta_hat[deg]||_inf / max(1, ||d||_inf)`
    pub residual_rel: Option<f64>,
    pub sign_symmetric: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub rows: Vec<TraceRow>,
    pub summary: TraceSummary,
}

impl TraceResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,iter,dist_inf,log10_dist\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.summary.n, row.iter, row.dist_inf, row.log10_dist
            );
        }
        out
    }
}

/// Draws `theta`, fits one degree sequence and records the distance of every
/// iterate to the final one.
pub fn run_convergence_trace(run: &SingleRun) -> Result<TraceResult> {
    run.theta_law.validate(run.regime)?;
    run.solver.validate()?;
    let draw = draw_instance(run.regime, &run.theta_law, run.source, run.seed, run.n, 0)?;
    let mut iterates = Vec::new();
    let report = fit_with_iterates(run.regime, &draw.degrees, &run.solver, Some(&mut iterates))?;

    let mut summary = TraceSummary {
        regime: run.regime,
        n: run.n,
        existed: report.is_some(),
        converged: false,
        iterations: 0,
        residual_inf: None,
        err_inf: None,
        slope: None,
        max_two_step_ratio: None,
        contraction: None,
        log10_beta: None,
        first_step: None,
        initial_dist: None,
        residual_rel: None,
        sign_symmetric: None,
    };
    let Some(report) = report else {
        return Ok(TraceResult {
            rows: Vec::new(),
            summary,
        });
    };
    summary.existed = !report.diverged;
    summary.converged = report.converged;
    summary.iterations = report.iterations;
    summary.residual_inf = Some(report.residual_inf);

    let last = iterates.last().cloned().unwrap_or_default();
    let rows: Vec<TraceRow> = iterates
        .iter()
        .enumerate()
        .map(|(iter, x)| {
            let dist = dist_inf(x, &last);
            TraceRow {
                iter,
                dist_inf: dist,
                log10_dist: dist.log10(),
            }
        })
        .collect();

    if let (true, Some(theta_hat)) = (report.converged, report.theta_hat.as_ref()) {
        summary.err_inf = Some(dist_inf(&last, draw.theta.as_slice()));
        summary.residual_rel = Some(report.residual_inf / draw.degrees.max().max(1.0));
        summary.sign_symmetric = Some(sign_symmetry_holds(&draw.degrees, theta_hat, TIE_TOLERANCE));
        let above: Vec<&TraceRow> = rows
            .iter()
            .filter(|r| r.dist_inf > TRACE_DISTANCE_FLOOR)
            .collect();
        let xs: Vec<f64> = above.iter().map(|r| r.iter as f64).collect();
        let ys: Vec<f64> = above.iter().map(|r| r.log10_dist).collect();
        summary.slope = least_squares(&xs, &ys).map(|(s, _)| s);
        summary.max_two_step_ratio = rows
            .windows(3)
            .filter(|w| w[0].dist_inf > TRACE_DISTANCE_FLOOR)
            .map(|w| w[2].dist_inf / w[0].dist_inf)
            .reduce(f64::max);
        if iterates.len() >= 2 {
            summary.first_step = Some(dist_inf(&iterates[0], &iterates[1]));
            summary.initial_dist = Some(dist_inf(&iterates[0], &last));
        }
        if let WeightRegime::FiniteDiscrete { r } = run.regime {
            let k = 2.0 * norm_inf(&last) + norm_inf(&iterates[0]);
            let c = contraction_delta(r, k);
            summary.log10_beta = Some(c.beta.log10());
            summary.contraction = Some(c);
        }
    }
    Ok(TraceResult { rows, summary })
}

// ---------------------------------------------------------------------------
// Scatter of estimate vs truth

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub vertex: usize,
    pub theta: f64,
    pub theta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    pub regime: WeightRegime,
    pub n: usize,
    pub existed: bool,
    pub converged: bool,
    pub max_abs_err: Option<f64>,
    /// Least-squares fit `theta_hat ~ slope * theta + intercept`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Relative moment residual `||d - E[deg]||_inf / max(1, ||d||_inf)`.
    pub residual_rel: Option<f64>,
    pub sign_symmetric: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterResult {
    pub rows: Vec<ScatterRow>,
    pub summary: ScatterSummary,
}

impl ScatterResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,vertex,theta,theta_hat\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.summary.n, row.vertex, row.theta, row.theta_hat
            );
        }
        out
    }
}

pub fn run_scatter(run: &SingleRun) -> Result<ScatterResult> {
    run.theta_law.validate(run.regime)?;
    run.solver.validate()?;
    let draw = draw_instance(run.regime, &run.theta_law, run.source, run.seed, run.n, 0)?;
    let report = fit_with_iterates(run.regime, &draw.degrees, &run.solver, None)?;
    let mut summary = ScatterSummary {
        regime: run.regime,
        n: run.n,
        existed: false,
        converged: false,
        max_abs_err: None,
        slope: None,
        intercept: None,
        residual_rel: None,
        sign_symmetric: None,
    };
    let Some(report) = report else {
        return Ok(ScatterResult {
            rows: Vec::new(),
            summary,
        });
    };
    summary.existed = !report.diverged;
    summary.converged = report.converged;
    let Some(theta_hat) = report.theta_hat.filter(|_| report.converged) else {
        return Ok(ScatterResult {
            rows: Vec::new(),
            summary,
        });
    };
    let truth = draw.theta.as_slice();
    let est = theta_hat.as_slice();
    let rows = truth
        .iter()
        .zip(est)
        .enumerate()
        .map(|(vertex, (&theta, &hat))| ScatterRow {
            vertex,
            theta,
            theta_hat: hat,
        })
        .collect();
    summary.max_abs_err = Some(dist_inf(truth, est));
    if let Some((slope, intercept)) = least_squares(truth, est) {
        summary.slope = Some(slope);
        summary.intercept = Some(intercept);
    }
    summary.residual_rel = Some(report.residual_inf / draw.degrees.max().max(1.0));
    summary.sign_symmetric = Some(sign_symmetry_holds(&draw.degrees, &theta_hat, TIE_TOLERANCE));
    Ok(ScatterResult { rows, summary })
}

// ---------------------------------------------------------------------------
// Consistency across n

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub replicate: usize,
    /// Whether the MLE exists (for the finite regime: the iteration did not diverge).
    pub existed: bool,
    pub converged: bool,
    pub iterations: usize,
    /// `||theta_hat - theta||_inf`
    pub err_inf: Option<f64>,
    /// `err_inf * sqrt(n / log n)`
    pub err_scaled: Option<f64>,
    /// `||d - E_theta_hat[deg]||_inf / max(1, ||d||_inf)`
    pub residual_rel: Option<f64>,
    pub sign_symmetric: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySummary {
    pub n: usize,
    pub replicates: usize,
    pub existed_fraction: f64,
    pub converged: usize,
    pub median_err: Option<f64>,
    pub q05_err: Option<f64>,
    pub q95_err: Option<f64>,
    pub median_err_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub regime: WeightRegime,
    pub rows: Vec<ConsistencyRow>,
    pub summary: Vec<ConsistencySummary>,
}

impl ConsistencyResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,replicate,existed,converged,iterations,err_inf,err_scaled,residual_rel,sign_symmetric\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                r.replicate,
                r.existed,
                r.converged,
                r.iterations,
                fmt_opt(r.err_inf),
                fmt_opt(r.err_scaled),
                fmt_opt(r.residual_rel),
                fmt_opt(r.sign_symmetric),
            );
        }
        out
    }
}

fn consistency_replicate(cfg: &ExperimentConfig, n: usize, replicate: usize) -> Result<ConsistencyRow> {
    let draw = draw_instance(cfg.regime, &cfg.theta_law, cfg.degree_source, cfg.seed, n, replicate)?;
    let mut row = ConsistencyRow {
        n,
        replicate,
        existed: false,
        converged: false,
        iterations: 0,
        err_inf: None,
        err_scaled: None,
        residual_rel: None,
        sign_symmetric: None,
    };
    let Some(report) = fit_with_iterates(cfg.regime, &draw.degrees, &cfg.solver, None)? else {
        return Ok(row);
    };
    row.existed = !report.diverged;
    row.converged = report.converged;
    row.iterations = report.iterations;
    if let (true, Some(theta_hat)) = (report.converged, report.theta_hat.as_ref()) {
        let err = dist_inf(theta_hat.as_slice(), draw.theta.as_slice());
        let nf = n as f64;
        row.err_inf = Some(err);
        row.err_scaled = Some(err * (nf / nf.ln()).sqrt());
        row.residual_rel = Some(report.residual_inf / draw.degrees.max().max(1.0));
        row.sign_symmetric = Some(sign_symmetry_holds(&draw.degrees, theta_hat, TIE_TOLERANCE));
    }
    Ok(row)
}

/// Runs every `(n, replicate)` pair, in parallel on the current rayon pool.
pub fn run_consistency_experiment(cfg: &ExperimentConfig) -> Result<ConsistencyResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |rep| (n, rep)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, rep)| consistency_replicate(cfg, n, rep))
        .collect::<Result<Vec<_>>>()?;

    let summary = cfg
        .n_values
        .iter()
        .map(|&n| {
            let group: Vec<&ConsistencyRow> = rows.iter().filter(|r| r.n == n).collect();
            let errs: Vec<f64> = group.iter().filter_map(|r| r.err_inf).collect();
            let scaled: Vec<f64> = group.iter().filter_map(|r| r.err_scaled).collect();
            ConsistencySummary {
                n,
                replicates: group.len(),
                existed_fraction: group.iter().filter(|r| r.existed).count() as f64
                    / group.len() as f64,
                converged: group.iter().filter(|r| r.converged).count(),
                median_err: quantile(&errs, 0.5),
                q05_err: quantile(&errs, 0.05),
                q95_err: quantile(&errs, 0.95),
                median_err_scaled: quantile(&scaled, 0.5),
            }
        })
        .collect();

    Ok(ConsistencyResult {
        regime: cfg.regime,
        rows,
        summary,
    })
}
