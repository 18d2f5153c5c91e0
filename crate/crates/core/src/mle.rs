//! Maximum-likelihood estimation of vertex potentials from a degree sequence.
//!
//! The MLE solves the moment-matching system `d_i = sum_{j != i} mu(theta_i + theta_j)`.
//!
//! * Finite discrete regime: the fixed-point map
//!   `phi_i(x) = x_i + (log sum_{j != i} mu(x_i + x_j) - log d_i) / (r - 1)`,
//!   which is non-expansive in the sup norm and contracts geometrically over
//!   two steps whenever the MLE exists ([`fit_finite_discrete`]).
//! * Continuous and infinite discrete regimes: damped Newton ascent on the
//!   concave log-likelihood `-theta . d - Z(theta)` ([`fit_positive_regime`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphical::in_mean_interior;
use crate::meanfn::{self, mean_deriv_unchecked};
use crate::model::{
    dist_inf, norm_inf, DegreeSequence, FitReport, Potentials, TraceEntry, WeightRegime,
};
use crate::sampler::{expected_degree_sums, KahanSum};

const HESSIAN_RIDGE: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Finite discrete: bound on `||theta^(k+1) - theta^(k)||_inf`.
    /// Newton: bound on `||d - E[deg]||_inf / max(1, ||d||_inf)` and on the
    /// last Newton step relative to `max(1, ||theta||_inf)`.
    pub tol: f64,
    pub max_iter: usize,
    /// The fixed-point iteration is declared divergent once `||theta||_inf` exceeds this.
    pub divergence_norm: f64,
    /// Starting point; `None` selects the regime default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 5000,
            divergence_norm: 50.0,
            theta0: None,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOptions(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOptions("max_iter must be at least 1".into()));
        }
        if !(self.divergence_norm > 0.0) {
            return Err(Error::InvalidOptions(format!(
                "divergence_norm must be positive, got {}",
                self.divergence_norm
            )));
        }
        Ok(())
    }

    fn start(&self, n: usize) -> Result<Option<Vec<f64>>> {
        match &self.theta0 {
            Some(t) if t.len() != n => Err(Error::LengthMismatch {
                expected: n,
                got: t.len(),
            }),
            other => Ok(other.clone()),
        }
    }
}

/// Two-step contraction constants of the fixed-point map on the ball
/// `||theta||_inf <= k`: `||phi^2(x) - phi^2(y)|| <= (1 - delta^2) ||x - y||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionInfo {
    pub k: f64,
    pub delta: f64,
    /// `sqrt(1 - delta^2)`, the per-step geometric rate.
    pub beta: f64,
}

/// `log(e^x - 1)` for `x > 0` without overflow.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `delta = min{(e^{2K}-1)/(e^{2rK}-1), -mu'(2K)/mu(-2K)} / (r-1)`, with the
/// `K = 0` limits `1/r` and `(r+1)/6`. Requires `K >= 0` and `r >= 2`.
pub fn contraction_delta(r: u32, k: f64) -> ContractionInfo {
    debug_assert!(r >= 2 && k >= 0.0);
    let rf = f64::from(r);
    let regime = WeightRegime::FiniteDiscrete { r };
    let (first, second) = if k == 0.0 {
        (1.0 / rf, (rf + 1.0) / 6.0)
    } else {
        let first = (ln_expm1(2.0 * k) - ln_expm1(2.0 * rf * k)).exp();
        let second = -meanfn::mean_deriv_unchecked(regime, 2.0 * k)
            / meanfn::mean_unchecked(regime, -2.0 * k);
        (first, second)
    };
    let delta = first.min(second) / (rf - 1.0);
    ContractionInfo {
        k,
        delta,
        beta: (1.0 - delta * delta).sqrt(),
    }
}

fn check_positive_degrees(d: &DegreeSequence) -> Result<()> {
    for (index, &value) in d.as_slice().iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositiveDegree { index, value });
        }
    }
    Ok(())
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// One application of the fixed-point map `phi`.
pub fn phi_step(d: &DegreeSequence, r: u32, x: &Potentials) -> Result<Potentials> {
    let regime = WeightRegime::finite(r)?;
    check_len(d.len(), x.len())?;
    check_positive_degrees(d)?;
    let sums = expected_degree_sums(regime, x.as_slice());
    let inv = 1.0 / f64::from(r - 1);
    let next = x
        .as_slice()
        .iter()
        .zip(&sums)
        .zip(d.as_slice())
        .map(|((&xi, &s), &di)| xi + inv * (s.ln() - di.ln()))
        .collect();
    Potentials::new(next)
}

/// Fixed-point iteration `theta^(k+1) = phi(theta^(k))` for the finite
/// discrete regime, starting from `opts.theta0` (default zero).
///
/// The run is `converged` once a step is below `opts.tol`. It is `diverged`
/// when an iterate leaves the ball `||theta||_inf <= opts.divergence_norm`,
/// turns non-finite, or when the budget runs out while `||theta||_inf` is
/// still growing and the step sizes decay sub-geometrically.
pub fn fit_finite_discrete(d: &DegreeSequence, r: u32, opts: &SolverOptions) -> Result<FitReport> {
    fixed_point_solve(d, r, opts, &mut |_| {})
}

/// [`fit_finite_discrete`], calling `on_iterate` with `theta^(0)` and every later iterate.
pub(crate) fn fixed_point_solve(
    d: &DegreeSequence,
    r: u32,
    opts: &SolverOptions,
    on_iterate: &mut dyn FnMut(&[f64]),
) -> Result<FitReport> {
    let regime = WeightRegime::finite(r)?;
    opts.validate()?;
    check_positive_degrees(d)?;
    let n = d.len();
    let mut theta = opts.start(n)?.unwrap_or_else(|| vec![0.0; n]);
    let dv = d.as_slice();
    let ln_d: Vec<f64> = dv.iter().map(|x| x.ln()).collect();
    let inv = 1.0 / f64::from(r - 1);

    let mut trace = opts.record_trace.then(Vec::new);
    let mut steps = Vec::new();
    let mut norms = Vec::new();
    let mut residual = f64::INFINITY;
    on_iterate(&theta);

    for k in 0..opts.max_iter {
        let sums = expected_degree_sums(regime, &theta);
        residual = dist_inf(&sums, dv);
        let next: Vec<f64> = theta
            .iter()
            .zip(&sums)
            .zip(&ln_d)
            .map(|((&t, &s), &ld)| t + inv * (s.ln() - ld))
            .collect();
        if next.iter().any(|t| !t.is_finite()) {
            return Ok(FitReport {
                theta_hat: None,
                converged: false,
                diverged: true,
                iterations: k + 1,
                residual_inf: residual,
                trace,
            });
        }
        let step = dist_inf(&next, &theta);
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceEntry {
                iter: k,
                step_inf: step,
                residual_inf: residual,
            });
        }
        theta = next;
        on_iterate(&theta);
        let norm = norm_inf(&theta);
        steps.push(step);
        norms.push(norm);

        if step < opts.tol {
            let residual = dist_inf(&expected_degree_sums(regime, &theta), dv);
            return Ok(FitReport {
                theta_hat: Some(Potentials::new(theta)?),
                converged: true,
                diverged: false,
                iterations: k + 1,
                residual_inf: residual,
                trace,
            });
        }
        if norm > opts.divergence_norm {
            return Ok(FitReport {
                theta_hat: None,
                converged: false,
                diverged: true,
                iterations: k + 1,
                residual_inf: residual,
                trace,
            });
        }
    }

    let diverged = escape_signature(&steps, &norms);
    let residual_last = dist_inf(&expected_degree_sums(regime, &theta), dv);
    Ok(FitReport {
        theta_hat: if diverged { None } else { Some(Potentials::new(theta)?) },
        converged: false,
        diverged,
        iterations: opts.max_iter,
        residual_inf: if residual_last.is_finite() { residual_last } else { residual },
        trace,
    })
}

/// Heuristic divergence test at budget exhaustion: over the last half of the
/// run the sup norm never decreases, and the log-decay of the step size in
/// the final quarter is less than 85% of that in the previous quarter.
fn escape_signature(steps: &[f64], norms: &[f64]) -> bool {
    let k = steps.len();
    if k < 8 {
        return false;
    }
    let half = k / 2;
    let quarter = 3 * k / 4;
    let growing = norms[half..].windows(2).all(|w| w[1] >= w[0]);
    let early = (steps[half] / steps[quarter]).ln();
    let late = (steps[quarter] / steps[k - 1]).ln();
    let decelerating = !(early > 0.0) || late < 0.85 * early;
    growing && decelerating
}

/// `Z(theta) = sum_{i<j} Z1(theta_i + theta_j)`; `+inf` outside the parameter space.
pub fn log_partition(regime: WeightRegime, theta: &Potentials) -> f64 {
    let th = theta.as_slice();
    let n = th.len();
    let mut acc = KahanSum::default();
    for i in 0..n {
        for j in (i + 1)..n {
            acc.add(meanfn::z1(regime, th[i] + th[j]));
        }
    }
    acc.value()
}

/// Log-likelihood `-theta . d - Z(theta)` of one sample with degree sequence `d`.
pub fn log_likelihood(regime: WeightRegime, theta: &Potentials, d: &DegreeSequence) -> f64 {
    let dot: f64 = theta.as_slice().iter().zip(d.as_slice()).map(|(t, x)| t * x).sum();
    -dot - log_partition(regime, theta)
}

/// Hessian of `Z`: off-diagonal `(i, j)` is `-mu'(theta_i + theta_j)`, and the
/// diagonal carries the off-diagonal row sums.
pub fn hessian_logpartition(regime: WeightRegime, theta: &Potentials) -> Result<DMatrix<f64>> {
    theta.ensure_valid(regime)?;
    Ok(hessian_unchecked(regime, theta.as_slice()))
}

fn hessian_unchecked(regime: WeightRegime, th: &[f64]) -> DMatrix<f64> {
    let n = th.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = -mean_deriv_unchecked(regime, th[i] + th[j]);
            h[(i, j)] = w;
            h[(j, i)] = w;
            h[(i, i)] += w;
            h[(j, j)] += w;
        }
    }
    h
}

/// Max absolute row sum.
pub fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Upper bound `(3n - 4) / (2 ell (n - 2)(n - 1))` on `||J^{-1}||_inf` for a
/// symmetric diagonally dominant `J` whose off-diagonal entries are at least `ell > 0`.
pub fn inverse_norm_bound(n: usize, ell: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    if !(ell > 0.0) {
        return Err(Error::InvalidOptions(format!("ell must be positive, got {ell}")));
    }
    let nf = n as f64;
    Ok((3.0 * nf - 4.0) / (2.0 * ell * (nf - 2.0) * (nf - 1.0)))
}

fn solve_spd(mut h: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    for i in 0..h.nrows() {
        h[(i, i)] += HESSIAN_RIDGE;
    }
    if let Some(chol) = h.clone().cholesky() {
        return Ok(chol.solve(&rhs));
    }
    h.lu().solve(&rhs).ok_or(Error::Singular)
}

/// Damped Newton ascent on `-theta . d - Z(theta)` for the continuous and
/// infinite discrete regimes.
///
/// Starts at `(t0 / 2) 1` with `mean(t0) = mean(d) / (n - 1)` unless
/// `opts.theta0` is given. Steps are halved until the candidate lies in the
/// parameter space and the log-likelihood does not decrease. Converged when
/// `||d - E[deg]||_inf <= tol * max(1, ||d||_inf)`.
pub fn fit_positive_regime(
    regime: WeightRegime,
    d: &DegreeSequence,
    opts: &SolverOptions,
) -> Result<FitReport> {
    newton_solve(regime, d, opts, &mut |_| {})
}

/// [`fit_positive_regime`], calling `on_iterate` with the start and every accepted iterate.
pub(crate) fn newton_solve(
    regime: WeightRegime,
    d: &DegreeSequence,
    opts: &SolverOptions,
    on_iterate: &mut dyn FnMut(&[f64]),
) -> Result<FitReport> {
    if !regime.requires_positive_sums() {
        return Err(Error::UnsupportedRegime(regime.to_string()));
    }
    opts.validate()?;
    if !in_mean_interior(regime, d)? {
        return Err(Error::NoMle);
    }
    let n = d.len();
    let dv = d.as_slice();
    let mut theta = match opts.start(n)? {
        Some(t) => {
            let p = Potentials::new(t)?;
            p.ensure_valid(regime)?;
            p
        }
        None => {
            let avg = d.sum() / n as f64;
            let t0 = meanfn::mean_inverse(regime, avg / (n as f64 - 1.0))?;
            Potentials::constant(n, t0 / 2.0)?
        }
    };
    let threshold = opts.tol * d.max().max(1.0);
    let mut trace = opts.record_trace.then(Vec::new);
    let mut objective = log_likelihood(regime, &theta, d);
    on_iterate(theta.as_slice());

    let mut iterations = 0;
    let mut residual;
    loop {
        let sums = expected_degree_sums(regime, theta.as_slice());
        let grad: Vec<f64> = sums.iter().zip(dv).map(|(s, x)| s - x).collect();
        residual = norm_inf(&grad);
        let small_residual = residual <= threshold;
        if iterations >= opts.max_iter && !small_residual {
            break;
        }
        let h = hessian_unchecked(regime, theta.as_slice());
        let dir = solve_spd(h, DVector::from_vec(grad))?;
        // Where mu' is small a tiny residual can still hide a sizeable error in
        // theta, so the Newton step must be negligible too.
        let done = |theta: Potentials, iterations| FitReport {
            theta_hat: Some(theta),
            converged: true,
            diverged: false,
            iterations,
            residual_inf: residual,
            trace: None,
        };
        if small_residual && (dir.amax() <= opts.tol * theta.norm_inf().max(1.0) || iterations >= opts.max_iter) {
            return Ok(FitReport { trace, ..done(theta, iterations) });
        }

        let slack = 1e-13 * (1.0 + objective.abs());
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = theta
                .as_slice()
                .iter()
                .zip(dir.iter())
                .map(|(t, s)| t + scale * s)
                .collect();
            let cand = Potentials::new(cand)?;
            if cand.is_valid(regime) {
                let value = log_likelihood(regime, &cand, d);
                if value >= objective - slack {
                    accepted = Some((cand, value));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((cand, value)) = accepted else {
            if small_residual {
                return Ok(FitReport { trace, ..done(theta, iterations) });
            }
            break;
        };
        let step = dist_inf(cand.as_slice(), theta.as_slice());
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceEntry {
                iter: iterations,
                step_inf: step,
                residual_inf: residual,
            });
        }
        theta = cand;
        on_iterate(theta.as_slice());
        objective = value;
        iterations += 1;
    }

    Ok(FitReport {
        theta_hat: Some(theta),
        converged: false,
        diverged: false,
        iterations,
        residual_inf: residual,
        trace,
    })
}

/// Dispatches to the regime's solver.
pub fn fit(regime: WeightRegime, d: &DegreeSequence, opts: &SolverOptions) -> Result<FitReport> {
    match regime {
        WeightRegime::FiniteDiscrete { r } => fit_finite_discrete(d, r, opts),
        _ => fit_positive_regime(regime, d, opts),
    }
}

/// For a decreasing mean function: `d_i > d_j` iff `theta_i < theta_j`, and
/// equal degrees give potentials within `tie_tol`.
pub fn sign_symmetry_holds(d: &DegreeSequence, theta: &Potentials, tie_tol: f64) -> bool {
    let dv = d.as_slice();
    let th = theta.as_slice();
    if dv.len() != th.len() {
        return false;
    }
    let mut order: Vec<usize> = (0..dv.len()).collect();
    order.sort_by(|&a, &b| dv[a].total_cmp(&dv[b]));
    // (min theta, max theta) per group of equal degree, in increasing degree.
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut prev_d = f64::NAN;
    for &i in &order {
        if dv[i] == prev_d {
            let g = groups.last_mut().expect("group exists");
            g.0 = g.0.min(th[i]);
            g.1 = g.1.max(th[i]);
        } else {
            groups.push((th[i], th[i]));
            prev_d = dv[i];
        }
    }
    groups.iter().all(|&(lo, hi)| hi - lo <= tie_tol)
        && groups.windows(2).all(|w| w[1].1 < w[0].0)
}
