//! Maximum-entropy random graphs with given expected degree sequences.
//!
//! Three edge-weight regimes are supported: finite discrete weights
//! `{0, ..., r-1}`, unbounded integer weights, and nonnegative real weights.
//! In each, the maximum-entropy distribution with prescribed expected degrees
//! gives every vertex a potential `theta_i`, and edge `(i, j)` carries an
//! independent weight with density proportional to `exp(-(theta_i + theta_j) a)`.
//!
//! The crate samples from these models, fits `theta` to an observed degree
//! sequence by maximum likelihood, and decides whether a degree sequence is
//! graphical.
//!
//! ```
//! use maxent_graphs::{fit, DegreeSequence, SolverOptions, WeightRegime};
//!
//! let d = DegreeSequence::new(vec![2.0, 2.0, 2.0]).unwrap();
//! let report = fit(WeightRegime::Continuous, &d, &SolverOptions::default()).unwrap();
//! let theta = report.theta_hat.unwrap();
//! assert!(theta.as_slice().iter().all(|t| (t - 0.5).abs() < 1e-10));
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod graphical;
pub mod meanfn;
pub mod mle;
pub mod model;
pub mod sampler;

pub use error::{Error, Result};
pub use experiments::{
    run_consistency_experiment, run_convergence_trace, run_scatter, DegreeSource,
    ExperimentConfig, SingleRun, ThetaLaw,
};
pub use graphical::{brute_force_graphical, brute_force_realization, in_mean_interior, is_graphical, GraphicalityVerdict};
pub use meanfn::{marginal, mean, mean_deriv, mean_inverse, z1, MarginalEval};
pub use mle::{
    contraction_delta, fit, fit_finite_discrete, fit_positive_regime, hessian_logpartition,
    inverse_norm_bound, log_likelihood, log_partition, matrix_inf_norm, phi_step,
    sign_symmetry_holds, ContractionInfo, SolverOptions,
};
pub use model::{
    degree_sequence, pair_count, pair_index, validate_potentials, DegreeSequence, FitReport,
    Potentials, TraceEntry, WeightRegime, WeightedGraph,
};
pub use sampler::{expected_degrees, sample_graph, SeededRng};
