// Fits the finite discrete model with the fixed-point iteration: once for a
// sampled degree sequence, once for a sequence with no MLE.

use maxent_graphs::{
    expected_degrees, fit_finite_discrete, sample_graph, DegreeSequence, Potentials, Result,
    SeededRng, SolverOptions, WeightRegime,
};

pub fn run_example() -> Result<()> {
    let r = 3;
    let regime = WeightRegime::finite(r)?;
    let theta = Potentials::new(vec![-0.8, -0.3, 0.0, 0.2, 0.5, 0.9, -0.1, 0.4, 0.7, -0.6])?;
    let d = sample_graph(regime, &theta, &SeededRng::new(5, 0))?.degree_sequence();
    println!("degrees: {:?}", d.as_slice());

    let report = fit_finite_discrete(&d, r, &SolverOptions::default())?;
    println!(
        "converged = {} after {} iterations, residual {:.2e}",
        report.converged, report.iterations, report.residual_inf
    );
    if let Some(hat) = &report.theta_hat {
        let e = expected_degrees(regime, hat)?;
        for ((t, h), (di, ei)) in theta.as_slice().iter().zip(hat.as_slice()).zip(d.as_slice().iter().zip(e.as_slice())) {
            println!("  theta {t:>5.2}  theta_hat {h:>7.3}   d {di:>3}  E[d] {ei:>8.4}");
        }
    }

    // Every vertex of K3 at full weight 1 is the only realization: on the
    // boundary of the mean space, so the iteration runs off to infinity.
    let edge = DegreeSequence::new(vec![2.0, 2.0, 2.0])?;
    let opts = SolverOptions { max_iter: 2000, ..Default::default() };
    let report = fit_finite_discrete(&edge, 2, &opts)?;
    println!("(2,2,2) with r = 2: converged = {}, diverged = {}", report.converged, report.diverged);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
