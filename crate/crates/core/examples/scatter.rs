// Estimated against true potentials for one finite discrete graph; the
// points hug the diagonal.

use maxent_graphs::{run_scatter, DegreeSource, Result, SingleRun, SolverOptions, ThetaLaw, WeightRegime};

pub fn run_example() -> Result<()> {
    let run = SingleRun {
        regime: WeightRegime::finite(5)?,
        n: 120,
        theta_law: ThetaLaw::UniformBox { lo: -1.0, hi: 1.0 },
        seed: 9,
        solver: SolverOptions::default(),
        source: DegreeSource::Sampled,
    };
    let res = run_scatter(&run)?;
    let s = &res.summary;
    println!(
        "n = {}: slope {:.4}, intercept {:.4}, max |theta_hat - theta| = {:.4}",
        s.n,
        s.slope.unwrap_or(f64::NAN),
        s.intercept.unwrap_or(f64::NAN),
        s.max_abs_err.unwrap_or(f64::NAN)
    );
    for row in res.rows.iter().take(8) {
        println!("  {:>3}: {:>7.3} -> {:>7.3}", row.vertex, row.theta, row.theta_hat);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
