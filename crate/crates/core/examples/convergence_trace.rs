// Geometric convergence of the fixed-point iteration for r = 2, 5, 10:
// larger r converges more slowly.

use maxent_graphs::{run_convergence_trace, DegreeSource, Result, SingleRun, SolverOptions, ThetaLaw, WeightRegime};

pub fn run_example() -> Result<()> {
    let n = std::env::var("TRACE_N").ok().and_then(|s| s.parse().ok()).unwrap_or(100);
    for r in [2, 5, 10] {
        let run = SingleRun {
            regime: WeightRegime::finite(r)?,
            n,
            theta_law: ThetaLaw::UniformBox { lo: -1.0, hi: 1.0 },
            seed: 1,
            solver: SolverOptions { tol: 1e-13, ..Default::default() },
            source: DegreeSource::Sampled,
        };
        let trace = run_convergence_trace(&run)?;
        let s = &trace.summary;
        println!(
            "r = {r:>2}: {} iterations, log10-distance slope {:.4} per step, worst two-step ratio {:.4}",
            s.iterations,
            s.slope.unwrap_or(f64::NAN),
            s.max_two_step_ratio.unwrap_or(f64::NAN)
        );
        for row in trace.rows.iter().step_by(trace.rows.len().div_ceil(6).max(1)) {
            println!("    iter {:>5}  log10 dist {:>8.3}", row.iter, row.log10_dist);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
