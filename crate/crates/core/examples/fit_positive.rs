// Newton fits for the continuous and infinite discrete regimes, checked
// against the closed forms available for three vertices.

use maxent_graphs::{fit, DegreeSequence, Error, Result, SolverOptions, WeightRegime};

pub fn run_example() -> Result<()> {
    let d = DegreeSequence::new(vec![2.5, 2.0, 1.5])?;
    let opts = SolverOptions::default();
    let (d1, d2, d3): (f64, f64, f64) = (2.5, 2.0, 1.5);

    let cont = fit(WeightRegime::Continuous, &d, &opts)?;
    let t = cont.theta_hat.expect("interior sequence");
    let t = t.as_slice();
    println!("continuous theta_hat = {t:?}");
    // 1 / (theta_1 + theta_2) = (d1 + d2 - d3) / 2
    println!("  1/(t1+t2) = {:.12}, (d1+d2-d3)/2 = {:.12}", 1.0 / (t[0] + t[1]), (d1 + d2 - d3) / 2.0);

    let inf = fit(WeightRegime::InfiniteDiscrete, &d, &opts)?;
    let t = inf.theta_hat.expect("interior sequence");
    let t = t.as_slice();
    println!("infinite theta_hat = {t:?}");
    println!("  t1+t2 = {:.12}, ln(1 + 2/(d1+d2-d3)) = {:.12}", t[0] + t[1], (2.0 / (d1 + d2 - d3)).ln_1p());

    // A vertex carrying half of the total weight leaves no interior point.
    let boundary = DegreeSequence::new(vec![4.0, 2.0, 2.0])?;
    match fit(WeightRegime::Continuous, &boundary, &opts) {
        Err(Error::NoMle) => println!("(4,2,2): no MLE"),
        other => println!("(4,2,2): unexpected {other:?}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
