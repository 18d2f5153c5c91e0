// Evaluates the marginal log-partition function and the mean function in
// each regime, then inverts the mean function.

use maxent_graphs::{marginal, mean_inverse, Result, WeightRegime};

pub fn run_example() -> Result<()> {
    let regimes = [
        WeightRegime::finite(2)?,
        WeightRegime::finite(5)?,
        WeightRegime::InfiniteDiscrete,
        WeightRegime::Continuous,
    ];
    for regime in regimes {
        println!("{regime}");
        for t in [0.25, 1.0, 3.0] {
            let m = marginal(regime, t)?;
            let back = mean_inverse(regime, m.mu)?;
            println!(
                "  t = {t:<5} z1 = {:>10.6}  mu = {:>10.6}  mu' = {:>10.6}  mu^-1(mu) = {back:.12}",
                m.z1, m.mu, m.mu_prime
            );
        }
    }
    // Finite weights are defined for every real t; note the symmetry mu(-t) + mu(t) = r - 1.
    let r5 = WeightRegime::finite(5)?;
    let (a, b) = (marginal(r5, -1.5)?.mu, marginal(r5, 1.5)?.mu);
    println!("r = 5: mu(-1.5) + mu(1.5) = {}", a + b);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
