// The Hessian of the log-partition function is diagonally balanced; its
// inverse obeys an explicit infinity-norm bound in terms of the smallest
// off-diagonal entry.

use maxent_graphs::{
    hessian_logpartition, inverse_norm_bound, matrix_inf_norm, Potentials, Result, WeightRegime,
};

pub fn run_example() -> Result<()> {
    for regime in [WeightRegime::Continuous, WeightRegime::InfiniteDiscrete] {
        for n in [5usize, 10, 20] {
            let theta = Potentials::new((0..n).map(|i| 0.5 + 0.05 * i as f64).collect())?;
            let h = hessian_logpartition(regime, &theta)?;
            let mut ell = f64::INFINITY;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        ell = ell.min(h[(i, j)]);
                    }
                }
            }
            let inv = h.clone().try_inverse().expect("positive definite");
            let bound = inverse_norm_bound(n, ell)?;
            println!(
                "{regime:<10} n = {n:>2}: ||H^-1|| = {:.6}  bound = {bound:.6}",
                matrix_inf_norm(&inv)
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
