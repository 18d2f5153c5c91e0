// Samples one graph per regime from fixed potentials and compares its degrees
// with the expected degrees.

use maxent_graphs::{expected_degrees, sample_graph, Potentials, Result, SeededRng, WeightRegime};

pub fn run_example() -> Result<()> {
    let theta = Potentials::new((0..8).map(|i| 0.3 + 0.1 * f64::from(i)).collect())?;
    let rng = SeededRng::new(2024, 0);
    for regime in [WeightRegime::finite(4)?, WeightRegime::InfiniteDiscrete, WeightRegime::Continuous] {
        let g = sample_graph(regime, &theta, &rng)?;
        let d = g.degree_sequence();
        let e = expected_degrees(regime, &theta)?;
        println!("{regime}: {} nonzero edges", g.edges().count());
        for (i, (x, y)) in d.as_slice().iter().zip(e.as_slice()).enumerate() {
            println!("  vertex {i}: degree {x:>8.3}  expected {y:>8.3}");
        }
    }
    // The same seed and stream always give the same graph.
    let regime = WeightRegime::Continuous;
    assert_eq!(sample_graph(regime, &theta, &rng)?, sample_graph(regime, &theta, &rng)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
