// Decides graphicality of a few degree sequences and cross-checks one of them
// with an explicit realization found by exhaustive search.

use maxent_graphs::{
    brute_force_realization, is_graphical, DegreeSequence, Result, WeightRegime,
};

pub fn run_example() -> Result<()> {
    let cases: [(WeightRegime, &[f64]); 5] = [
        (WeightRegime::finite(2)?, &[3.0, 3.0, 1.0, 1.0]),
        (WeightRegime::finite(3)?, &[3.0, 3.0, 1.0, 1.0]),
        (WeightRegime::InfiniteDiscrete, &[4.0, 2.0, 2.0]),
        (WeightRegime::InfiniteDiscrete, &[5.0, 2.0, 1.0]),
        (WeightRegime::Continuous, &[2.5, 1.25, 1.25]),
    ];
    for (regime, d) in cases {
        let v = is_graphical(regime, &DegreeSequence::new(d.to_vec())?)?;
        println!("{regime:<12} {d:?}: graphic = {}, violated k = {:?}", v.graphic, v.violated_k);
    }

    let d = DegreeSequence::new(vec![3.0, 3.0, 1.0, 1.0])?;
    if let Some(g) = brute_force_realization(WeightRegime::finite(3)?, &d, 2)? {
        println!("realization of {:?} with weights in {{0,1,2}}:", d.as_slice());
        for (i, j, w) in g.edges() {
            println!("  {i} - {j}: {w}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
