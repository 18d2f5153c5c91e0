//! Graphicality of degree sequences for weighted graphs.
//!
//! * finite discrete (weights in `{0..r-1}`): `sum d` even and, with `d` sorted
//!   descending, `sum_{i<=k} d_i <= (r-1)k(k-1) + sum_{j>k} min(d_j, (r-1)k)`
//!   for every `k = 1..n`;
//! * infinite discrete: `sum d` even and `max d <= sum d / 2`;
//! * continuous: `max d <= sum d / 2`.
//!
//! [`brute_force_graphical`] is an exhaustive oracle for small discrete instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DegreeSequence, WeightRegime, WeightedGraph};

/// Largest vertex count the brute-force oracle accepts.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 6;

/// Largest number of free weight assignments the brute-force oracle will enumerate.
pub const BRUTE_FORCE_MAX_ASSIGNMENTS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphicalityVerdict {
    pub graphic: bool,
    /// First violated inequality `k` (1-based, in descending-sorted order).
    /// Finite discrete regime only.
    pub violated_k: Option<usize>,
    /// Whether the degree sum is even. Always true for the continuous regime.
    pub parity_ok: bool,
}

/// Tests whether `d` is the degree sequence of some graph with weights in the
/// regime's weight set.
pub fn is_graphical(regime: WeightRegime, d: &DegreeSequence) -> Result<GraphicalityVerdict> {
    match regime {
        WeightRegime::FiniteDiscrete { r } => {
            let ints = d.to_integers()?;
            Ok(finite_verdict(r, ints))
        }
        WeightRegime::InfiniteDiscrete => {
            let ints = d.to_integers()?;
            let sum: u128 = ints.iter().map(|&x| u128::from(x)).sum();
            let max = ints.iter().copied().max().unwrap_or(0);
            let parity_ok = sum.is_multiple_of(2);
            Ok(GraphicalityVerdict {
                graphic: parity_ok && 2 * u128::from(max) <= sum,
                violated_k: None,
                parity_ok,
            })
        }
        WeightRegime::Continuous => Ok(GraphicalityVerdict {
            graphic: 2.0 * d.max() <= d.sum(),
            violated_k: None,
            parity_ok: true,
        }),
    }
}

fn finite_verdict(r: u32, mut d: Vec<u64>) -> GraphicalityVerdict {
    d.sort_unstable_by(|a, b| b.cmp(a));
    let n = d.len();
    let sum: u128 = d.iter().map(|&x| u128::from(x)).sum();
    let parity_ok = sum.is_multiple_of(2);

    // suffix[j] = sum of d[j..]
    let mut suffix = vec![0u128; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + u128::from(d[j]);
    }

    let cap = u128::from(r - 1);
    let mut violated_k = None;
    let mut prefix = 0u128;
    for k in 1..=n {
        prefix += u128::from(d[k - 1]);
        let bound = cap * k as u128;
        // Among positions j >= k (0-based), entries > bound form a prefix since d is sorted.
        let tail = &d[k..];
        let big = tail.partition_point(|&x| u128::from(x) > bound);
        let rhs = cap * (k as u128) * (k as u128 - 1) + bound * big as u128 + suffix[k + big];
        if prefix > rhs {
            violated_k = Some(k);
            break;
        }
    }

    GraphicalityVerdict {
        graphic: parity_ok && violated_k.is_none(),
        violated_k,
        parity_ok,
    }
}

/// Interior of the mean parameter space for the continuous and infinite
/// discrete regimes: all `d_i > 0` and `max d < sum d / 2`. This is exactly
/// the condition under which the MLE exists (and is then unique).
pub fn in_mean_interior(regime: WeightRegime, d: &DegreeSequence) -> Result<bool> {
    if !regime.requires_positive_sums() {
        return Err(Error::UnsupportedRegime(regime.to_string()));
    }
    let all_positive = d.as_slice().iter().all(|&x| x > 0.0);
    Ok(all_positive && 2.0 * d.max() < d.sum())
}

/// Exhaustive search for a realization of `d` with every edge weight in
/// `{0..=weight_cap}` (further capped at `r-1` for the finite regime).
pub fn brute_force_graphical(
    regime: WeightRegime,
    d: &DegreeSequence,
    weight_cap: u64,
) -> Result<bool> {
    Ok(brute_force_realization(regime, d, weight_cap)?.is_some())
}

/// Like [`brute_force_graphical`], returning the first realization found.
///
/// Edges are enumerated row by row; the last edge of each row is forced by the
/// vertex's residual degree, so only `C(n-1, 2)` weights are free. The search
/// refuses when `(cap+1)^C(n-1,2)` exceeds [`BRUTE_FORCE_MAX_ASSIGNMENTS`].
pub fn brute_force_realization(
    regime: WeightRegime,
    d: &DegreeSequence,
    weight_cap: u64,
) -> Result<Option<WeightedGraph>> {
    let cap = match regime {
        WeightRegime::FiniteDiscrete { r } => weight_cap.min(u64::from(r - 1)),
        WeightRegime::InfiniteDiscrete => weight_cap,
        WeightRegime::Continuous => {
            return Err(Error::UnsupportedRegime(regime.to_string()));
        }
    };
    let n = d.len();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::SearchRefused(format!(
            "{n} vertices exceeds the limit of {BRUTE_FORCE_MAX_VERTICES}"
        )));
    }
    let free = (n - 1) * (n - 2) / 2;
    let space = (cap as f64 + 1.0).powi(free as i32);
    if space > BRUTE_FORCE_MAX_ASSIGNMENTS {
        return Err(Error::SearchRefused(format!(
            "{space:.3e} assignments exceeds the limit of {BRUTE_FORCE_MAX_ASSIGNMENTS:e}"
        )));
    }
    let residual = d.to_integers()?;

    let mut search = Search {
        n,
        cap,
        residual,
        weights: Vec::with_capacity(n * (n - 1) / 2),
    };
    if !search.row(0) {
        return Ok(None);
    }
    let upper = search.weights.iter().map(|&w| w as f64).collect();
    WeightedGraph::from_upper(n, regime, upper).map(Some)
}

struct Search {
    n: usize,
    cap: u64,
    residual: Vec<u64>,
    weights: Vec<u64>,
}

impl Search {
    fn row(&mut self, i: usize) -> bool {
        if i + 1 >= self.n {
            return self.residual[self.n - 1] == 0;
        }
        self.edge(i, i + 1)
    }

    fn edge(&mut self, i: usize, j: usize) -> bool {
        let last = self.n - 1;
        if j == last {
            // Forced: the remaining degree of i goes on this edge.
            let w = self.residual[i];
            if w > self.cap || w > self.residual[last] {
                return false;
            }
            self.assign(i, j, w);
            if self.row(i + 1) {
                return true;
            }
            self.unassign(i, j, w);
            return false;
        }
        let hi = self.cap.min(self.residual[i]).min(self.residual[j]);
        for w in 0..=hi {
            self.assign(i, j, w);
            if self.edge(i, j + 1) {
                return true;
            }
            self.unassign(i, j, w);
        }
        false
    }

    fn assign(&mut self, i: usize, j: usize, w: u64) {
        self.residual[i] -= w;
        self.residual[j] -= w;
        self.weights.push(w);
    }

    fn unassign(&mut self, i: usize, j: usize, w: u64) {
        self.residual[i] += w;
        self.residual[j] += w;
        self.weights.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(d: &[f64]) -> DegreeSequence {
        DegreeSequence::new(d.to_vec()).unwrap()
    }

    fn finite(r: u32) -> WeightRegime {
        WeightRegime::finite(r).unwrap()
    }

    /// All `2^6` simple graphs on 4 vertices, enumerated without pruning.
    fn simple_graph_degrees_n4() -> Vec<[u64; 4]> {
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        (0u32..64)
            .map(|mask| {
                let mut d = [0u64; 4];
                for (bit, &(i, j)) in pairs.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        d[i] += 1;
                        d[j] += 1;
                    }
                }
                d
            })
            .collect()
    }

    #[test]
    fn classical_counterexample() {
        let target = [3, 3, 1, 1];
        let realizable = simple_graph_degrees_n4().iter().any(|d| {
            let mut s = *d;
            s.sort_unstable_by(|a, b| b.cmp(a));
            s == target
        });
        assert!(!realizable);
        let v = is_graphical(finite(2), &seq(&[3.0, 3.0, 1.0, 1.0])).unwrap();
        assert!(!v.graphic);
        assert!(v.parity_ok);
        assert_eq!(v.violated_k, Some(2));
        assert!(!brute_force_graphical(finite(2), &seq(&[3.0, 3.0, 1.0, 1.0]), 1).unwrap());
    }

    #[test]
    fn verdict_examples() {
        assert!(is_graphical(finite(3), &seq(&[4.0, 4.0, 4.0])).unwrap().graphic);
        assert!(!is_graphical(WeightRegime::Continuous, &seq(&[5.0, 2.0, 2.0])).unwrap().graphic);
        let odd = is_graphical(WeightRegime::InfiniteDiscrete, &seq(&[3.0, 1.0, 1.0])).unwrap();
        assert!(!odd.graphic && !odd.parity_ok);
        assert!(is_graphical(WeightRegime::InfiniteDiscrete, &seq(&[3.0, 1.0, 1.0, 1.0]))
            .unwrap()
            .graphic);
    }

    #[test]
    fn continuous_boundary_is_graphic() {
        let v = is_graphical(WeightRegime::Continuous, &seq(&[3.0, 2.0, 1.0])).unwrap();
        assert!(v.graphic);
        assert!(!in_mean_interior(WeightRegime::Continuous, &seq(&[3.0, 2.0, 1.0])).unwrap());
    }

    #[test]
    fn discrete_regimes_reject_fractions() {
        let d = seq(&[1.5, 1.0, 0.5]);
        assert!(matches!(
            is_graphical(finite(3), &d),
            Err(Error::NonIntegralDegree { index: 0, .. })
        ));
        assert!(is_graphical(WeightRegime::InfiniteDiscrete, &d).is_err());
        assert!(is_graphical(WeightRegime::Continuous, &d).is_ok());
    }

    #[test]
    fn interior_examples() {
        assert!(in_mean_interior(WeightRegime::Continuous, &seq(&[2.0, 2.0, 2.0])).unwrap());
        assert!(in_mean_interior(WeightRegime::InfiniteDiscrete, &seq(&[0.5, 0.5, 0.5])).unwrap());
        assert!(!in_mean_interior(WeightRegime::Continuous, &seq(&[2.0, 2.0, 0.0])).unwrap());
        assert!(matches!(
            in_mean_interior(finite(2), &seq(&[1.0, 1.0, 1.0])),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_graphical(finite(2), &seq(&[2.0, 2.0, 2.0]), 1).unwrap());
        let g = brute_force_realization(WeightRegime::InfiniteDiscrete, &seq(&[4.0, 2.0, 2.0]), 4)
            .unwrap()
            .unwrap();
        assert_eq!(g.weight(0, 1), 2.0);
        assert_eq!(g.weight(0, 2), 2.0);
        assert_eq!(g.weight(1, 2), 0.0);
        assert_eq!(g.degree_sequence().as_slice(), &[4.0, 2.0, 2.0]);
    }

    #[test]
    fn brute_force_guards() {
        let big = seq(&[1.0; 7]);
        assert!(matches!(
            brute_force_graphical(finite(2), &big, 1),
            Err(Error::SearchRefused(_))
        ));
        // n = 6 has 10 free edges: 7^10 > 1e8.
        let six = seq(&[6.0; 6]);
        assert!(matches!(
            brute_force_graphical(WeightRegime::InfiniteDiscrete, &six, 6),
            Err(Error::SearchRefused(_))
        ));
        assert!(brute_force_graphical(WeightRegime::InfiniteDiscrete, &six, 5).is_ok());
        assert!(matches!(
            brute_force_graphical(WeightRegime::Continuous, &seq(&[1.0, 1.0, 0.0]), 1),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn brute_force_matches_naive_enumeration_n4() {
        let degrees = simple_graph_degrees_n4();
        for a in 0..=3u64 {
            for b in 0..=3u64 {
                for c in 0..=3u64 {
                    for e in 0..=3u64 {
                        let target = [a, b, c, e];
                        let naive = degrees.contains(&target);
                        let d = seq(&target.map(|x| x as f64));
                        assert_eq!(brute_force_graphical(finite(2), &d, 1).unwrap(), naive);
                        assert_eq!(is_graphical(finite(2), &d).unwrap().graphic, naive);
                    }
                }
            }
        }
    }
}
