//! Domain types shared by every other module: the weight regime, weighted
//! graphs, degree sequences, vertex potentials and solver reports.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest graph the model is defined for.
pub const MIN_VERTICES: usize = 3;

/// Which edge-weight set (and base measure) is in force.
///
/// * `FiniteDiscrete { r }`: weights in `{0, 1, ..., r-1}` with counting measure.
/// * `InfiniteDiscrete`: weights in the nonnegative integers with counting measure.
/// * `Continuous`: weights in `[0, inf)` with Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RegimeRepr", into = "RegimeRepr")]
pub enum WeightRegime {
    FiniteDiscrete { r: u32 },
    InfiniteDiscrete,
    Continuous,
}

impl WeightRegime {
    pub fn finite(r: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidLevels(r));
        }
        Ok(WeightRegime::FiniteDiscrete { r })
    }

    /// Parses the CLI/JSON spelling: `finite` (with `r`), `infinite`, `continuous`.
    pub fn from_kind(kind: &str, r: Option<u32>) -> Result<Self> {
        match kind {
            "finite" => match r {
                Some(r) => Self::finite(r),
                None => Err(Error::Parse("regime 'finite' requires r".into())),
            },
            "infinite" => Ok(WeightRegime::InfiniteDiscrete),
            "continuous" => Ok(WeightRegime::Continuous),
            other => Err(Error::Parse(format!("unknown regime kind '{other}'"))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WeightRegime::FiniteDiscrete { .. } => "finite",
            WeightRegime::InfiniteDiscrete => "infinite",
            WeightRegime::Continuous => "continuous",
        }
    }

    pub fn levels(&self) -> Option<u32> {
        match *self {
            WeightRegime::FiniteDiscrete { r } => Some(r),
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, WeightRegime::Continuous)
    }

    /// True when the natural parameter space requires `theta_i + theta_j > 0`.
    pub fn requires_positive_sums(&self) -> bool {
        !matches!(self, WeightRegime::FiniteDiscrete { .. })
    }

    /// Whether `w` belongs to the weight set S.
    pub fn contains_weight(&self, w: f64) -> bool {
        if !(w.is_finite() && w >= 0.0) {
            return false;
        }
        match *self {
            WeightRegime::FiniteDiscrete { r } => w.fract() == 0.0 && w <= f64::from(r - 1),
            WeightRegime::InfiniteDiscrete => w.fract() == 0.0 && w <= MAX_EXACT_INT,
            WeightRegime::Continuous => true,
        }
    }
}

/// Largest integer that round-trips through `f64` exactly.
pub(crate) const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

impl fmt::Display for WeightRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRegime::FiniteDiscrete { r } => write!(f, "finite(r={r})"),
            WeightRegime::InfiniteDiscrete => write!(f, "infinite"),
            WeightRegime::Continuous => write!(f, "continuous"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RegimeRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<u32>,
}

impl TryFrom<RegimeRepr> for WeightRegime {
    type Error = Error;

    fn try_from(repr: RegimeRepr) -> Result<Self> {
        WeightRegime::from_kind(&repr.kind, repr.r)
    }
}

impl From<WeightRegime> for RegimeRepr {
    fn from(regime: WeightRegime) -> Self {
        RegimeRepr {
            kind: regime.kind().to_string(),
            r: regime.levels(),
        }
    }
}

/// Number of unordered vertex pairs.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Packed index of the pair `(i, j)`, `i < j`, in row-major upper-triangular order.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[derive(Debug, Clone, PartialEq)]
enum EdgeWeights {
    Integer(Vec<u64>),
    Real(Vec<f64>),
}

/// Undirected weighted graph without self-loops. Only the upper triangle is
/// stored, so symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    regime: WeightRegime,
    weights: EdgeWeights,
}

impl WeightedGraph {
    /// All-zero graph on `n` vertices.
    pub fn empty(n: usize, regime: WeightRegime) -> Result<Self> {
        check_vertices(n)?;
        let m = pair_count(n);
        let weights = if regime.is_discrete() {
            EdgeWeights::Integer(vec![0; m])
        } else {
            EdgeWeights::Real(vec![0.0; m])
        };
        Ok(WeightedGraph { n, regime, weights })
    }

    /// Builds a graph from packed upper-triangular weights (see [`pair_index`]).
    pub fn from_upper(n: usize, regime: WeightRegime, upper: Vec<f64>) -> Result<Self> {
        check_vertices(n)?;
        if upper.len() != pair_count(n) {
            return Err(Error::LengthMismatch {
                expected: pair_count(n),
                got: upper.len(),
            });
        }
        let mut g = WeightedGraph::empty(n, regime)?;
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                g.set(i, j, upper[idx])?;
                idx += 1;
            }
        }
        Ok(g)
    }

    /// Builds a graph from `(i, j, w)` triples; omitted pairs have weight 0.
    pub fn from_edges(
        n: usize,
        regime: WeightRegime,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut g = WeightedGraph::empty(n, regime)?;
        for (i, j, w) in edges {
            g.set(i, j, w)?;
        }
        Ok(g)
    }

    /// Sets the weight of `{i, j}`. Either orientation is accepted.
    pub fn set(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b || b >= self.n {
            return Err(Error::InvalidEdge { i, j, n: self.n });
        }
        if !self.regime.contains_weight(w) {
            return Err(Error::WeightOutOfRange {
                i,
                j,
                weight: w,
                regime: self.regime.to_string(),
            });
        }
        let idx = pair_index(self.n, a, b);
        match &mut self.weights {
            EdgeWeights::Integer(v) => v[idx] = w as u64,
            EdgeWeights::Real(v) => v[idx] = w,
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn regime(&self) -> WeightRegime {
        self.regime
    }

    /// Weight of `{i, j}`; the diagonal is zero.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let idx = pair_index(self.n, a, b);
        match &self.weights {
            EdgeWeights::Integer(v) => v[idx] as f64,
            EdgeWeights::Real(v) => v[idx],
        }
    }

    /// Iterates `(i, j, w)` over all pairs `i < j`, including zero weights.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.weight(i, j))))
    }

    /// Iterates `(i, j, w)` over pairs with nonzero weight.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs().filter(|&(_, _, w)| w != 0.0)
    }

    /// `d_i = sum_{j != i} a_ij`. Discrete regimes sum in exact integer arithmetic.
    pub fn degree_sequence(&self) -> DegreeSequence {
        let n = self.n;
        let d: Vec<f64> = match &self.weights {
            EdgeWeights::Integer(v) => {
                let mut acc = vec![0u64; n];
                let mut idx = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        acc[i] += v[idx];
                        acc[j] += v[idx];
                        idx += 1;
                    }
                }
                acc.into_iter().map(|x| x as f64).collect()
            }
            EdgeWeights::Real(v) => {
                let mut acc = vec![0.0f64; n];
                let mut idx = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        acc[i] += v[idx];
                        acc[j] += v[idx];
                        idx += 1;
                    }
                }
                acc
            }
        };
        DegreeSequence { d }
    }
}

/// Free-function form of [`WeightedGraph::degree_sequence`].
pub fn degree_sequence(g: &WeightedGraph) -> DegreeSequence {
    g.degree_sequence()
}

fn check_vertices(n: usize) -> Result<()> {
    if n < MIN_VERTICES {
        return Err(Error::TooFewVertices(n));
    }
    Ok(())
}

/// Vector of per-vertex weighted degrees. Entries are finite and nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DegreeSequence {
    d: Vec<f64>,
}

impl DegreeSequence {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        check_vertices(d.len())?;
        for (index, &value) in d.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidDegree { index, value });
            }
        }
        Ok(DegreeSequence { d })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.d
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.d.iter().sum()
    }

    /// Entries as exact integers, or the first non-integral entry as an error.
    pub fn to_integers(&self) -> Result<Vec<u64>> {
        self.d
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value.fract() != 0.0 || value > MAX_EXACT_INT {
                    Err(Error::NonIntegralDegree { index, value })
                } else {
                    Ok(value as u64)
                }
            })
            .collect()
    }
}

impl<'de> Deserialize<'de> for DegreeSequence {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let d = Vec::<f64>::deserialize(de)?;
        DegreeSequence::new(d).map_err(serde::de::Error::custom)
    }
}

/// Vertex potentials `theta`. Validity depends on the regime, see [`Potentials::is_valid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Potentials {
    theta: Vec<f64>,
}

impl Potentials {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        check_vertices(theta.len())?;
        Ok(Potentials { theta })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Potentials::new(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Potentials::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.theta
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.theta)
    }

    /// Membership in the natural parameter space: always for finite discrete,
    /// otherwise every pairwise sum must be strictly positive.
    pub fn is_valid(&self, regime: WeightRegime) -> bool {
        if self.theta.iter().any(|t| !t.is_finite()) {
            return false;
        }
        if !regime.requires_positive_sums() {
            return true;
        }
        // The smallest pairwise sum is the sum of the two smallest entries.
        let (mut lo1, mut lo2) = (f64::INFINITY, f64::INFINITY);
        for &t in &self.theta {
            if t < lo1 {
                lo2 = lo1;
                lo1 = t;
            } else if t < lo2 {
                lo2 = t;
            }
        }
        lo1 + lo2 > 0.0
    }

    pub(crate) fn ensure_valid(&self, regime: WeightRegime) -> Result<()> {
        if self.is_valid(regime) {
            Ok(())
        } else {
            Err(Error::InvalidPotentials(regime.to_string()))
        }
    }
}

/// Free-function form of [`Potentials::is_valid`].
pub fn validate_potentials(theta: &Potentials, regime: WeightRegime) -> bool {
    theta.is_valid(regime)
}

/// One row of a solver trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    /// `||theta^(k+1) - theta^(k)||_inf`
    pub step_inf: f64,
    /// `||d - E_theta^(k)[deg]||_inf` at the iterate the step started from.
    pub residual_inf: f64,
}

/// Outcome of a maximum-likelihood fit.
///
/// `converged` and `diverged` are never both set. When neither is set the
/// iteration budget ran out without a divergence signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub theta_hat: Option<Potentials>,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    /// `||d - E_theta_hat[deg]||_inf` at the returned estimate (or last iterate).
    pub residual_inf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub(crate) fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_degrees() {
        let g = WeightedGraph::from_edges(
            3,
            WeightRegime::finite(2).unwrap(),
            [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)],
        )
        .unwrap();
        assert_eq!(g.degree_sequence().as_slice(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn empty_graph_degrees() {
        let g = WeightedGraph::empty(4, WeightRegime::InfiniteDiscrete).unwrap();
        assert_eq!(degree_sequence(&g).as_slice(), &[0.0; 4]);
    }

    #[test]
    fn continuous_degrees() {
        let g = WeightedGraph::from_edges(
            3,
            WeightRegime::Continuous,
            [(0, 1, 1.5), (0, 2, 0.5), (1, 2, 0.0)],
        )
        .unwrap();
        assert_eq!(g.degree_sequence().as_slice(), &[2.0, 1.5, 0.5]);
    }

    #[test]
    fn weights_outside_the_regime_are_rejected() {
        let finite = WeightRegime::finite(3).unwrap();
        let mut g = WeightedGraph::empty(3, finite).unwrap();
        assert!(g.set(0, 1, 2.0).is_ok());
        assert!(matches!(g.set(0, 1, 3.0), Err(Error::WeightOutOfRange { .. })));
        assert!(matches!(g.set(0, 1, 0.5), Err(Error::WeightOutOfRange { .. })));
        assert!(matches!(g.set(1, 1, 1.0), Err(Error::InvalidEdge { .. })));
        assert!(matches!(g.set(0, 3, 1.0), Err(Error::InvalidEdge { .. })));

        let mut c = WeightedGraph::empty(3, WeightRegime::Continuous).unwrap();
        assert!(c.set(2, 0, 0.25).is_ok());
        assert_eq!(c.weight(0, 2), 0.25);
        assert!(c.set(0, 1, -1.0).is_err());
        assert!(c.set(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn small_graphs_rejected() {
        assert!(matches!(
            WeightedGraph::empty(2, WeightRegime::Continuous),
            Err(Error::TooFewVertices(2))
        ));
        assert!(DegreeSequence::new(vec![1.0, 1.0]).is_err());
        assert!(Potentials::new(vec![0.0]).is_err());
        assert!(WeightRegime::finite(1).is_err());
    }

    #[test]
    fn degree_sequence_rejects_bad_entries() {
        assert!(DegreeSequence::new(vec![1.0, -1.0, 1.0]).is_err());
        assert!(DegreeSequence::new(vec![1.0, f64::INFINITY, 1.0]).is_err());
        let d = DegreeSequence::new(vec![1.0, 2.5, 1.0]).unwrap();
        assert!(matches!(
            d.to_integers(),
            Err(Error::NonIntegralDegree { index: 1, .. })
        ));
    }

    #[test]
    fn potentials_membership() {
        let ok = Potentials::new(vec![-0.5, 1.0, 1.0]).unwrap();
        assert!(validate_potentials(&ok, WeightRegime::Continuous));
        let bad = Potentials::new(vec![-1.0, -1.0, 3.0]).unwrap();
        assert!(!validate_potentials(&bad, WeightRegime::Continuous));
        assert!(!validate_potentials(&bad, WeightRegime::InfiniteDiscrete));
        let neg = Potentials::constant(3, -10.0).unwrap();
        assert!(validate_potentials(&neg, WeightRegime::finite(5).unwrap()));
        let zero = Potentials::zeros(3).unwrap();
        assert!(!validate_potentials(&zero, WeightRegime::Continuous));
    }

    #[test]
    fn pair_index_is_row_major() {
        let n = 5;
        let mut expected = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_index(n, i, j), expected);
                expected += 1;
            }
        }
        assert_eq!(expected, pair_count(n));
    }

    #[test]
    fn regime_json_shape() {
        let r = WeightRegime::finite(4).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"kind":"finite","r":4}"#);
        let c: WeightRegime = serde_json::from_str(r#"{"kind":"continuous"}"#).unwrap();
        assert_eq!(c, WeightRegime::Continuous);
        assert!(serde_json::from_str::<WeightRegime>(r#"{"kind":"finite"}"#).is_err());
        assert!(serde_json::from_str::<WeightRegime>(r#"{"kind":"finite","r":1}"#).is_err());
    }
}
