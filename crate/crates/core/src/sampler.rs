//! Sampling graphs with independent exponential-family edge weights, and the
//! exact expected degree sequence.
//!
//! # Random streams
//!
//! [`SeededRng`] is a `(seed, stream)` pair. It is expanded into a 256-bit
//! ChaCha8 key with SplitMix64, and every consumer draws from a ChaCha
//! substream selected by an index; graph sampling uses the packed edge index
//! as the substream, so results do not depend on how edges are scheduled
//! across threads.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::meanfn::mean_unchecked;
use crate::model::{pair_count, DegreeSequence, Potentials, WeightRegime, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRng {
    pub seed: u64,
    pub stream: u64,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-dependent hash of a list of words, used to derive stream ids.
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243f_6a88_85a3_08d3u64, |h, &w| splitmix64(h ^ splitmix64(w)))
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        SeededRng { seed, stream }
    }

    /// A child stream; distinct `sub` values give unrelated keys.
    pub fn derive(&self, sub: u64) -> SeededRng {
        SeededRng {
            seed: self.seed,
            stream: hash_words(&[self.stream, sub]),
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut state = splitmix64(self.seed) ^ self.stream.rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state ^ self.stream);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }

    /// Generator for substream `index`.
    pub fn substream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(index);
        rng
    }
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Open01)
}

/// One edge weight at pairwise potential sum `t` from a uniform `u` in (0, 1).
fn draw_weight(regime: WeightRegime, t: f64, u: f64) -> f64 {
    match regime {
        WeightRegime::FiniteDiscrete { r } => {
            // Weights proportional to e^{-a t}, shifted so the largest is 1.
            let shift = if t < 0.0 { f64::from(r - 1) * t } else { 0.0 };
            let total: f64 = (0..r).map(|a| (-(f64::from(a)) * t + shift).exp()).sum();
            let target = u * total;
            let mut acc = 0.0;
            for a in 0..r {
                acc += (-(f64::from(a)) * t + shift).exp();
                if target < acc {
                    return f64::from(a);
                }
            }
            f64::from(r - 1)
        }
        WeightRegime::Continuous => -u.ln() / t,
        // Geometric on {0, 1, ...} with P(A >= a) = e^{-a t}.
        WeightRegime::InfiniteDiscrete => (-u.ln() / t).floor().min(crate::model::MAX_EXACT_INT),
    }
}

/// Draws `G ~ P*_theta`: every pair gets an independent weight with density
/// proportional to `exp(-(theta_i + theta_j) a)` against the regime's base measure.
pub fn sample_graph(
    regime: WeightRegime,
    theta: &Potentials,
    rng: &SeededRng,
) -> Result<WeightedGraph> {
    theta.ensure_valid(regime)?;
    let th = theta.as_slice();
    let n = th.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    debug_assert_eq!(pairs.len(), pair_count(n));
    let upper: Vec<f64> = pairs
        .par_iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let mut g = rng.substream(e as u64);
            draw_weight(regime, th[i] + th[j], uniform_open(&mut g))
        })
        .collect();
    WeightedGraph::from_upper(n, regime, upper)
}

/// `d*_i = sum_{j != i} mu(theta_i + theta_j)`.
pub fn expected_degrees(regime: WeightRegime, theta: &Potentials) -> Result<DegreeSequence> {
    theta.ensure_valid(regime)?;
    DegreeSequence::new(expected_degree_sums(regime, theta.as_slice()))
}

/// Row sums of `mu(theta_i + theta_j)` with compensated summation. No validity check.
pub(crate) fn expected_degree_sums(regime: WeightRegime, th: &[f64]) -> Vec<f64> {
    let n = th.len();
    let mut sums = vec![KahanSum::default(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let m = mean_unchecked(regime, th[i] + th[j]);
            sums[i].add(m);
            sums[j].add(m);
        }
    }
    sums.into_iter().map(|s| s.value()).collect()
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Draws a uniform vector in `[lo, hi)^n` from substream 0 of `rng`.
pub fn uniform_vector(rng: &SeededRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut g = rng.substream(0);
    (0..n).map(|_| lo + (hi - lo) * g.random::<f64>()).collect()
}
