//! Marginal log-partition function `Z1`, mean function `mu = -Z1'` and its
//! derivative for each weight regime.
//!
//! For the finite discrete regime the quantities are evaluated as ratios of
//! positive sums over the `r` atoms, using the reflected weights `e^{a t}` when
//! `t < 0` so that no term exceeds one. Very large `r` away from `t = 0` falls
//! back to the `expm1` closed forms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WeightRegime;

/// Above this many atoms the closed forms are used when `|t|` is not small.
const DIRECT_SUM_MAX_LEVELS: u32 = 1024;

/// Below this `|t|` the finite discrete mean is always evaluated as a direct ratio.
const SMALL_T: f64 = 1e-4;

/// `Z1`, `mu` and `mu'` at one pairwise potential sum `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalEval {
    pub t: f64,
    pub z1: f64,
    pub mu: f64,
    pub mu_prime: f64,
}

pub fn marginal(regime: WeightRegime, t: f64) -> Result<MarginalEval> {
    Ok(MarginalEval {
        t,
        z1: z1(regime, t),
        mu: mean(regime, t)?,
        mu_prime: mean_deriv(regime, t)?,
    })
}

/// Marginal log-partition function. Returns `+inf` outside `Dom(Z1)`.
pub fn z1(regime: WeightRegime, t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    match regime {
        WeightRegime::FiniteDiscrete { r } => {
            if t == 0.0 {
                return f64::from(r).ln();
            }
            let s = t.abs();
            // log sum_{a<r} e^{-a s} = log(1 - e^{-r s}) - log(1 - e^{-s})
            let base = (-(-f64::from(r) * s).exp_m1()).ln() - (-(-s).exp_m1()).ln();
            if t > 0.0 {
                base
            } else {
                f64::from(r - 1) * s + base
            }
        }
        WeightRegime::Continuous => {
            if t > 0.0 {
                -t.ln()
            } else {
                f64::INFINITY
            }
        }
        WeightRegime::InfiniteDiscrete => {
            if t > 0.0 {
                -(-(-t).exp_m1()).ln()
            } else {
                f64::INFINITY
            }
        }
    }
}

fn check_domain(regime: WeightRegime, t: f64) -> Result<()> {
    let ok = match regime {
        WeightRegime::FiniteDiscrete { .. } => t.is_finite(),
        _ => t.is_finite() && t > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            t,
            regime: regime.to_string(),
        })
    }
}

/// Expected edge weight at pairwise potential `t`. Strictly decreasing.
pub fn mean(regime: WeightRegime, t: f64) -> Result<f64> {
    check_domain(regime, t)?;
    Ok(mean_unchecked(regime, t))
}

/// Derivative of [`mean`]. Strictly negative.
pub fn mean_deriv(regime: WeightRegime, t: f64) -> Result<f64> {
    check_domain(regime, t)?;
    Ok(mean_deriv_unchecked(regime, t))
}

/// [`mean`] without the domain check; callers guarantee `t` is in the domain.
#[inline]
pub(crate) fn mean_unchecked(regime: WeightRegime, t: f64) -> f64 {
    match regime {
        WeightRegime::FiniteDiscrete { r } => finite_mean(r, t),
        WeightRegime::Continuous => 1.0 / t,
        WeightRegime::InfiniteDiscrete => 1.0 / t.exp_m1(),
    }
}

#[inline]
pub(crate) fn mean_deriv_unchecked(regime: WeightRegime, t: f64) -> f64 {
    match regime {
        WeightRegime::FiniteDiscrete { r } => finite_mean_deriv(r, t),
        WeightRegime::Continuous => -1.0 / (t * t),
        // -e^t/(e^t-1)^2 = -1/((e^t-1)(1-e^{-t}))
        WeightRegime::InfiniteDiscrete => -1.0 / (t.exp_m1() * -(-t).exp_m1()),
    }
}

/// Mean and variance of the atom index under weights `w_a = e^{-a s}`, `s >= 0`.
fn atom_moments(r: u32, s: f64) -> (f64, f64) {
    let q = (-s).exp();
    let mut w = 1.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut count = 0u32;
    for a in 0..r {
        if w == 0.0 {
            break;
        }
        s0 += w;
        s1 += f64::from(a) * w;
        w *= q;
        count = a + 1;
    }
    let m = s1 / s0;
    let mut w = 1.0;
    let mut var = 0.0;
    for a in 0..count {
        let dev = f64::from(a) - m;
        var += dev * dev * w;
        w *= q;
    }
    (m, var / s0)
}

fn use_closed_form(r: u32, t: f64) -> bool {
    r > DIRECT_SUM_MAX_LEVELS && t.abs() >= SMALL_T
}

fn finite_mean(r: u32, t: f64) -> f64 {
    let s = t.abs();
    let rf = f64::from(r);
    let at_abs = if use_closed_form(r, t) {
        1.0 / s.exp_m1() - rf / (rf * s).exp_m1()
    } else {
        atom_moments(r, s).0
    };
    if t >= 0.0 {
        at_abs
    } else if use_closed_form(r, t) {
        (rf - 1.0) - at_abs
    } else {
        // Reflected weights e^{a t}: mu(t) = sum (r-1-a) w_a / sum w_a.
        reflected_mean(r, s)
    }
}

fn reflected_mean(r: u32, s: f64) -> f64 {
    let q = (-s).exp();
    let top = f64::from(r - 1);
    let mut w = 1.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for a in 0..r {
        if w == 0.0 {
            break;
        }
        s0 += w;
        s1 += (top - f64::from(a)) * w;
        w *= q;
    }
    s1 / s0
}

fn finite_mean_deriv(r: u32, t: f64) -> f64 {
    // mu'(t) = -Var(A) under p(a) ∝ e^{-a t}; the variance is even in t.
    let s = t.abs();
    if use_closed_form(r, t) {
        let rf = f64::from(r);
        let g = |x: f64| 1.0 / (x.exp_m1() * -(-x).exp_m1());
        -g(s) + rf * rf * g(rf * s)
    } else {
        -atom_moments(r, s).1
    }
}

/// Inverse of the mean function: the `t` with `mean(regime, t) = m`.
///
/// Closed forms for the continuous (`1/m`) and infinite discrete
/// (`log(1 + 1/m)`) regimes; the finite discrete regime uses a bracketed
/// Newton iteration.
pub fn mean_inverse(regime: WeightRegime, m: f64) -> Result<f64> {
    let out_of_range = || Error::MeanOutOfRange {
        m,
        regime: regime.to_string(),
    };
    match regime {
        WeightRegime::Continuous => {
            if m.is_finite() && m > 0.0 {
                Ok(1.0 / m)
            } else {
                Err(out_of_range())
            }
        }
        WeightRegime::InfiniteDiscrete => {
            if m.is_finite() && m > 0.0 {
                Ok((1.0 / m).ln_1p())
            } else {
                Err(out_of_range())
            }
        }
        WeightRegime::FiniteDiscrete { r } => {
            let top = f64::from(r - 1);
            if !(m > 0.0 && m < top) {
                return Err(out_of_range());
            }
            finite_mean_inverse(r, m).ok_or_else(out_of_range)
        }
    }
}

fn finite_mean_inverse(r: u32, m: f64) -> Option<f64> {
    let f = |t: f64| finite_mean(r, t) - m;
    // mean is decreasing: f(lo) > 0 > f(hi).
    let mut hi = 1.0f64;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut lo = -1.0f64;
    while f(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e6 {
            return None;
        }
    }
    let tol = 1e-12 * m.max(1.0);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..400 {
        let ft = f(t);
        if ft == 0.0 {
            return Some(t);
        }
        if ft > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = finite_mean_deriv(r, t);
        let newton = t - ft / slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step <= 4.0 * f64::EPSILON * t.abs().max(1.0) || hi - lo <= f64::EPSILON * t.abs() {
            break;
        }
    }
    (f(t).abs() <= tol).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FINITE5: WeightRegime = WeightRegime::FiniteDiscrete { r: 5 };
    const LN2: f64 = std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn z1_examples() {
        for r in 2..=10u32 {
            let reg = WeightRegime::FiniteDiscrete { r };
            assert!(close(z1(reg, 0.0), f64::from(r).ln(), 1e-15));
        }
        assert_eq!(z1(WeightRegime::Continuous, 1.0), 0.0);
        assert!(close(z1(WeightRegime::InfiniteDiscrete, LN2), LN2, 1e-15));
        assert_eq!(z1(WeightRegime::Continuous, 0.0), f64::INFINITY);
        assert_eq!(z1(WeightRegime::InfiniteDiscrete, -1.0), f64::INFINITY);
    }

    #[test]
    fn z1_matches_direct_sum() {
        for r in [2u32, 3, 7] {
            let reg = WeightRegime::FiniteDiscrete { r };
            for &t in &[-3.0, -0.2, 1e-7, 0.4, 5.0] {
                let direct: f64 = (0..r).map(|a| (-(f64::from(a)) * t).exp()).sum::<f64>().ln();
                assert!(close(z1(reg, t), direct, 1e-12), "r={r} t={t}");
            }
        }
    }

    #[test]
    fn mean_examples() {
        for r in 2..=10u32 {
            let reg = WeightRegime::FiniteDiscrete { r };
            assert!(close(mean(reg, 0.0).unwrap(), f64::from(r - 1) / 2.0, 1e-15));
        }
        assert_eq!(mean(WeightRegime::Continuous, 2.0).unwrap(), 0.5);
        assert!(close(mean(WeightRegime::InfiniteDiscrete, LN2).unwrap(), 1.0, 1e-15));
        let r2 = WeightRegime::FiniteDiscrete { r: 2 };
        assert_eq!(mean(r2, 0.0).unwrap(), 0.5);
        // Bernoulli: p = 1 / (1 + e^t)
        for &t in &[-4.0, -0.3, 0.7, 6.0] {
            assert!(close(mean(r2, t).unwrap(), 1.0 / (1.0 + t.exp()), 1e-15));
        }
    }

    #[test]
    fn mean_deriv_examples() {
        assert!(close(mean_deriv(FINITE5, 0.0).unwrap(), -2.0, 1e-14));
        assert_eq!(mean_deriv(WeightRegime::Continuous, 2.0).unwrap(), -0.25);
        assert!(close(mean_deriv(WeightRegime::InfiniteDiscrete, LN2).unwrap(), -2.0, 1e-14));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            mean(WeightRegime::Continuous, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(mean(WeightRegime::InfiniteDiscrete, -1.0).is_err());
        assert!(mean_deriv(WeightRegime::Continuous, -0.1).is_err());
        assert!(mean(FINITE5, f64::NAN).is_err());
        assert!(mean(FINITE5, -1e3).is_ok());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mean_inverse(WeightRegime::Continuous, 0.5).unwrap(), 2.0);
        assert!(close(mean_inverse(WeightRegime::InfiniteDiscrete, 1.0).unwrap(), LN2, 1e-15));
        let r3 = WeightRegime::FiniteDiscrete { r: 3 };
        assert!(close(mean_inverse(r3, 1.0).unwrap(), 0.0, 1e-12));
        assert!(mean_inverse(r3, 0.0).is_err());
        assert!(mean_inverse(r3, 2.0).is_err());
        assert!(mean_inverse(WeightRegime::Continuous, -1.0).is_err());
    }

    #[test]
    fn closed_form_branch_agrees_with_direct_sums() {
        let r = 2000u32;
        let big = WeightRegime::FiniteDiscrete { r };
        for &t in &[-0.5f64, -0.01, 0.001, 0.02, 1.0, 8.0] {
            let (m, v) = atom_moments(r, t.abs());
            let direct_mean = if t >= 0.0 { m } else { reflected_mean(r, t.abs()) };
            let closed = mean(big, t).unwrap();
            assert!((closed - direct_mean).abs() <= 1e-9 * direct_mean.max(1.0), "t={t}");
            let closed_d = mean_deriv(big, t).unwrap();
            assert!((closed_d + v).abs() <= 1e-8 * v.max(1.0), "t={t}");
        }
    }

    #[test]
    fn second_derivative_nonnegative_for_positive_t() {
        // mu'' >= 0 on t >= 0, checked by differences of mu'.
        for r in 2..=10u32 {
            let reg = WeightRegime::FiniteDiscrete { r };
            let mut prev = mean_deriv(reg, 0.0).unwrap();
            for k in 1..=400 {
                let t = f64::from(k) * 0.025;
                let cur = mean_deriv(reg, t).unwrap();
                assert!(cur >= prev - 1e-13, "r={r} t={t}");
                prev = cur;
            }
        }
    }

    #[test]
    fn marginal_bundle() {
        let e = marginal(FINITE5, 0.0).unwrap();
        assert!(close(e.mu, 2.0, 1e-15));
        assert!(close(e.mu_prime, -2.0, 1e-14));
        assert!(close(e.z1, 5f64.ln(), 1e-15));
    }
}
