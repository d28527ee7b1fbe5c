//! Boundedness analysis of the extremal solution in terms of (n, s).
//!
//! The extremal solution is bounded when `n <= 2s`, or when `n > 2s` and
//! `Γ(n/2)Γ(1+s)/Γ((n−2s)/2) > Γ²((n+2s)/4)/Γ²((n−2s)/4)`, which is the same
//! as `λ₀ > H_{n,s}`. The inequality is tracked through its log-margin.

use serde::{Deserialize, Serialize};

use crate::constants::{log_hardy_constant, log_lambda0, ProblemParams};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Samples used to bracket sign changes of the margin in `s`.
pub const SCAN_SAMPLES: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-8;

const S_LOWER: f64 = 1e-6;
const S_UPPER_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `n <= 2s`.
    BoundedSubcritical,
    /// `n > 2s` and `λ₀ > H_{n,s}`.
    BoundedByInequality,
    /// `n > 2s` and `λ₀ <= H_{n,s}`: the sufficient condition fails.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityVerdict<T> {
    pub regime: Regime,
    /// `ln λ₀ − ln H_{n,s}`; absent when `n <= 2s`.
    pub margin: Option<T>,
}

/// `ln λ₀(n,s) − ln H_{n,s}`.
pub fn margin<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    Ok(log_lambda0(p)? - log_hardy_constant(p)?)
}

pub fn classify<T: Real>(p: &ProblemParams<T>) -> RegularityVerdict<T> {
    if !p.is_supercritical() {
        return RegularityVerdict {
            regime: Regime::BoundedSubcritical,
            margin: None,
        };
    }
    let m = margin(p).expect("supercritical parameters");
    let regime = if m > T::zero() {
        Regime::BoundedByInequality
    } else {
        Regime::Inconclusive
    };
    RegularityVerdict {
        regime,
        margin: Some(m),
    }
}

/// Open interval of fractional orders in (0, 1) with `n > 2s`, trimmed away
/// from the endpoints where the margin is singular or trivially zero.
fn admissible_interval<T: Real>(n: u32) -> (T, T) {
    let half_n = T::from_u32(n).unwrap() * T::lit(0.5);
    let hi = half_n.min(T::one()) - T::lit(S_UPPER_GAP);
    (T::lit(S_LOWER), hi)
}

fn margin_at<T: Real>(n: u32, s: T) -> T {
    margin(&ProblemParams::new(n, s).expect("admissible s")).expect("admissible s")
}

/// Margin sampled on the bracketing grid over the admissible interval.
pub fn margin_samples<T: Real>(n: u32) -> Result<Vec<(T, T)>> {
    if n == 0 {
        return Err(Error::Domain("dimension n must be at least 1".into()));
    }
    let (lo, hi) = admissible_interval::<T>(n);
    let last = T::from_usize(SCAN_SAMPLES - 1).unwrap();
    Ok((0..SCAN_SAMPLES)
        .map(|k| {
            let s = lo + (hi - lo) * T::from_usize(k).unwrap() / last;
            (s, margin_at(n, s))
        })
        .collect())
}

/// The fractional order at which the margin changes sign for dimension `n`,
/// or `None` when it keeps one sign over the admissible interval.
pub fn critical_s<T: Real>(n: u32, tol: T) -> Result<Option<T>> {
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let samples = margin_samples::<T>(n)?;
    let bracket = samples
        .windows(2)
        .find(|w| (w[0].1 > T::zero()) != (w[1].1 > T::zero()));
    let Some(w) = bracket else {
        return Ok(None);
    };
    let (mut a, mut fa) = w[0];
    let mut b = w[1].0;
    let half = T::lit(0.5);
    while b - a > tol {
        let mid = half * (a + b);
        let fm = margin_at(n, mid);
        if fm == T::zero() {
            return Ok(Some(mid));
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(Some(half * (a + b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow<T> {
    pub n: u32,
    pub critical_s: Option<T>,
    /// The extremal solution is bounded for every s in (0, 1).
    pub all_s_bounded: bool,
    /// Margin at s = 0.25, 0.5, 0.75 where admissible.
    pub margin_samples: Vec<(T, T)>,
}

pub fn threshold_row<T: Real>(n: u32, tol: T) -> Result<ThresholdRow<T>> {
    let root = critical_s(n, tol)?;
    let samples = margin_samples::<T>(n)?;
    let all_positive = samples.iter().all(|&(_, m)| m > T::zero());
    let probes = [0.25, 0.5, 0.75]
        .into_iter()
        .map(T::lit)
        .filter(|&s| T::from_u32(n).unwrap() > T::lit(2.0) * s)
        .map(|s| (s, margin_at(n, s)))
        .collect();
    Ok(ThresholdRow {
        n,
        critical_s: root,
        all_s_bounded: root.is_none() && all_positive,
        margin_samples: probes,
    })
}

/// One row per dimension `1..=n_max`.
pub fn threshold_table<T: Real>(n_max: u32, tol: T) -> Result<Vec<ThresholdRow<T>>> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    (1..=n_max).map(|n| threshold_row(n, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(n: u32, s: f64) -> ProblemParams<f64> {
        ProblemParams::new(n, s).unwrap()
    }

    #[test]
    fn margin_signs() {
        assert!(margin(&pp(7, 0.5)).unwrap() > 0.0);
        assert!(margin(&pp(9, 0.5)).unwrap() < 0.0);
        assert!(margin(&pp(10, 1.0)).unwrap().abs() < 1e-12);
        assert!(margin(&pp(1, 0.5)).is_err());
    }

    #[test]
    fn critical_orders() {
        let s8 = critical_s(8, DEFAULT_TOL).unwrap().unwrap();
        let s9 = critical_s(9, DEFAULT_TOL).unwrap().unwrap();
        assert!((s8 - 0.28206).abs() < 1e-4, "{s8}");
        assert!((s9 - 0.63237).abs() < 1e-4, "{s9}");
        // Reference roots from 30-digit evaluation.
        assert!((s8 - 0.2820667181547677).abs() < 1e-7);
        assert!((s9 - 0.6323761060830331).abs() < 1e-7);
        assert_eq!(critical_s(7, DEFAULT_TOL).unwrap(), None);
        assert_eq!(critical_s(10, DEFAULT_TOL).unwrap(), None);
        assert!(critical_s(8, 0.0).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&pp(1, 0.6)).regime, Regime::BoundedSubcritical);
        assert_eq!(classify(&pp(1, 0.6)).margin, None);
        assert_eq!(classify(&pp(5, 0.1)).regime, Regime::BoundedByInequality);
        assert_eq!(classify(&pp(10, 0.99)).regime, Regime::Inconclusive);
        assert_eq!(classify(&pp(12, 0.5)).regime, Regime::Inconclusive);
        assert_eq!(classify(&pp(3, 0.5)).regime, Regime::BoundedByInequality);
    }

    #[test]
    fn table_rows() {
        let rows = threshold_table(10, DEFAULT_TOL).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows[..7] {
            assert!(r.all_s_bounded, "n = {}", r.n);
        }
        assert!(!rows[7].all_s_bounded && !rows[8].all_s_bounded && !rows[9].all_s_bounded);
        assert!(rows[9].critical_s.is_none());
        let single = threshold_table::<f64>(1, DEFAULT_TOL).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].all_s_bounded);
        assert!(threshold_table::<f64>(0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn margin_decreases_with_dimension() {
        for &s in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let mut prev = f64::INFINITY;
            for n in 2..40u32 {
                let m = margin(&pp(n, s)).unwrap();
                assert!(m < prev, "n = {n}, s = {s}");
                prev = m;
            }
        }
    }

    #[test]
    fn log_margin_agrees_with_direct_inequality() {
        use crate::specfun::gamma;
        for n in 1..=30u32 {
            for k in 1..100 {
                let s = k as f64 / 100.0;
                let p = pp(n, s);
                if !p.is_supercritical() {
                    continue;
                }
                let nf = f64::from(n);
                let left = gamma(nf / 2.0).unwrap() * gamma(1.0 + s).unwrap()
                    / gamma((nf - 2.0 * s) / 2.0).unwrap();
                let right = (gamma((nf + 2.0 * s) / 4.0).unwrap()
                    / gamma((nf - 2.0 * s) / 4.0).unwrap())
                .powi(2);
                let m = margin(&p).unwrap();
                if m.abs() > 1e-10 {
                    assert_eq!(classify(&p).regime == Regime::BoundedByInequality, left > right);
                }
            }
        }
    }
}
