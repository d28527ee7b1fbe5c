//! Log-space Gamma function.
//!
//! Every constant in the crate is a ratio of Gamma values whose individual
//! factors overflow long before the ratio does, so everything is composed
//! from [`log_gamma`] and exponentiated once at the end.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A strictly positive, finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PositiveReal<T>(T);

impl<T: Real> PositiveReal<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite() && value > T::zero() {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("expected a positive finite real, got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

const EULER_GAMMA: f64 = 0.5772156649015329;

/// zeta(k) for k = 2, 3, ..., 61.
const ZETA: [f64; 60] = [
    1.6449340668482264,
    1.2020569031595942,
    1.0823232337111381,
    1.03692775514337,
    1.0173430619844492,
    1.008349277381923,
    1.0040773561979444,
    1.0020083928260821,
    1.000994575127818,
    1.0004941886041194,
    1.000246086553308,
    1.0001227133475785,
    1.0000612481350588,
    1.000030588236307,
    1.0000152822594086,
    1.0000076371976379,
    1.000003817293265,
    1.0000019082127165,
    1.0000009539620338,
    1.0000004769329869,
    1.0000002384505027,
    1.000000119219926,
    1.000000059608189,
    1.0000000298035034,
    1.0000000149015549,
    1.0000000074507118,
    1.000000003725334,
    1.0000000018626598,
    1.0000000009313275,
    1.0000000004656628,
    1.000000000232831,
    1.0000000001164155,
    1.0000000000582077,
    1.0000000000291038,
    1.000000000014552,
    1.000000000007276,
    1.000000000003638,
    1.000000000001819,
    1.0000000000009095,
    1.0000000000004547,
    1.0000000000002274,
    1.0000000000001137,
    1.0000000000000568,
    1.0000000000000284,
    1.0000000000000142,
    1.000000000000007,
    1.0000000000000036,
    1.0000000000000018,
    1.0000000000000009,
    1.0000000000000004,
    1.0000000000000002,
    1.0000000000000002,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
];

/// Stirling series coefficients B_{2k} / (2k (2k - 1)).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// ln Γ(1 + z) for |z| <= 1/2 from the Taylor series about 1.
fn log_gamma_1p_series<T: Real>(z: T) -> T {
    // Horner from the highest order: sum_{k>=2} (-1)^k zeta(k)/k z^k.
    let mut acc = T::zero();
    for (i, &zk) in ZETA.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if (i + 2) % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + T::lit(sign * zk / k);
    }
    z * (acc * z - T::lit(EULER_GAMMA))
}

fn log_gamma_stirling<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    let inv = x.recip();
    let inv2 = inv * inv;
    let mut corr = T::zero();
    for &c in STIRLING.iter().rev() {
        corr = corr * inv2 + T::lit(c);
    }
    (x - half) * x.ln() - x + half * T::lit(2.0 * std::f64::consts::PI).ln() + corr * inv
}

fn log_gamma_unchecked<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    let one = T::one();
    if x < half {
        log_gamma_1p_series(x) - x.ln()
    } else if x < T::lit(1.5) {
        log_gamma_1p_series(x - one)
    } else if x < T::lit(2.5) {
        let z = x - T::lit(2.0);
        z.ln_1p() + log_gamma_1p_series(z)
    } else if x < T::lit(10.0) {
        let mut shifted = x;
        let mut prod = one;
        while shifted < T::lit(10.0) {
            prod = prod * shifted;
            shifted = shifted + one;
        }
        log_gamma_stirling(shifted) - prod.ln()
    } else {
        log_gamma_stirling(x)
    }
}

/// ln Γ(x) for x > 0.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    let x = PositiveReal::new(x)?;
    Ok(log_gamma_unchecked(x.get()))
}

/// ln Γ(x) for an argument already known to be positive.
#[inline]
pub fn log_gamma_pos<T: Real>(x: PositiveReal<T>) -> T {
    log_gamma_unchecked(x.get())
}

/// ln Γ(a) − ln Γ(b).
pub fn log_gamma_ratio<T: Real>(a: T, b: T) -> Result<T> {
    let a = PositiveReal::new(a)?;
    let b = PositiveReal::new(b)?;
    if a == b {
        return Ok(T::zero());
    }
    Ok(log_gamma_pos(a) - log_gamma_pos(b))
}

/// Γ(x), overflowing to infinity where the value does.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    log_gamma(x).map(T::exp)
}
