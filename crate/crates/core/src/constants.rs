//! Closed-form constants of the fractional Gelfand problem.
//!
//! All values are assembled as sums of [`log_gamma`] terms and exponentiated
//! once, so dimensions in the hundreds stay finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::log_gamma;

/// Dimension `n` and fractional order `s` of `(-Δ)^s u = λ e^u` in `B_1 ⊂ R^n`.
///
/// `s = 1` is admitted only so the closed forms can be checked against the
/// classical Gelfand problem; the discretized operator rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams<T> {
    n: u32,
    s: T,
}

impl<T: Real> ProblemParams<T> {
    pub fn new(n: u32, s: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be at least 1".into()));
        }
        if !(s.is_finite() && s > T::zero() && s <= T::one()) {
            return Err(Error::Domain(format!("fractional order s must lie in (0, 1], got {s}")));
        }
        Ok(Self { n, s })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn s(&self) -> T {
        self.s
    }

    #[inline]
    pub fn dim(&self) -> T {
        T::from_u32(self.n).expect("dimension fits the scalar type")
    }

    /// `n > 2s`: the regime where λ₀ and H_{n,s} exist.
    #[inline]
    pub fn is_supercritical(&self) -> bool {
        self.dim() > T::lit(2.0) * self.s
    }

    pub(crate) fn require_supercritical(&self) -> Result<()> {
        if self.is_supercritical() {
            Ok(())
        } else {
            Err(Error::Regime {
                n: self.n,
                s: self.s.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    pub fn to_f64(&self) -> ProblemParams<f64> {
        ProblemParams {
            n: self.n,
            s: self.s.to_f64().expect("finite s"),
        }
    }
}

/// Surface measure |S^{n-1}| = 2 π^{n/2} / Γ(n/2); equals 2 for n = 1.
pub fn sphere_area<T: Real>(n: u32) -> T {
    let half_n = T::from_u32(n).unwrap() * T::lit(0.5);
    let lg = log_gamma(half_n).expect("n >= 1");
    (T::LN_2() + half_n * T::PI().ln() - lg).exp()
}

/// ln λ₀ = 2s ln 2 + ln Γ(n/2) + ln Γ(1+s) − ln Γ((n−2s)/2).
pub fn log_lambda0<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    p.require_supercritical()?;
    let (n, s) = (p.dim(), p.s());
    let two = T::lit(2.0);
    Ok(two * s * T::LN_2() + log_gamma(n / two)? + log_gamma(T::one() + s)?
        - log_gamma((n - two * s) / two)?)
}

/// λ₀ = 2^{2s} Γ(n/2) Γ(1+s) / Γ((n−2s)/2), the constant for which
/// `log(1/|x|^{2s})` solves the equation in all of R^n.
pub fn lambda0<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    log_lambda0(p).map(T::exp)
}

/// ln H_{n,s} = 2s ln 2 + 2 ln Γ((n+2s)/4) − 2 ln Γ((n−2s)/4).
pub fn log_hardy_constant<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    p.require_supercritical()?;
    let (n, s) = (p.dim(), p.s());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    Ok(two * s * T::LN_2() + two * log_gamma((n + two * s) / four)?
        - two * log_gamma((n - two * s) / four)?)
}

/// H_{n,s} = 2^{2s} Γ²((n+2s)/4) / Γ²((n−2s)/4), the fractional Hardy constant.
pub fn hardy_constant<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    log_hardy_constant(p).map(T::exp)
}

/// Coefficient `C` in `(-Δ)^s |x|^{-α} = C |x|^{-α-2s}`, for `0 < α < n − 2s`.
pub fn power_coefficient<T: Real>(p: &ProblemParams<T>, alpha: T) -> Result<T> {
    let (n, s) = (p.dim(), p.s());
    let two = T::lit(2.0);
    let upper = n - two * s;
    if !(alpha.is_finite() && alpha > T::zero() && alpha < upper) {
        return Err(Error::Domain(format!(
            "power exponent alpha = {alpha} must lie in (0, n - 2s) = (0, {upper})"
        )));
    }
    let log_c = two * s * T::LN_2() + log_gamma((alpha + two * s) / two)? + log_gamma((n - alpha) / two)?
        - log_gamma((n - alpha - two * s) / two)?
        - log_gamma(alpha / two)?;
    Ok(log_c.exp())
}

/// c_{n,s} = 4^s s Γ(n/2 + s) / (π^{n/2} Γ(1 − s)), the normalization giving
/// the singular integral the Fourier symbol |ξ|^{2s}.
pub fn operator_normalization<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    let (n, s) = (p.dim(), p.s());
    if s >= T::one() {
        return Err(Error::Domain(format!(
            "operator normalization needs s in (0, 1), got {s}"
        )));
    }
    let two = T::lit(2.0);
    let log_c = two * s * T::LN_2() + s.ln() + log_gamma(n / two + s)?
        - n / two * T::PI().ln()
        - log_gamma(T::one() - s)?;
    Ok(log_c.exp())
}

/// The pair `(A(ε), B(ε))` with `A(ε) = C(n,s,(n−2s−ε)/2)` and
/// `B(ε) = (2s/ε) C(n,s,n−2s−ε)`; they tend to H_{n,s} and λ₀ as ε → 0.
pub fn epsilon_expansion<T: Real>(p: &ProblemParams<T>, eps: T) -> Result<(T, T)> {
    p.require_supercritical()?;
    let two = T::lit(2.0);
    let gap = p.dim() - two * p.s();
    if !(eps.is_finite() && eps > T::zero() && eps < gap) {
        return Err(Error::Domain(format!(
            "epsilon = {eps} must lie in (0, n - 2s) = (0, {gap})"
        )));
    }
    let a = power_coefficient(p, (gap - eps) / two)?;
    let b = two * p.s() / eps * power_coefficient(p, gap - eps)?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(n: u32, s: f64) -> ProblemParams<f64> {
        ProblemParams::new(n, s).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ProblemParams::new(0, 0.5).is_err());
        assert!(ProblemParams::new(3, 0.0).is_err());
        assert!(ProblemParams::new(3, 1.2).is_err());
        assert!(ProblemParams::new(3, f64::NAN).is_err());
        assert!(!pp(1, 0.5).is_supercritical());
        assert!(pp(1, 0.4).is_supercritical());
    }

    #[test]
    fn classical_limit_values() {
        assert!((lambda0(&pp(10, 1.0)).unwrap() - 16.0).abs() < 1e-12);
        assert!((lambda0(&pp(4, 1.0)).unwrap() - 4.0).abs() < 1e-12);
        assert!((hardy_constant(&pp(10, 1.0)).unwrap() - 16.0).abs() < 1e-12);
        assert!((hardy_constant(&pp(4, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        for n in 3..30u32 {
            let l = lambda0(&pp(n, 1.0)).unwrap();
            let h = hardy_constant(&pp(n, 1.0)).unwrap();
            let m = f64::from(n) - 2.0;
            assert!((l - 2.0 * m).abs() < 1e-10 * l);
            assert!((h - m * m / 4.0).abs() < 1e-10 * h);
        }
    }

    #[test]
    fn lambda0_vanishes_at_the_regime_boundary() {
        let l = lambda0(&pp(2, 1.0 - 1e-9)).unwrap();
        assert!(l > 0.0 && l < 1e-7);
        assert!(lambda0(&pp(2, 1.0)).is_err());
    }

    #[test]
    fn hardy_tends_to_one_as_s_vanishes() {
        let h = hardy_constant(&pp(4, 1e-9)).unwrap();
        assert!((h - 1.0).abs() < 1e-7);
    }

    #[test]
    fn power_coefficient_examples() {
        let p = pp(3, 0.5);
        let c = power_coefficient(&p, 1.0).unwrap();
        assert!((c - 2.0 / std::f64::consts::PI).abs() < 1e-13);
        let small = power_coefficient(&p, 1e-9).unwrap();
        assert!(small > 0.0 && small < 1e-8);
        assert!(power_coefficient(&p, 2.0).is_err());
        assert!(power_coefficient(&p, 0.0).is_err());
        assert!(power_coefficient(&p, 2.5).is_err());
    }

    #[test]
    fn normalization_examples() {
        let c = operator_normalization(&pp(1, 0.5)).unwrap();
        assert!((c - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        let near_one = operator_normalization(&pp(1, 0.99)).unwrap();
        assert!(near_one.is_finite() && near_one > 0.0);
        assert!(operator_normalization(&pp(3, 1.0)).is_err());
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area::<f64>(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area::<f64>(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area::<f64>(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area::<f64>(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn large_dimensions_do_not_overflow() {
        let p = pp(200, 0.7);
        let l = lambda0(&p).unwrap();
        let h = hardy_constant(&p).unwrap();
        assert!(l.is_finite() && h.is_finite() && l > 0.0 && h > 0.0);
    }

    #[test]
    fn epsilon_expansion_limits() {
        let p = pp(3, 0.5);
        let (a, b) = epsilon_expansion(&p, 1e-6).unwrap();
        assert!((a - hardy_constant(&p).unwrap()).abs() < 1e-4);
        assert!((b - lambda0(&p).unwrap()).abs() < 1e-4);
        let (_, b_edge) = epsilon_expansion(&p, 2.0 - 1e-6).unwrap();
        assert!(b_edge.is_finite() && b_edge > 0.0);
        assert!(epsilon_expansion(&p, 0.0).is_err());
        assert!(epsilon_expansion(&p, 2.0).is_err());
    }
}
