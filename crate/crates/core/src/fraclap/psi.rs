//! Cut-off powers `ψ = r^{−β} χ(r)` and integrals against `r^{γ−1}`.
//!
//! `(-Δ)^s ψ` is evaluated as the exact image of the global power `r^{−β}`
//! plus the discrete operator applied to the smooth remainder
//! `r^{−β}(χ − 1)`, which vanishes near the origin and equals `−r^{−β}`
//! outside the cutoff.

use super::grid::{RadialFunction, TailSpec};
use super::operator::OperatorMatrix;
use crate::constants::power_coefficient;
use crate::error::{Error, Result};

/// `r^{−β} χ(r)^k` with `χ = 1` on `[0, ρ₀]`, a quintic smoothstep down to
/// zero at `ρ₁ = (1 + ρ₀)/2`, and `χ = 0` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPower {
    beta: f64,
    rho0: f64,
    power: i32,
}

impl CutoffPower {
    pub fn new(beta: f64, rho0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0 < 1.0) {
            return Err(Error::Domain(format!("cutoff radius must lie in (0, 1), got {rho0}")));
        }
        if !beta.is_finite() {
            return Err(Error::Domain(format!("power must be finite, got {beta}")));
        }
        Ok(Self { beta, rho0, power: 1 })
    }

    /// `r^{−2β} χ²`.
    pub fn square(&self) -> Self {
        Self {
            beta: 2.0 * self.beta,
            rho0: self.rho0,
            power: 2 * self.power,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn rho1(&self) -> f64 {
        0.5 * (1.0 + self.rho0)
    }

    /// The cutoff factor `χ^k`.
    pub fn cutoff(&self, r: f64) -> f64 {
        let t = (r - self.rho0) / (self.rho1() - self.rho0);
        let chi = if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        };
        chi.powi(self.power)
    }

    pub fn value(&self, r: f64) -> f64 {
        r.powf(-self.beta) * self.cutoff(r)
    }

    /// `ψ` on the grid with zero exterior data; needs `β ≤ 0` so that it is bounded.
    pub fn sample(&self, op: &OperatorMatrix) -> Result<RadialFunction> {
        if self.beta > 0.0 {
            return Err(Error::Unsupported("sampling a cutoff power that is singular at the origin".into()));
        }
        RadialFunction::from_fn(op.grid().clone(), TailSpec::Zero, false, |r| self.value(r))
    }

    /// `r^{β+2s} (-Δ)^s ψ` at the collocation nodes, for `β > 0`; bounded at the origin.
    pub fn scaled_image(&self, op: &OperatorMatrix) -> Result<Vec<f64>> {
        let p = op.params();
        let s = p.s();
        let c = power_coefficient(p, self.beta)?;
        let remainder = RadialFunction::from_fn(
            op.grid().clone(),
            TailSpec::Power {
                alpha: self.beta,
                coeff: -1.0,
            },
            false,
            |r| {
                let chi = self.cutoff(r);
                if chi == 1.0 {
                    0.0
                } else {
                    r.powf(-self.beta) * (chi - 1.0)
                }
            },
        )?;
        let a = op.apply(&remainder)?;
        let nodes = op.grid().nodes();
        Ok(a.iter()
            .zip(nodes)
            .map(|(v, &r)| c + r.powf(self.beta + 2.0 * s) * v)
            .collect())
    }
}

/// `∫_0^1 f(r) r^{γ−1} dr` for `f` piecewise linear on `nodes`, with the
/// moments of `r^{γ−1}` on each panel taken exactly.
pub fn singular_weight_integral(nodes: &[f64], values: &[f64], gamma: f64) -> Result<f64> {
    if nodes.len() != values.len() || nodes.len() < 2 {
        return Err(Error::GridMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    if gamma <= 0.0 {
        return Err(Error::Domain(format!("weight exponent must be positive, got {gamma}")));
    }
    let mut acc = 0.0;
    for (x, f) in nodes.windows(2).zip(values.windows(2)) {
        let (a, b) = (x[0], x[1]);
        let h = b - a;
        // ∫ r^{γ−1} and ∫ r^γ over [a, b]
        let m0 = (b.powf(gamma) - a.powf(gamma)) / gamma;
        let m1 = (b.powf(gamma + 1.0) - a.powf(gamma + 1.0)) / (gamma + 1.0);
        let slope = (f[1] - f[0]) / h;
        acc += (f[0] - slope * a) * m0 + slope * m1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        let c = CutoffPower::new(1.0, 0.5).unwrap();
        assert_eq!(c.cutoff(0.3), 1.0);
        assert_eq!(c.cutoff(0.75), 0.0);
        assert!((c.cutoff(0.625) - 0.5).abs() < 1e-15);
        let sq = c.square();
        assert_eq!(sq.beta(), 2.0);
        assert!((sq.value(0.6) - c.value(0.6).powi(2)).abs() < 1e-14);
        assert!(CutoffPower::new(1.0, 1.0).is_err());
    }

    #[test]
    fn weight_integral_exact_for_linear_data() {
        let nodes: Vec<f64> = (0..=40).map(|j| (j as f64 / 40.0).powi(2)).collect();
        let vals: Vec<f64> = nodes.iter().map(|r| 2.0 - 3.0 * r).collect();
        let g = 0.1;
        let exact = 2.0 / g - 3.0 / (g + 1.0);
        let got = singular_weight_integral(&nodes, &vals, g).unwrap();
        assert!((got - exact).abs() < 1e-12 * exact);
    }
}
