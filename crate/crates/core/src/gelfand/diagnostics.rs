use std::sync::Arc;

use serde::Serialize;

use super::branch::Branch;
use crate::constants::{lambda0, ProblemParams};
use crate::error::{Error, Result};
use crate::fraclap::{assemble, OperatorMatrix, RadialFunction, RadialGrid, TailSpec};
use crate::scalar::Real;
use crate::specfun::log_gamma;

/// Radius at which the log-ratio trend is compared across branch points.
pub const DIAGNOSTIC_PROBE_RADIUS: f64 = 0.01;
const DIAGNOSTIC_WINDOW: f64 = 0.1;
const RESOLUTION_RADIUS: f64 = 1e-3;

/// `ζ(0)` for the solution of `(-Δ)^s ζ = 1` in `B_1`, `ζ = 0` outside:
/// `Γ(n/2) / (4^s Γ(1+s) Γ((n+2s)/2))`.
pub fn torsion_center<T: Real>(p: &ProblemParams<T>) -> Result<T> {
    let s = p.s();
    let half_n = p.dim() * T::lit(0.5);
    let ln = log_gamma(half_n)?
        - T::lit(2.0) * s * T::LN_2()
        - log_gamma(T::one() + s)?
        - log_gamma(half_n + s)?;
    Ok(ln.exp())
}

/// How close the profile at the top of a branch is to `log r^{−2s}`.
#[derive(Debug, Clone, Serialize)]
pub struct SingularProfileReport {
    pub sigma: f64,
    pub peak: f64,
    pub lambda: f64,
    /// `(r, u(r) / (2s log(1/r)))` at the nodes in `(0, 0.1]`.
    pub ratios: Vec<(f64, f64)>,
    /// Largest node radius up to which the ratio stays above `1 − σ`.
    pub threshold_radius: Option<f64>,
    /// `(peak, ratio at DIAGNOSTIC_PROBE_RADIUS)` for the highest-peak points,
    /// by increasing peak.
    pub probe_ratios: Vec<(f64, f64)>,
    /// The probe ratio increases strictly across those points.
    pub ratio_increasing: bool,
    pub warning: Option<String>,
}

/// Ratio `u(r) / (2s log(1/r))` at `r`, interpolating `u` linearly in `log r`.
fn log_ratio_at(u: &RadialFunction, s: f64, r: f64) -> f64 {
    let nodes = u.grid().nodes();
    let v = u.values();
    let k = nodes.partition_point(|&x| x < r).clamp(2, nodes.len() - 1);
    let (a, b) = (nodes[k - 1], nodes[k]);
    let t = (r.ln() - a.ln()) / (b.ln() - a.ln());
    let ur = v[k - 1] + t * (v[k] - v[k - 1]);
    ur / (-2.0 * s * r.ln())
}

pub fn singular_profile_diagnostic(branch: &Branch, sigma: f64) -> Result<SingularProfileReport> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    let top = branch
        .points()
        .last()
        .ok_or_else(|| Error::Precondition("empty branch".into()))?;
    let nodes = top.profile.grid().nodes();
    let exponent = branch.params().s();
    let v = top.profile.values();

    let ratios: Vec<(f64, f64)> = nodes
        .iter()
        .zip(v)
        .filter(|(&r, _)| r > 0.0 && r <= DIAGNOSTIC_WINDOW)
        .map(|(&r, &u)| (r, u / (-2.0 * exponent * r.ln())))
        .collect();
    let threshold_radius = ratios
        .iter()
        .take_while(|(_, q)| *q > 1.0 - sigma)
        .last()
        .map(|&(r, _)| r);

    let pts = branch.points();
    let probe_ratios: Vec<(f64, f64)> = pts[pts.len().saturating_sub(3)..]
        .iter()
        .map(|p| (p.peak, log_ratio_at(&p.profile, exponent, DIAGNOSTIC_PROBE_RADIUS)))
        .collect();
    let ratio_increasing = probe_ratios.len() == 3 && probe_ratios.windows(2).all(|w| w[1].1 > w[0].1);

    let warning = (!nodes.iter().any(|&r| r > 0.0 && r < RESOLUTION_RADIUS)).then(|| {
        format!("grid has no node in (0, {RESOLUTION_RADIUS}); the profile near the origin is unresolved")
    });

    Ok(SingularProfileReport {
        sigma,
        peak: top.peak,
        lambda: top.lambda,
        ratios,
        threshold_radius,
        probe_ratios,
        ratio_increasing,
        warning,
    })
}

/// Relative residual of `u = log r^{−2s}`, `λ = λ₀` with matching exterior
/// data, `max |(-Δ)^s u − λ₀ e^u| / (λ₀ r^{−2s})` over nodes in `[0.1, 0.9]`.
pub fn singular_solution_residual(p: &ProblemParams<f64>, grid: &RadialGrid) -> Result<f64> {
    p.require_supercritical()?;
    let op = assemble(p, Arc::new(grid.clone()))?;
    singular_solution_residual_on(&op)
}

/// [`singular_solution_residual`] with an assembled operator.
pub fn singular_solution_residual_on(op: &OperatorMatrix) -> Result<f64> {
    let p = op.params();
    let s = p.s();
    let l0 = lambda0(p)?;
    let u = RadialFunction::from_fn(op.grid().clone(), TailSpec::LogPower { coeff: 1.0 }, true, |r| {
        -2.0 * s * r.ln()
    })?;
    let image = op.apply(&u)?;
    Ok(op
        .grid()
        .nodes()
        .iter()
        .zip(&image)
        .filter(|(&r, _)| (0.1..=0.9).contains(&r))
        .map(|(&r, &a)| {
            let target = l0 * r.powf(-2.0 * s);
            ((a - target) / target).abs()
        })
        .fold(0.0, f64::max))
}
