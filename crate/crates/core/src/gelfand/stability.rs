use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};

use super::branch::BranchPoint;
use super::STABILITY_TOL;
use crate::constants::sphere_area;
use crate::error::{Error, Result};
use crate::fraclap::{singular_weight_integral, CutoffPower, OperatorMatrix, RadialFunction};

const EIG_TOL: f64 = 1e-8;
const EIG_MAX_ITERS: usize = 200;

/// Smallest eigenvalue `μ` of `L = A − λ diag(e^u)` on the collocation nodes.
///
/// For profiles singular at the origin the center entry of `e^u` is the
/// average of `e^{u(r_1)} (r/r_1)^{−2s}` over the first cell against
/// `r^{n−1}` and the hat function of the center node.
///
/// A Schur estimate of the spectrum picks the shift, then inverse iteration
/// from a fixed start vector refines the eigenvalue.
pub(crate) fn smallest_eigenvalue(op: &OperatorMatrix, u: &RadialFunction, lambda: f64) -> Result<f64> {
    let n = op.size();
    let a = op.matrix();
    let v = u.values();
    let mut potential: Vec<f64> = v[..n].iter().map(|x| lambda * x.exp()).collect();
    if u.is_singular_at_origin() {
        let p = op.params();
        p.require_supercritical()?;
        let (d, s) = (p.dim(), p.s());
        potential[0] = potential[1] * d * (d + 1.0) / ((d - 2.0 * s) * (d + 1.0 - 2.0 * s));
    }
    let l = DMatrix::from_fn(n, n, |i, j| a[(i, j)] - if i == j { potential[i] } else { 0.0 });

    let schur = Schur::try_new(l.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let estimate = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !estimate.is_finite() {
        return Err(Error::Numerical("non-finite spectrum estimate".into()));
    }

    let scale = estimate.abs().max(1.0);
    let sigma = estimate - 1e-6 * scale;
    let mut shifted = l.clone();
    for i in 0..n {
        shifted[(i, i)] -= sigma;
    }
    let lu = shifted.lu();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut theta = estimate;
    for _ in 0..EIG_MAX_ITERS {
        let y = lu
            .solve(&x)
            .ok_or_else(|| Error::Numerical("shift hit an eigenvalue exactly".into()))?;
        let next = sigma + x.dot(&y) / y.dot(&y);
        x = &y / y.norm();
        let done = (next - theta).abs() <= EIG_TOL * next.abs().max(1.0);
        theta = next;
        if done {
            return Ok(theta);
        }
    }
    Err(Error::Numerical(format!(
        "inverse iteration did not settle within {EIG_MAX_ITERS} steps"
    )))
}

/// Smallest eigenvalue of the linearized operator at `point`; the point is
/// stable when it is nonnegative.
pub fn stability_eigenvalue(op: &OperatorMatrix, point: &BranchPoint) -> Result<f64> {
    smallest_eigenvalue(op, &point.profile, point.lambda)
}

/// Both sides of `∫ u (-Δ)^s ψ² ≤ ∫ ψ (-Δ)^s ψ` over the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub eps: f64,
    pub rho0: f64,
}

impl InequalityCheck {
    /// `lhs ≤ rhs + rel·|rhs|`.
    pub fn holds(&self, rel: f64) -> bool {
        self.lhs <= self.rhs + rel * self.rhs.abs()
    }
}

/// Evaluate both sides for `ψ = r^{(2s−n+ε)/2} χ(r)`, with `χ` the cutoff
/// of [`CutoffPower`] at `rho0`.
///
/// For `ε < n − 2s` both integrands behave like `r^{ε−1}` at the origin;
/// they are written as `F(r) r^{ε−1}` with `F` bounded and integrated
/// against the exact weight. Otherwise `ψ` is bounded and the operator is
/// applied to it directly.
pub fn stability_inequality_check(
    op: &OperatorMatrix,
    point: &BranchPoint,
    rho0: f64,
    eps: f64,
) -> Result<InequalityCheck> {
    if point.stability_eig < -STABILITY_TOL {
        return Err(Error::Precondition(format!(
            "point at peak {} is unstable (eigenvalue {})",
            point.peak, point.stability_eig
        )));
    }
    if op.grid().nodes() != point.profile.grid().nodes() {
        return Err(Error::GridMismatch {
            expected: op.grid().nodes().len(),
            got: point.profile.values().len(),
        });
    }
    let p = op.params();
    let (n, s) = (p.dim(), p.s());
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let psi = CutoffPower::new(0.5 * (n - 2.0 * s - eps), rho0)?;
    let psi2 = psi.square();
    let nodes = op.grid().nodes();
    let last = op.size();
    let sphere: f64 = sphere_area(p.n());
    let u = point.profile.values();

    if psi.beta() <= 0.0 {
        // Bounded test function: apply the operator directly, weight r^{n−1}.
        let f = psi.sample(op)?;
        let f2 = psi2.sample(op)?;
        let af = op.apply(&f)?;
        let af2 = op.apply(&f2)?;
        let mut f_rhs: Vec<f64> = f.values().iter().zip(&af).map(|(a, b)| a * b).collect();
        f_rhs.push(0.0);
        let mut f_lhs: Vec<f64> = u.iter().zip(&af2).map(|(a, b)| a * b).collect();
        f_lhs.push(u[last] * af2[last - 1]);
        return Ok(InequalityCheck {
            lhs: sphere * singular_weight_integral(nodes, &f_lhs, n)?,
            rhs: sphere * singular_weight_integral(nodes, &f_rhs, n)?,
            eps,
            rho0,
        });
    }

    let g1 = psi.scaled_image(op)?;
    let mut f_rhs: Vec<f64> = g1.iter().zip(nodes).map(|(g, &r)| psi.cutoff(r) * g).collect();
    f_rhs.push(0.0);

    let g2 = psi2.scaled_image(op)?;
    let mut f_lhs: Vec<f64> = g2.iter().zip(u).map(|(g, v)| v * g).collect();
    f_lhs.push(u[last] * g2[last - 1]);

    Ok(InequalityCheck {
        lhs: sphere * singular_weight_integral(nodes, &f_lhs, eps)?,
        rhs: sphere * singular_weight_integral(nodes, &f_rhs, eps)?,
        eps,
        rho0,
    })
}
