use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::branch::{Branch, BranchPoint};
use super::stability::smallest_eigenvalue;
use super::ContinuationConfig;
use crate::error::{Error, Result};
use crate::fraclap::{assemble, OperatorMatrix, RadialFunction};

/// Newton solver for the augmented system in `(u_0, ..., u_{N−1}, λ)`:
/// `A u + g − λ e^u = 0` at the collocation nodes and `u_0 = m`.
#[derive(Debug, Clone)]
pub struct GelfandSolver {
    cfg: ContinuationConfig,
    op: Arc<OperatorMatrix>,
    exterior: DVector<f64>,
    boundary: f64,
}

impl GelfandSolver {
    pub fn new(cfg: ContinuationConfig) -> Result<Self> {
        cfg.validate()?;
        let op = Arc::new(assemble(&cfg.params, cfg.grid.clone())?);
        Self::with_operator(cfg, op)
    }

    /// Reuse an assembled operator; it must match the configured grid and parameters.
    pub fn with_operator(cfg: ContinuationConfig, op: Arc<OperatorMatrix>) -> Result<Self> {
        cfg.validate()?;
        if op.grid().nodes() != cfg.grid.nodes() {
            return Err(Error::GridMismatch {
                expected: op.grid().nodes().len(),
                got: cfg.grid.nodes().len(),
            });
        }
        if *op.params() != cfg.params {
            return Err(Error::Config("operator was assembled for other parameters".into()));
        }
        let exterior = op.exterior_response(&cfg.exterior);
        let boundary = cfg.exterior.boundary_value();
        Ok(Self {
            cfg,
            op,
            exterior,
            boundary,
        })
    }

    pub fn config(&self) -> &ContinuationConfig {
        &self.cfg
    }

    pub fn operator(&self) -> &Arc<OperatorMatrix> {
        &self.op
    }

    /// Solve with `u(0) = m`, starting from `warm` rescaled to the new peak
    /// or, without it, from the small-peak linearization.
    pub fn solve_at_peak(&self, m: f64, warm: Option<&BranchPoint>) -> Result<BranchPoint> {
        let (u, lambda) = match warm {
            Some(w) => {
                let scale = m / w.peak;
                let u = DVector::from_fn(self.op.size(), |i, _| w.profile.values()[i] * scale);
                (u, w.lambda)
            }
            None => self.linear_guess(m)?,
        };
        self.solve_from(m, u, lambda)
    }

    /// `m ζ / ζ(0)` with `A ζ = 1`, and the matching `λ = m / ζ(0)`.
    fn linear_guess(&self, m: f64) -> Result<(DVector<f64>, f64)> {
        let n = self.op.size();
        let rhs = DVector::from_element(n, 1.0) - &self.exterior;
        let zeta = self
            .op
            .matrix()
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("operator matrix is singular".into()))?;
        let z0 = zeta[0];
        if !(z0 > 0.0) {
            return Err(Error::Numerical(format!("torsion function has center value {z0}")));
        }
        Ok((zeta * (m / z0), m / z0))
    }

    /// Residual and its componentwise backward error
    /// `max_i |F_i| / max(1, (|A||u| + |g| + λ e^u)_i)`.
    fn residual(&self, u: &DVector<f64>, lambda: f64, m: f64) -> (DVector<f64>, f64) {
        let (action, magnitude) = self.op.interior_action_with_magnitude(u.as_slice(), self.boundary);
        let mut f = action + &self.exterior;
        let mut norm: f64 = (u[0] - m).abs();
        for i in 0..f.len() {
            let src = lambda * u[i].exp();
            f[i] -= src;
            let scale = (magnitude[i] + self.exterior[i].abs() + src.abs()).max(1.0);
            norm = norm.max(f[i].abs() / scale);
        }
        (f, if norm.is_finite() { norm } else { f64::INFINITY })
    }

    fn solve_from(&self, m: f64, mut u: DVector<f64>, mut lambda: f64) -> Result<BranchPoint> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("peak must be positive, got {m}")));
        }
        let n = self.op.size();
        let a = self.op.matrix();
        let (mut f, mut norm) = self.residual(&u, lambda, m);
        let mut iters = 0;
        while norm > self.cfg.newton_tol {
            if iters == self.cfg.max_iters {
                let mut last = u.as_slice().to_vec();
                last.push(lambda);
                return Err(Error::NoConvergence {
                    iters,
                    residual: norm,
                    last_iterate: last,
                });
            }
            iters += 1;
            let mut jac = DMatrix::zeros(n + 1, n + 1);
            jac.view_mut((0, 0), (n, n)).copy_from(a);
            for i in 0..n {
                let e = u[i].exp();
                jac[(i, i)] -= lambda * e;
                jac[(i, n)] = -e;
            }
            jac[(n, 0)] = 1.0;
            let mut rhs = DVector::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&(-&f));
            rhs[n] = m - u[0];
            let step = jac
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Numerical("singular Newton matrix".into()))?;

            // Backtracking on the scaled residual.
            let mut t = 1.0;
            loop {
                let trial_u = &u + step.rows(0, n) * t;
                let trial_lambda = lambda + step[n] * t;
                let (tf, tn) = self.residual(&trial_u, trial_lambda, m);
                if tn.is_finite() && (tn < norm || t < 1.0 / 1024.0) {
                    u = trial_u;
                    lambda = trial_lambda;
                    f = tf;
                    norm = tn;
                    break;
                }
                t *= 0.5;
            }
        }
        if !(lambda > 0.0) {
            return Err(Error::Infeasible { lambda });
        }
        let mut values = u.as_slice().to_vec();
        values.push(self.boundary);
        let profile = RadialFunction::new(self.cfg.grid.clone(), values, self.cfg.exterior)?;
        let stability_eig = smallest_eigenvalue(&self.op, &profile, lambda)?;
        Ok(BranchPoint {
            lambda,
            profile,
            peak: m,
            stability_eig,
            newton_iters: iters,
            residual_norm: norm,
        })
    }

    /// March the peak over the configured range with secant predictors.
    /// A failure returns the points computed so far inside [`Error::Branch`].
    pub fn trace_branch(&self) -> Result<Branch> {
        let mut points: Vec<BranchPoint> = Vec::new();
        for m in self.cfg.peaks() {
            let attempt = match points.as_slice() {
                [] => self.solve_at_peak(m, None),
                [prev] => self.solve_at_peak(m, Some(prev)),
                [.., p1, p2] => {
                    let t = (m - p2.peak) / (p2.peak - p1.peak);
                    let n = self.op.size();
                    let v1 = p1.profile.values();
                    let v2 = p2.profile.values();
                    let u = DVector::from_fn(n, |i, _| v2[i] + t * (v2[i] - v1[i]));
                    let lambda = p2.lambda + t * (p2.lambda - p1.lambda);
                    self.solve_from(m, u, lambda)
                }
            };
            match attempt {
                Ok(p) => points.push(p),
                Err(e) => {
                    return Err(Error::Branch {
                        peak: m,
                        source: Box::new(e),
                        partial: Box::new(Branch::from_points(self.cfg.params, points)),
                    })
                }
            }
        }
        Ok(Branch::from_points(self.cfg.params, points))
    }
}

/// One-shot [`GelfandSolver::solve_at_peak`]; assembles the operator.
pub fn solve_at_peak(cfg: &ContinuationConfig, m: f64, warm: Option<&BranchPoint>) -> Result<BranchPoint> {
    GelfandSolver::new(cfg.clone())?.solve_at_peak(m, warm)
}

/// One-shot [`GelfandSolver::trace_branch`]; assembles the operator.
pub fn trace_branch(cfg: &ContinuationConfig) -> Result<Branch> {
    GelfandSolver::new(cfg.clone())?.trace_branch()
}
