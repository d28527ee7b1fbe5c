//! The minimal branch of `(-Δ)^s u = λ e^u` in `B_1`, traced in the peak
//! value `m = u(0)` with `λ` solved for.

mod branch;
mod diagnostics;
mod solver;
mod stability;

use std::sync::Arc;

use crate::constants::ProblemParams;
use crate::error::{Error, Result};
use crate::fraclap::{RadialGrid, TailSpec};

pub use branch::{Branch, BranchPoint, FOLD_DROP};
pub use diagnostics::{
    singular_profile_diagnostic, singular_solution_residual, singular_solution_residual_on,
    torsion_center, SingularProfileReport, DIAGNOSTIC_PROBE_RADIUS,
};
pub use solver::{solve_at_peak, trace_branch, GelfandSolver};
pub use stability::{stability_eigenvalue, stability_inequality_check, InequalityCheck};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 50;
/// Eigenvalues above `−STABILITY_TOL` count as stable.
pub const STABILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    pub params: ProblemParams<f64>,
    pub grid: Arc<RadialGrid>,
    pub exterior: TailSpec,
    pub peak_start: f64,
    pub peak_end: f64,
    pub peak_step: f64,
    pub newton_tol: f64,
    pub max_iters: usize,
}

impl ContinuationConfig {
    /// Zero exterior data, peaks `0.05, 0.10, ..., 10`.
    pub fn new(params: ProblemParams<f64>, grid: Arc<RadialGrid>) -> Self {
        Self {
            params,
            grid,
            exterior: TailSpec::Zero,
            peak_start: 0.05,
            peak_end: 10.0,
            peak_step: 0.05,
            newton_tol: DEFAULT_NEWTON_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn with_peaks(mut self, start: f64, end: f64, step: f64) -> Self {
        self.peak_start = start;
        self.peak_end = end;
        self.peak_step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.peak_start > 0.0
            && self.peak_end > self.peak_start
            && self.peak_step > 0.0
            && self.peak_end.is_finite();
        if !ok {
            return Err(Error::Config(format!(
                "peaks need 0 < start < end and step > 0, got start {}, end {}, step {}",
                self.peak_start, self.peak_end, self.peak_step
            )));
        }
        if !(self.newton_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("newton tolerance and iteration cap must be positive".into()));
        }
        self.exterior.validate()
    }

    /// `start + k·step` up to `end`, computed without accumulation.
    pub fn peaks(&self) -> Vec<f64> {
        let count = ((self.peak_end - self.peak_start) / self.peak_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| self.peak_start + k as f64 * self.peak_step)
            .collect()
    }
}
