//! Numerics for the fractional Gelfand problem `(-Δ)^s u = λ e^u` in the unit
//! ball of `R^n`, `u = g` outside.
//!
//! * [`specfun`], [`constants`], [`threshold`]: closed-form constants and the
//!   boundedness criterion for the extremal solution, generic over [`Real`].
//! * [`fraclap`]: dense collocation discretization of the radial operator.
//! * [`gelfand`]: peak-continuation of the minimal branch, stability
//!   eigenvalues and diagnostics near the extremal parameter.

pub mod constants;
pub mod error;
pub mod fraclap;
pub mod gelfand;
pub mod io;
pub mod quadrature;
pub mod scalar;
pub mod specfun;
pub mod threshold;

pub use error::{Error, Result};
pub use scalar::Real;

pub use constants::{
    epsilon_expansion, hardy_constant, lambda0, operator_normalization, power_coefficient,
};
pub use threshold::{classify, critical_s, margin, threshold_table, Regime, RegularityVerdict};

/// Problem parameters in double precision, the type used by the discretization.
pub type Params = constants::ProblemParams<f64>;
pub type Params32 = constants::ProblemParams<f32>;
pub type Verdict = threshold::RegularityVerdict<f64>;
pub type ThresholdRow = threshold::ThresholdRow<f64>;
