//! Radial discretization of `(-Δ)^s` on the unit ball with exterior data.

mod grid;
mod kernel;
mod operator;
mod psi;

pub use grid::{RadialFunction, RadialGrid, TailSpec, DEFAULT_GRADING, MIN_INTERVALS};
pub use kernel::{angular_kernel, h_at_diagonal, KernelTable};
pub use operator::{assemble, OperatorMatrix};
pub use psi::{singular_weight_integral, CutoffPower};

