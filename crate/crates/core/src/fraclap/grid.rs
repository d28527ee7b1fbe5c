use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_INTERVALS: usize = 16;
pub const DEFAULT_GRADING: f64 = 2.0;
pub const DEFAULT_PANEL_ORDER: usize = 8;

/// Radial mesh `0 = r_0 < r_1 < ... < r_N = 1`.
///
/// Collocation happens at `r_0, ..., r_{N-1}` (every node inside the ball,
/// the center included); `r_N = 1` carries the boundary value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: f64,
    panel_order: usize,
}

impl RadialGrid {
    /// Algebraic grading with exponent `grading` toward both `r = 0` and `r = 1`.
    pub fn graded(intervals: usize, grading: f64) -> Result<Self> {
        if intervals < MIN_INTERVALS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
            )));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(Error::Config(format!("grading exponent must be >= 1, got {grading}")));
        }
        let nf = intervals as f64;
        let nodes = (0..=intervals)
            .map(|j| {
                if j == 0 {
                    0.0
                } else if j == intervals {
                    1.0
                } else {
                    let x = j as f64 / nf;
                    if x <= 0.5 {
                        0.5 * (2.0 * x).powf(grading)
                    } else {
                        1.0 - 0.5 * (2.0 * (1.0 - x)).powf(grading)
                    }
                }
            })
            .collect();
        Self::with_meta(nodes, grading, DEFAULT_PANEL_ORDER)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::with_meta(nodes, 1.0, DEFAULT_PANEL_ORDER)
    }

    fn with_meta(nodes: Vec<f64>, grading: f64, panel_order: usize) -> Result<Self> {
        if nodes.len() < MIN_INTERVALS + 1 {
            return Err(Error::Config(format!(
                "grid needs at least {} nodes, got {}",
                MIN_INTERVALS + 1,
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::Config("grid must start at 0 and end at 1".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid nodes must be strictly increasing".into()));
        }
        Ok(Self {
            nodes,
            grading,
            panel_order,
        })
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of intervals `N`.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn panel_order(&self) -> usize {
        self.panel_order
    }
}

/// Values of the function outside the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailSpec {
    Zero,
    Constant { value: f64 },
    /// `coeff · r^{−alpha}`
    Power { alpha: f64, coeff: f64 },
    /// `coeff · log r^{−2s}`
    LogPower { coeff: f64 },
}

impl TailSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TailSpec::Zero => true,
            TailSpec::Constant { value } => value.is_finite(),
            TailSpec::Power { alpha, coeff } => alpha.is_finite() && alpha > 0.0 && coeff.is_finite(),
            TailSpec::LogPower { coeff } => coeff.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid tail {self:?}")))
        }
    }

    /// Tail value at radius `r >= 1` for fractional order `s`.
    pub fn eval(&self, r: f64, s: f64) -> f64 {
        match *self {
            TailSpec::Zero => 0.0,
            TailSpec::Constant { value } => value,
            TailSpec::Power { alpha, coeff } => coeff * r.powf(-alpha),
            TailSpec::LogPower { coeff } => -2.0 * s * coeff * r.ln(),
        }
    }

    /// Trace on the unit sphere.
    pub fn boundary_value(&self) -> f64 {
        match *self {
            TailSpec::Zero | TailSpec::LogPower { .. } => 0.0,
            TailSpec::Constant { value } => value,
            TailSpec::Power { coeff, .. } => coeff,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TailSpec::Zero)
    }
}

/// Radial profile sampled at every grid node, plus its exterior values.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    tail: TailSpec,
    singular_at_origin: bool,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, tail: TailSpec) -> Result<Self> {
        Self::build(grid, values, tail, false)
    }

    /// A profile that blows up at `r = 0`; `values[0]` is ignored.
    pub fn singular(grid: Arc<RadialGrid>, values: Vec<f64>, tail: TailSpec) -> Result<Self> {
        Self::build(grid, values, tail, true)
    }

    fn build(
        grid: Arc<RadialGrid>,
        values: Vec<f64>,
        tail: TailSpec,
        singular_at_origin: bool,
    ) -> Result<Self> {
        tail.validate()?;
        if values.len() != grid.nodes().len() {
            return Err(Error::GridMismatch {
                expected: grid.nodes().len(),
                got: values.len(),
            });
        }
        let start = usize::from(singular_at_origin);
        if values[start..].iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("radial function values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            tail,
            singular_at_origin,
        })
    }

    /// Sample `f` at the nodes; `f(0)` is skipped when `singular_at_origin`.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        tail: TailSpec,
        singular_at_origin: bool,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, &r)| if j == 0 && singular_at_origin { f64::NAN } else { f(r) })
            .collect();
        Self::build(grid, values, tail, singular_at_origin)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> TailSpec {
        self.tail
    }

    pub fn is_singular_at_origin(&self) -> bool {
        self.singular_at_origin
    }

    /// `a·self + b·other` on a shared grid; tails must be of the same kind.
    pub fn combine(&self, a: f64, other: &RadialFunction, b: f64) -> Result<Self> {
        if self.grid.nodes() != other.grid.nodes() {
            return Err(Error::GridMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let tail = match (self.tail, other.tail) {
            (TailSpec::Zero, TailSpec::Zero) => TailSpec::Zero,
            (TailSpec::Constant { value: x }, TailSpec::Constant { value: y }) => {
                TailSpec::Constant { value: a * x + b * y }
            }
            (TailSpec::LogPower { coeff: x }, TailSpec::LogPower { coeff: y }) => {
                TailSpec::LogPower { coeff: a * x + b * y }
            }
            (TailSpec::Power { alpha: p, coeff: x }, TailSpec::Power { alpha: q, coeff: y }) if p == q => {
                TailSpec::Power { alpha: p, coeff: a * x + b * y }
            }
            (t, u) => {
                return Err(Error::Unsupported(format!("cannot combine tails {t:?} and {u:?}")));
            }
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::build(
            self.grid.clone(),
            values,
            tail,
            self.singular_at_origin || other.singular_at_origin,
        )
    }
}
