//! Dense collocation matrix of the radial `(-Δ)^s`.
//!
//! At a collocation node `r_i` the operator is
//! `c_{n,s} [ ∫_0^1 (u_i − u(ρ)) K(r_i,ρ) dρ + ∫_1^∞ (u_i − g(ρ)) K(r_i,ρ) dρ ]`.
//! Inside the ball `u` is a piecewise cubic interpolant of the nodal values
//! (mirrored through `r = 0`, where radial profiles are even). The two
//! panels touching `r_i` use one centered quartic instead, expanded in
//! powers of `ρ − r_i`; its moments against the kernel are split into the
//! explicit `|ρ − r_i|^{−1−2s}(1 + c_± (ρ − r_i))` part, integrated exactly in
//! the principal-value sense, and a bounded remainder. Every row functional
//! annihilates constants, so the diagonal is fixed by the row sum.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::grid::{RadialFunction, RadialGrid, TailSpec, MIN_INTERVALS};
use super::kernel::KernelTable;
use crate::constants::{operator_normalization, ProblemParams};
use crate::error::{Error, Result};
use crate::quadrature::{for_each_near, gauss};

/// Dyadic levels of the graded quadrature toward a collocation node.
const NEAR_LEVELS: i32 = 26;
/// Exterior integrals run over dyadic shells up to `2^TAIL_SHELLS`.
const TAIL_SHELLS: i32 = 41;
const NEAR_DEGREE: usize = 4;
const FAR_STENCIL: usize = 4;

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    params: ProblemParams<f64>,
    grid: Arc<RadialGrid>,
    kernel: Arc<KernelTable>,
    normalization: f64,
    /// Action on nodal values at `r_0, ..., r_{N−1}`.
    matrix: DMatrix<f64>,
    /// Weight of the boundary value `u(r_N)`.
    boundary_column: DVector<f64>,
    /// `c ∫_1^∞ K(r_i, ρ) dρ`: the response to a unit constant exterior.
    constant_tail: DVector<f64>,
    /// `c ∫_1^∞ ln ρ K(r_i, ρ) dρ`.
    log_tail: DVector<f64>,
    /// Quadrature of `∫_0^1 f(r) |S^{n−1}| r^{n−1} dr` from values at all nodes.
    weights: DVector<f64>,
    /// Positive lumped weights: the same integral of the piecewise-linear interpolant.
    lumped: DVector<f64>,
}

/// Node positions and value columns of an interpolation stencil; indices
/// below zero are mirrored through the origin.
fn stencil(nodes: &[f64], first: isize, len: usize) -> Vec<(f64, usize)> {
    let last = nodes.len() as isize - 1;
    let first = first.min(last + 1 - len as isize);
    (first..first + len as isize)
        .map(|j| {
            if j < 0 {
                (-nodes[(-j) as usize], (-j) as usize)
            } else {
                (nodes[j as usize], j as usize)
            }
        })
        .collect()
}

#[inline]
fn lagrange_at(st: &[(f64, usize)], x: f64, out: &mut [f64]) {
    for (l, &(xl, _)) in st.iter().enumerate() {
        let mut v = 1.0;
        for (m, &(xm, _)) in st.iter().enumerate() {
            if m != l {
                v *= (x - xm) / (xl - xm);
            }
        }
        out[l] = v;
    }
}

/// Monomial coefficients (in `y`) of each Lagrange basis polynomial for the
/// stencil abscissae `d`.
fn lagrange_monomials(d: &[f64]) -> Vec<Vec<f64>> {
    let len = d.len();
    (0..len)
        .map(|l| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for m in 0..len {
                if m == l {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= d[m] * c;
                }
                poly = next;
                denom *= d[l] - d[m];
            }
            poly.iter().map(|c| c / denom).collect()
        })
        .collect()
}

/// `(b^e − a^e) / e`, continuous through `e = 0`.
fn pow_diff_over_exponent(a: f64, b: f64, e: f64) -> f64 {
    let ln_ratio = (b / a).ln();
    if (e * ln_ratio).abs() < 1e-300 {
        return ln_ratio;
    }
    a.powf(e) * (e * ln_ratio).exp_m1() / e
}

struct Row {
    weights: Vec<f64>,
    constant_tail: f64,
    log_tail: f64,
}

struct Assembler<'a> {
    nodes: &'a [f64],
    kernel: &'a KernelTable,
    s: f64,
}

impl Assembler<'_> {
    fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    fn row(&self, i: usize) -> Row {
        let n_int = self.intervals();
        let mut weights = vec![0.0; n_int + 1];
        let skip = if i == 0 {
            self.origin_near_field(&mut weights);
            (0, 0)
        } else {
            self.near_field(i, &mut weights);
            (i - 1, i)
        };
        self.far_field(i, skip, &mut weights);
        let off: f64 = weights
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| w)
            .sum();
        weights[i] = -off;
        let (constant_tail, log_tail) = self.tail_moments(self.nodes[i]);
        Row {
            weights,
            constant_tail,
            log_tail,
        }
    }

    /// Row 0: even interpolant in `ρ²` on `[0, r_1]`, where `K(0, ρ) = |S| ρ^{−1−2s}` exactly.
    fn origin_near_field(&self, weights: &mut [f64]) {
        let r = self.nodes;
        let b = r[1];
        let ys = [0.0, r[1] * r[1], r[2] * r[2]];
        let mono = lagrange_monomials(&ys);
        let sphere = self.kernel.sphere();
        let two_s = 2.0 * self.s;
        for (l, coeffs) in mono.iter().enumerate() {
            let mut acc = 0.0;
            for (k, &c) in coeffs.iter().enumerate().skip(1) {
                let e = 2.0 * k as f64 - two_s;
                acc += c * sphere * b.powf(e) / e;
            }
            weights[l] -= acc;
        }
    }

    fn near_field(&self, i: usize, weights: &mut [f64]) {
        let r = self.nodes;
        let ri = r[i];
        let st = stencil(r, i as isize - 2, NEAR_DEGREE + 1);
        let d: Vec<f64> = st.iter().map(|&(x, _)| x - ri).collect();
        let mono = lagrange_monomials(&d);
        let moments = self.near_moments(i);
        for (l, coeffs) in mono.iter().enumerate() {
            let acc: f64 = (1..=NEAR_DEGREE).map(|k| coeffs[k] * moments[k - 1]).sum();
            weights[st[l].1] -= acc;
        }
    }

    /// `PV ∫_{r_{i−1}}^{r_{i+1}} (ρ − r_i)^k K(r_i, ρ) dρ` for `k = 1..=4`.
    fn near_moments(&self, i: usize) -> [f64; NEAR_DEGREE] {
        let r = self.nodes;
        let ri = r[i];
        let left = ri - r[i - 1];
        let right = r[i + 1] - ri;
        let c = self.kernel.diag_coeff();
        let (cp, cm) = self.kernel.diag_slopes(ri);
        let q = 1.0 + 2.0 * self.s;
        let mut out = [0.0; NEAR_DEGREE];

        let rule = gauss(8);
        for (span, sign, slope) in [(right, 1.0, cp), (left, -1.0, cm)] {
            for level in 0..NEAR_LEVELS {
                let hi = span * 0.5f64.powi(level);
                let lo = 0.5 * hi;
                rule.for_each(lo, hi, |t, wt| {
                    let rho = ri + sign * t;
                    let tt = rho - ri;
                    let model = c * tt.abs().powf(-q) * (1.0 + slope * tt);
                    let rem = self.kernel.radial(ri, rho) - model;
                    let mut p = tt;
                    for m in out.iter_mut() {
                        *m += wt * p * rem;
                        p *= tt;
                    }
                });
            }
        }

        let two_s = 2.0 * self.s;
        for (idx, m) in out.iter_mut().enumerate() {
            let k = (idx + 1) as f64;
            let parity = if (idx + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let leading = if idx == 0 {
                pow_diff_over_exponent(left, right, k - two_s)
            } else {
                let e = k - two_s;
                (right.powf(e) + parity * left.powf(e)) / e
            };
            let e1 = k + 1.0 - two_s;
            let first = (cp * right.powf(e1) - parity * cm * left.powf(e1)) / e1;
            *m += c * (leading + first);
        }
        out
    }

    fn far_field(&self, i: usize, skip: (usize, usize), weights: &mut [f64]) {
        let r = self.nodes;
        let ri = r[i];
        let rule = gauss(8);
        let mut basis = [0.0; FAR_STENCIL];
        for j in 0..self.intervals() {
            if j == skip.0 || j == skip.1 {
                continue;
            }
            let st = stencil(r, j as isize - 1, FAR_STENCIL);
            for_each_near(rule, r[j], r[j + 1], ri, &mut |x, w| {
                let kw = w * self.kernel.radial(ri, x);
                lagrange_at(&st, x, &mut basis);
                for (b, &(_, col)) in basis.iter().zip(&st) {
                    weights[col] -= kw * b;
                }
            });
        }
    }

    /// Visit quadrature nodes of `(1, ∞)` up to the last dyadic shell.
    fn for_each_exterior(&self, ri: f64, mut visit: impl FnMut(f64, f64)) {
        let rule = gauss(12);
        for_each_near(rule, 1.0, 2.0, ri, &mut visit);
        for k in 1..TAIL_SHELLS {
            let lo = 2f64.powi(k);
            rule.for_each(lo, 2.0 * lo, &mut visit);
        }
    }

    fn tail_moments(&self, ri: f64) -> (f64, f64) {
        let mut t0 = 0.0;
        let mut t1 = 0.0;
        self.for_each_exterior(ri, |x, w| {
            let k = w * self.kernel.radial(ri, x);
            t0 += k;
            t1 += k * x.ln();
        });
        let big = 2f64.powi(TAIL_SHELLS);
        let two_s = 2.0 * self.s;
        let decay = self.kernel.sphere() * big.powf(-two_s);
        t0 += decay / two_s;
        t1 += decay * (big.ln() / two_s + 1.0 / (two_s * two_s));
        (t0, t1)
    }

    fn power_tail(&self, ri: f64, alpha: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_exterior(ri, |x, w| acc += w * x.powf(-alpha) * self.kernel.radial(ri, x));
        let big = 2f64.powi(TAIL_SHELLS);
        let e = alpha + 2.0 * self.s;
        acc + self.kernel.sphere() * big.powf(-e) / e
    }

    fn lumped_weights(&self) -> Vec<f64> {
        let r = self.nodes;
        let n_dim = self.kernel.n() as i32;
        let sphere = self.kernel.sphere();
        let mut w = vec![0.0; r.len()];
        for j in 0..self.intervals() {
            let (a, b) = (r[j], r[j + 1]);
            gauss(12).for_each(a, b, |x, wt| {
                let m = wt * sphere * x.powi(n_dim - 1);
                let t = (x - a) / (b - a);
                w[j] += m * (1.0 - t);
                w[j + 1] += m * t;
            });
        }
        w
    }

    fn mass_weights(&self) -> Vec<f64> {
        let r = self.nodes;
        let n_dim = self.kernel.n() as i32;
        let sphere = self.kernel.sphere();
        let mut w = vec![0.0; r.len()];
        let mut basis = [0.0; FAR_STENCIL];
        for j in 0..self.intervals() {
            let st = stencil(r, j as isize - 1, FAR_STENCIL);
            gauss(8).for_each(r[j], r[j + 1], |x, wt| {
                lagrange_at(&st, x, &mut basis);
                let m = wt * sphere * x.powi(n_dim - 1);
                for (b, &(_, col)) in basis.iter().zip(&st) {
                    w[col] += m * b;
                }
            });
        }
        w
    }
}

/// Assemble the collocation operator for `(n, s)` on `grid`.
pub fn assemble(params: &ProblemParams<f64>, grid: Arc<RadialGrid>) -> Result<OperatorMatrix> {
    let s = params.s();
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Unsupported(format!(
            "the discretized operator needs s in (0, 1), got {s}"
        )));
    }
    if grid.intervals() < MIN_INTERVALS {
        return Err(Error::Config(format!(
            "grid needs at least {MIN_INTERVALS} intervals"
        )));
    }
    let kernel = Arc::new(KernelTable::new(params));
    let normalization = operator_normalization(params)?;
    let asm = Assembler {
        nodes: grid.nodes(),
        kernel: &kernel,
        s,
    };
    let n_int = grid.intervals();
    let rows: Vec<Row> = (0..n_int).into_par_iter().map(|i| asm.row(i)).collect();

    let c = normalization;
    let matrix = DMatrix::from_fn(n_int, n_int, |i, j| {
        let diag = if i == j { rows[i].constant_tail } else { 0.0 };
        c * (rows[i].weights[j] + diag)
    });
    let boundary_column = DVector::from_fn(n_int, |i, _| c * rows[i].weights[n_int]);
    let constant_tail = DVector::from_fn(n_int, |i, _| c * rows[i].constant_tail);
    let log_tail = DVector::from_fn(n_int, |i, _| c * rows[i].log_tail);
    let weights = DVector::from_vec(asm.mass_weights());
    let lumped = DVector::from_vec(asm.lumped_weights());

    Ok(OperatorMatrix {
        params: *params,
        grid,
        kernel,
        normalization,
        matrix,
        boundary_column,
        constant_tail,
        log_tail,
        weights,
        lumped,
    })
}

impl OperatorMatrix {
    pub fn params(&self) -> &ProblemParams<f64> {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn kernel(&self) -> &KernelTable {
        &self.kernel
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Number of collocation nodes (`N`, the center included).
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn boundary_column(&self) -> &DVector<f64> {
        &self.boundary_column
    }

    /// Weights for all `N + 1` nodes.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Positive weights for all `N + 1` nodes, exact for piecewise-linear data.
    pub fn lumped_weights(&self) -> &DVector<f64> {
        &self.lumped
    }

    /// Contribution of the boundary value `tail.boundary_value()` and of the
    /// exterior data to `(-Δ)^s u` at the collocation nodes.
    pub fn tail_response(&self, tail: &TailSpec) -> Result<DVector<f64>> {
        tail.validate()?;
        let g1 = tail.boundary_value();
        let exterior = self.exterior_response(tail);
        Ok(&self.boundary_column * g1 + exterior)
    }

    /// `−c ∫_1^∞ g(ρ) K(r_i, ρ) dρ`.
    pub fn exterior_response(&self, tail: &TailSpec) -> DVector<f64> {
        let s = self.params.s();
        match *tail {
            TailSpec::Zero => DVector::zeros(self.size()),
            TailSpec::Constant { value } => &self.constant_tail * (-value),
            TailSpec::LogPower { coeff } => &self.log_tail * (2.0 * s * coeff),
            TailSpec::Power { alpha, coeff } => {
                let asm = Assembler {
                    nodes: self.grid.nodes(),
                    kernel: &self.kernel,
                    s,
                };
                let nodes = &self.grid.nodes()[..self.size()];
                let moments: Vec<f64> = nodes.par_iter().map(|&r| asm.power_tail(r, alpha)).collect();
                DVector::from_fn(self.size(), |i, _| -self.normalization * coeff * moments[i])
            }
        }
    }

    fn check_grid(&self, u: &RadialFunction) -> Result<()> {
        if Arc::ptr_eq(u.grid(), &self.grid) || u.grid().nodes() == self.grid.nodes() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.grid.nodes().len(),
                got: u.values().len(),
            })
        }
    }

    /// Nodal values at the collocation nodes; a singular center value is
    /// replaced by its neighbour so that it never enters the sums.
    fn collocation_values(&self, u: &RadialFunction) -> DVector<f64> {
        let v = u.values();
        let mut out = DVector::from_column_slice(&v[..self.size()]);
        if u.is_singular_at_origin() {
            out[0] = v[1];
        }
        out
    }

    /// `(-Δ)^s u` at the collocation nodes `r_0, ..., r_{N−1}`.
    ///
    /// Entry 0 is `NaN` for profiles singular at the origin.
    pub fn apply(&self, u: &RadialFunction) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        let v = self.collocation_values(u);
        let boundary = u.values()[self.size()];
        let mut out = self.interior_action(v.as_slice(), boundary);
        out += self.exterior_response(&u.tail());
        if u.is_singular_at_origin() {
            out[0] = f64::NAN;
        }
        Ok(out.as_slice().to_vec())
    }

    /// Action of the matrix and boundary column on nodal values `v`
    /// (collocation nodes) and `boundary` (the value at `r = 1`), without
    /// the exterior integral.
    pub fn interior_action(&self, v: &[f64], boundary: f64) -> DVector<f64> {
        self.interior_action_with_magnitude(v, boundary).0
    }

    /// [`interior_action`](Self::interior_action) together with
    /// `|A||v| + |b_i||boundary|`, the scale of its sensitivity to rounding in `v`.
    pub fn interior_action_with_magnitude(&self, v: &[f64], boundary: f64) -> (DVector<f64>, DVector<f64>) {
        assert_eq!(v.len(), self.size(), "one value per collocation node");
        let mut magnitude = DVector::zeros(self.size());
        // Difference form: rows sum to the constant-tail response, so
        // constants cancel exactly instead of up to rounding of large entries.
        let action = DVector::from_fn(self.size(), |i, _| {
            let vi = v[i];
            let mut acc = self.constant_tail[i] * vi + self.boundary_column[i] * (boundary - vi);
            let mut mag = (self.matrix[(i, i)] * vi).abs() + (self.boundary_column[i] * boundary).abs();
            for (j, &vj) in v.iter().enumerate() {
                if j != i {
                    acc += self.matrix[(i, j)] * (vj - vi);
                    mag += (self.matrix[(i, j)] * vj).abs();
                }
            }
            magnitude[i] = mag;
            acc
        });
        (action, magnitude)
    }

    fn require_test_function(&self, f: &RadialFunction) -> Result<()> {
        self.check_grid(f)?;
        if !f.tail().is_zero() {
            return Err(Error::Precondition(
                "quadratic form needs test functions vanishing outside the ball".into(),
            ));
        }
        if f.is_singular_at_origin() {
            return Err(Error::Precondition("quadratic form needs bounded test functions".into()));
        }
        Ok(())
    }

    /// `∫_{B_1} η (-Δ)^s ζ dx` integrated with the node weights.
    pub fn quadratic_form_one_sided(&self, eta: &RadialFunction, zeta: &RadialFunction) -> Result<f64> {
        self.require_test_function(eta)?;
        self.require_test_function(zeta)?;
        let lz = self.apply(zeta)?;
        Ok(eta
            .values()
            .iter()
            .zip(&lz)
            .zip(self.weights.iter())
            .map(|((e, l), w)| e * l * w)
            .sum())
    }

    /// The bilinear energy form: the average of `∫ η (-Δ)^s ζ` and `∫ ζ (-Δ)^s η`.
    pub fn quadratic_form(&self, eta: &RadialFunction, zeta: &RadialFunction) -> Result<f64> {
        let a = self.quadratic_form_one_sided(eta, zeta)?;
        let b = self.quadratic_form_one_sided(zeta, eta)?;
        Ok(0.5 * (a + b))
    }

    /// Symmetrized energy matrix `(W A + Aᵀ W) / 2` on nodal values at the
    /// collocation nodes, with `W` the lumped weights.
    pub fn energy_matrix(&self) -> DMatrix<f64> {
        let n = self.size();
        let w = &self.lumped;
        DMatrix::from_fn(n, n, |i, j| {
            0.5 * (w[i] * self.matrix[(i, j)] + w[j] * self.matrix[(j, i)])
        })
    }
}
