//! Radially reduced kernel of the fractional Laplacian.
//!
//! For radial `u`, `(-Δ)^s u(r) = c_{n,s} PV ∫_0^∞ (u(r) − u(ρ)) k(r,ρ) ρ^{n−1} dρ`
//! with `k(r,ρ) = ∫_{S^{n−1}} |r e₁ − ρ ω|^{−(n+2s)} dσ(ω)`.
//!
//! Writing `R = max(r,ρ)`, `τ = min(r,ρ)/R` and `w = 1 − τ²`,
//! `k = |S^{n−1}| R^{−n−2s} w^{−1−2s} H(w)` where `H` is bounded on `[0, 1]`
//! (`H = 1` at `w = 1`). `H` is computed once per `(n, s)` by a graded
//! quadrature over the polar angle and stored as dyadic Chebyshev panels.

use std::f64::consts::PI;

use crate::constants::{sphere_area, ProblemParams};
use crate::error::{Error, Result};
use crate::quadrature::{gauss, ChebPanel};
use crate::specfun::log_gamma;

const TABLE_PANELS: usize = 50;
const TABLE_NODES: usize = 20;

/// `H(w)` by direct quadrature over the polar angle (n >= 2).
fn h_direct(n: u32, s: f64, w: f64) -> f64 {
    debug_assert!(n >= 2 && w > 0.0 && w <= 1.0);
    let nf = f64::from(n);
    let beta = 0.5 * (nf + 2.0 * s);
    let tau = (1.0 - w).max(0.0).sqrt();
    let delta = w / (1.0 + tau);
    let log_w = (1.0 + 2.0 * s) * w.ln();
    let integrand = |theta: f64| {
        let half = (0.5 * theta).sin();
        let base = delta * delta + 4.0 * tau * half * half;
        let mut e = log_w - beta * base.ln();
        if n > 2 {
            e += (nf - 2.0) * theta.sin().ln();
        }
        e.exp()
    };
    // Peak width of the integrand near θ = 0.
    let width = if tau > 0.0 { delta / tau.sqrt() } else { PI };
    let rule = gauss(20);
    let mut acc = 0.0;
    let mut lo = 0.0;
    let mut hi = width.min(PI);
    loop {
        acc += rule.integrate(lo, hi, integrand);
        if hi >= PI {
            break;
        }
        lo = hi;
        hi = (2.0 * hi).min(PI);
    }
    let slice = sphere_area::<f64>(n - 1);
    slice * acc / sphere_area::<f64>(n)
}

/// `H` at `w → 0`: Γ(n/2)Γ(1+2s) / (Γ(n/2+s)Γ(1+s)).
pub fn h_at_diagonal(p: &ProblemParams<f64>) -> f64 {
    let (n, s) = (p.dim(), p.s());
    (log_gamma(0.5 * n).unwrap() + log_gamma(1.0 + 2.0 * s).unwrap()
        - log_gamma(0.5 * n + s).unwrap()
        - log_gamma(1.0 + s).unwrap())
    .exp()
}

/// Derivative `dH/dz` at `z = τ² = 1`, finite for every `s > 0`.
fn h_slope_at_diagonal(p: &ProblemParams<f64>) -> f64 {
    let (n, s) = (p.dim(), p.s());
    let a = -s;
    let b = 0.5 * n - s - 1.0;
    let c = 0.5 * n;
    // a b / c · Γ(c+1) Γ(2s) / (Γ(c−a) Γ(c+1−b))
    let gauss_sum = (log_gamma(c + 1.0).unwrap() + log_gamma(2.0 * s).unwrap()
        - log_gamma(c + s).unwrap()
        - log_gamma(1.0 + s).unwrap())
    .exp();
    a * b / c * gauss_sum
}

/// `k(r, ρ)` by direct quadrature, without the interpolation table.
///
/// Fails when `r = ρ`, where the kernel is singular; the principal value
/// is handled by the operator assembly.
pub fn angular_kernel(p: &ProblemParams<f64>, r: f64, rho: f64) -> Result<f64> {
    if !(r >= 0.0 && rho > 0.0 && r.is_finite() && rho.is_finite()) {
        return Err(Error::Domain(format!("kernel needs r >= 0 and rho > 0, got ({r}, {rho})")));
    }
    if r == rho {
        return Err(Error::Domain(format!("kernel is singular at r = rho = {r}")));
    }
    let n = p.n();
    let s = p.s();
    let nf = f64::from(n);
    if n == 1 {
        return Ok((r - rho).abs().powf(-1.0 - 2.0 * s) + (r + rho).powf(-1.0 - 2.0 * s));
    }
    let big = r.max(rho);
    let small = r.min(rho);
    let w = (big - small) * (big + small) / (big * big);
    let h = h_direct(n, s, w);
    Ok(sphere_area::<f64>(n) * big.powf(-nf - 2.0 * s) * w.powf(-1.0 - 2.0 * s) * h)
}

/// Tabulated kernel used by the assembly.
#[derive(Debug, Clone)]
pub struct KernelTable {
    n: u32,
    s: f64,
    sphere: f64,
    /// Panel k covers w in [2^{-k-1}, 2^{-k}].
    panels: Vec<ChebPanel>,
    /// Leading near-diagonal coefficient of `k(r,ρ) ρ^{n−1}` in `|ρ − r|^{−1−2s}`.
    diag_coeff: f64,
    /// `H'(z=1) / H(z=1)`.
    diag_log_slope: f64,
}

impl KernelTable {
    pub fn new(p: &ProblemParams<f64>) -> Self {
        let (n, s) = (p.n(), p.s());
        let panels = if n == 1 {
            Vec::new()
        } else {
            (0..TABLE_PANELS)
                .map(|k| {
                    let hi = 0.5f64.powi(k as i32);
                    ChebPanel::new(0.5 * hi, hi, TABLE_NODES, |w| h_direct(n, s, w))
                })
                .collect()
        };
        let sphere = sphere_area::<f64>(n);
        let h1 = h_at_diagonal(p);
        Self {
            n,
            s,
            sphere,
            panels,
            diag_coeff: sphere * h1 * 2f64.powf(-1.0 - 2.0 * s),
            diag_log_slope: h_slope_at_diagonal(p) / h1,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// |S^{n−1}|
    pub fn sphere(&self) -> f64 {
        self.sphere
    }

    /// Interpolated `H(w)`.
    pub fn h(&self, w: f64) -> f64 {
        if self.n == 1 {
            return f64::NAN;
        }
        let floor = 0.5f64.powi(TABLE_PANELS as i32);
        let w = w.clamp(floor, 1.0);
        let k = ((-w.log2()).floor() as usize).min(TABLE_PANELS - 1);
        self.panels[k].eval(w)
    }

    /// `k(r, ρ)`; infinite on the diagonal.
    #[inline]
    pub fn angular(&self, r: f64, rho: f64) -> f64 {
        let e = -1.0 - 2.0 * self.s;
        if self.n == 1 {
            return (r - rho).abs().powf(e) + (r + rho).powf(e);
        }
        let big = r.max(rho);
        let small = r.min(rho);
        let w = (big - small) * (big + small) / (big * big);
        self.sphere * big.powf(-f64::from(self.n) - 2.0 * self.s) * w.powf(e) * self.h(w)
    }

    /// The radial kernel `K(r, ρ) = k(r, ρ) ρ^{n−1}`.
    #[inline]
    pub fn radial(&self, r: f64, rho: f64) -> f64 {
        self.angular(r, rho) * rho.powi(self.n as i32 - 1)
    }

    /// Leading coefficient `C` of `K(r, r+t) ≈ C |t|^{−1−2s} (1 + c_± t)`.
    pub fn diag_coeff(&self) -> f64 {
        self.diag_coeff
    }

    /// First-order corrections `(c_+, c_-)` of the near-diagonal expansion at `r > 0`.
    pub fn diag_slopes(&self, r: f64) -> (f64, f64) {
        let nf = f64::from(self.n);
        let q = 1.0 + 2.0 * self.s;
        let h = self.diag_log_slope;
        let plus = 0.5 * q / r - 2.0 * h / r;
        let minus = (nf - 1.0) / r - 0.5 * q / r + 2.0 * h / r;
        (plus, minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(n: u32, s: f64) -> ProblemParams<f64> {
        ProblemParams::new(n, s).unwrap()
    }

    /// Closed form for n = 3: 2π/(rρ(1+2s)) (|r−ρ|^{−1−2s} − (r+ρ)^{−1−2s}).
    fn k3(s: f64, r: f64, rho: f64) -> f64 {
        let e = -1.0 - 2.0 * s;
        2.0 * PI / (r * rho * (1.0 + 2.0 * s)) * ((r - rho).abs().powf(e) - (r + rho).powf(e))
    }

    #[test]
    fn one_dimensional_kernel_is_two_point_sum() {
        let p = pp(1, 0.3);
        let k = angular_kernel(&p, 0.2, 0.7).unwrap();
        let want = 0.5f64.powf(-1.6) + 0.9f64.powf(-1.6);
        assert!((k - want).abs() < 1e-14 * want);
    }

    #[test]
    fn kernel_at_origin_is_constant_integrand() {
        for n in [2, 3, 5, 10] {
            let p = pp(n, 0.4);
            let k = angular_kernel(&p, 0.0, 0.6).unwrap();
            let want = sphere_area::<f64>(n) * 0.6f64.powf(-(n as f64) - 0.8);
            assert!((k - want).abs() < 1e-12 * want, "n = {n}");
        }
    }

    #[test]
    fn matches_closed_form_in_three_dimensions() {
        for &s in &[0.1, 0.5, 0.9] {
            let p = pp(3, s);
            let table = KernelTable::new(&p);
            for &(r, rho) in &[(0.3, 0.7), (0.5, 0.5000001), (0.999, 1.0), (1e-4, 0.9), (0.2, 40.0)] {
                let want = k3(s, r, rho);
                let direct = angular_kernel(&p, r, rho).unwrap();
                let tab = table.angular(r, rho);
                assert!((direct - want).abs() < 1e-11 * want, "direct s={s} {r} {rho}");
                assert!((tab - want).abs() < 1e-11 * want, "table s={s} {r} {rho}");
            }
        }
    }

    #[test]
    fn rejects_diagonal() {
        assert!(angular_kernel(&pp(3, 0.5), 0.4, 0.4).is_err());
        assert!(angular_kernel(&pp(3, 0.5), 0.4, 0.0).is_err());
    }

    #[test]
    fn table_endpoints_match_hypergeometric_values() {
        for (n, s) in [(2, 0.7), (3, 0.7), (10, 0.7), (12, 0.5), (5, 0.3)] {
            let p = pp(n, s);
            let t = KernelTable::new(&p);
            assert!((t.h(1.0) - 1.0).abs() < 1e-13);
            let h1 = h_at_diagonal(&p);
            assert!((t.h(1e-15) - h1).abs() < 1e-12 * h1, "n={n} s={s}");
        }
        // Gauss values at 30 digits.
        assert!((h_at_diagonal(&pp(2, 0.7)) - 1.5045212138628625).abs() < 1e-13);
        assert!((h_at_diagonal(&pp(10, 0.7)) - 0.45237363938041547).abs() < 1e-13);
    }

    #[test]
    fn table_agrees_with_direct_quadrature() {
        for (n, s) in [(2, 0.5), (4, 0.3), (10, 0.9), (12, 0.5)] {
            let p = pp(n, s);
            let t = KernelTable::new(&p);
            for k in 0..200 {
                let w = 10f64.powf(-14.0 * k as f64 / 199.0);
                let a = t.h(w);
                let b = h_direct(n, s, w);
                assert!((a - b).abs() < 1e-12 * b.abs().max(1e-3), "n={n} s={s} w={w}");
            }
        }
    }

    #[test]
    fn symmetric_in_arguments() {
        let p = pp(4, 0.6);
        let t = KernelTable::new(&p);
        for &(r, rho) in &[(0.1, 0.3), (0.5, 0.9), (0.33, 0.34)] {
            let a = t.angular(r, rho);
            let b = t.angular(rho, r);
            assert!((a - b).abs() < 1e-14 * a);
        }
    }

    #[test]
    fn near_diagonal_expansion_is_second_order() {
        for (n, s) in [(1, 0.5), (2, 0.3), (3, 0.7), (5, 0.5), (10, 0.9)] {
            let p = pp(n, s);
            let t = KernelTable::new(&p);
            let r = 0.4;
            let c = t.diag_coeff();
            let (cp, cm) = t.diag_slopes(r);
            let mut prev = f64::INFINITY;
            for &h in &[1e-2, 1e-3, 1e-4] {
                let mut worst: f64 = 0.0;
                for (tt, slope) in [(h, cp), (-h, cm)] {
                    let k = t.radial(r, r + tt);
                    let model = c * tt.abs().powf(-1.0 - 2.0 * s) * (1.0 + slope * tt);
                    worst = worst.max(((k - model) / model).abs());
                }
                // relative remainder is O(h^{min(2, 1+2s)}), so superlinear in h
                assert!(worst < 5.0 * h.powf(1.2), "n={n} s={s} h={h}: {worst}");
                assert!(prev.is_infinite() || prev / worst > 15.0, "n={n} s={s} h={h}");
                prev = worst;
            }
        }
    }

    #[test]
    fn brute_force_sphere_quadrature() {
        // k(r,ρ) for n = 3 by tensor Gauss quadrature over (θ, φ) on S².
        let (s, r, rho) = (0.5, 0.3, 0.7);
        let p = pp(3, s);
        let g = crate::quadrature::GaussLegendre::new(20);
        let mut acc = 0.0;
        let nth = 40;
        for i in 0..nth {
            let a = PI * i as f64 / nth as f64;
            let b = PI * (i + 1) as f64 / nth as f64;
            g.for_each(a, b, |th, wt| {
                g.for_each(0.0, 2.0 * PI, |ph, wp| {
                    let (x, y, z) = (rho * th.cos(), rho * th.sin() * ph.cos(), rho * th.sin() * ph.sin());
                    let d2 = (r - x).powi(2) + y * y + z * z;
                    acc += wt * wp * th.sin() * d2.powf(-(3.0 + 2.0 * s) / 2.0);
                });
            });
        }
        let k = angular_kernel(&p, r, rho).unwrap();
        assert!((k - acc).abs() < 1e-8 * acc, "{k} vs {acc}");
    }
}
