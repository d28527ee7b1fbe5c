//! Gauss–Legendre rules, near-singular panel refinement and piecewise
//! Chebyshev interpolation.

use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    /// Nodes on [-1, 1], increasing.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(q: usize) -> Self {
        assert!(q >= 1);
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let qf = q as f64;
        for i in 0..q.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=q {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if q == 1 { x } else { p1 };
                let pm = if q == 1 { 1.0 } else { p0 };
                dp = qf * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q == 1 {
            nodes[0] = 0.0;
            weights[0] = 2.0;
        }
        Self { nodes, weights }
    }

    /// Visit the mapped nodes and weights on [a, b].
    #[inline]
    pub fn for_each(&self, a: f64, b: f64, mut visit: impl FnMut(f64, f64)) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            visit(mid + half * x, half * w);
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each(a, b, |x, w| acc += w * f(x));
        acc
    }
}

/// Shared rules of the orders used across the crate.
pub fn gauss(q: usize) -> &'static GaussLegendre {
    static G8: OnceLock<GaussLegendre> = OnceLock::new();
    static G12: OnceLock<GaussLegendre> = OnceLock::new();
    static G20: OnceLock<GaussLegendre> = OnceLock::new();
    match q {
        8 => G8.get_or_init(|| GaussLegendre::new(8)),
        12 => G12.get_or_init(|| GaussLegendre::new(12)),
        20 => G20.get_or_init(|| GaussLegendre::new(20)),
        _ => panic!("no shared Gauss rule of order {q}"),
    }
}

const MAX_DEPTH: u32 = 60;

/// Visit quadrature nodes of [a, b] refined toward a nearby singular point.
///
/// Sub-panels are bisected until their distance from `x_star` is at least
/// their width, which keeps the Gauss rule in its fast-convergence regime.
/// A singular point at an endpoint yields geometric grading toward it.
pub fn for_each_near(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    x_star: f64,
    visit: &mut impl FnMut(f64, f64),
) {
    fn go(
        rule: &GaussLegendre,
        a: f64,
        b: f64,
        x_star: f64,
        depth: u32,
        visit: &mut impl FnMut(f64, f64),
    ) {
        let dist = if x_star < a {
            a - x_star
        } else if x_star > b {
            x_star - b
        } else {
            0.0
        };
        if dist >= (b - a) || depth >= MAX_DEPTH {
            rule.for_each(a, b, &mut *visit);
            return;
        }
        let mid = 0.5 * (a + b);
        go(rule, a, mid, x_star, depth + 1, visit);
        go(rule, mid, b, x_star, depth + 1, visit);
    }
    if b > a {
        go(rule, a, b, x_star, 0, visit);
    }
}

pub fn integrate_near(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    x_star: f64,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for_each_near(rule, a, b, x_star, &mut |x, w| acc += w * f(x));
    acc
}

/// Chebyshev interpolant on one panel, evaluated with the barycentric formula.
#[derive(Debug, Clone)]
pub struct ChebPanel {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebPanel {
    pub fn new(lo: f64, hi: f64, m: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        assert!(m >= 2 && hi > lo);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let nodes: Vec<f64> = (0..m)
            .map(|j| mid + half * (PI * j as f64 / (m - 1) as f64).cos())
            .collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        let bary = (0..m)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m - 1 {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        Self {
            lo,
            hi,
            nodes,
            values,
            bary,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &fj), &wj) in self.nodes.iter().zip(&self.values).zip(&self.bary) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for q in [1, 2, 5, 8, 12, 20] {
            let g = GaussLegendre::new(q);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
            let deg = 2 * q - 1;
            let got = g.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "q = {q}");
        }
    }

    #[test]
    fn near_refinement_handles_endpoint_singularity() {
        let g = gauss(12);
        let got = integrate_near(g, 0.0, 1.0, 0.0, |x| x.powf(-0.5));
        assert!((got - 2.0).abs() < 1e-9);
        let got = integrate_near(g, 1.0, 2.0, 1.0 - 1e-9, |x| 1.0 / (x - 1.0 + 1e-9));
        let want = (1.0 + 1e-9_f64).ln() - (1e-9_f64).ln();
        assert!((got - want).abs() < 1e-11 * want);
    }

    #[test]
    fn chebyshev_panel_interpolates_smooth_functions() {
        let p = ChebPanel::new(0.5, 1.0, 20, |x| (3.0 * x).sin());
        for k in 0..50 {
            let x = 0.5 + 0.5 * k as f64 / 49.0;
            assert!((p.eval(x) - (3.0 * x).sin()).abs() < 1e-14);
        }
    }
}
