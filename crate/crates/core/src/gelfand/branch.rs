use crate::constants::ProblemParams;
use crate::fraclap::RadialFunction;

/// Relative decrease of `λ` that marks a fold; smaller changes are rounding.
pub const FOLD_DROP: f64 = 1e-9;

/// A solution `(u, λ)` with `u(0)` fixed.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub profile: RadialFunction,
    pub peak: f64,
    /// Smallest eigenvalue of the linearization `(-Δ)^s − λ e^u`.
    pub stability_eig: f64,
    pub newton_iters: usize,
    /// Max-norm residual, each row relative to the magnitude of its terms.
    pub residual_norm: f64,
}

impl BranchPoint {
    /// Nonincreasing in `r`, and strictly decreasing while above `floor`.
    pub fn is_monotone(&self, floor: f64) -> bool {
        let v = self.profile.values();
        let start = usize::from(self.profile.is_singular_at_origin());
        v[start..].windows(2).all(|w| {
            if w[0] > floor {
                w[1] < w[0]
            } else {
                w[1] <= w[0]
            }
        })
    }

    /// The maximum of the profile sits at the node nearest the origin.
    pub fn peak_at_origin(&self) -> bool {
        let v = self.profile.values();
        v.iter().all(|&x| x <= v[0])
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    params: ProblemParams<f64>,
    points: Vec<BranchPoint>,
    lambda_star_estimate: f64,
    lambda_star_fit: Option<f64>,
    fold_index: Option<usize>,
}

impl Branch {
    /// `points` must be ordered by increasing peak.
    pub fn from_points(params: ProblemParams<f64>, points: Vec<BranchPoint>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[1].peak > w[0].peak));
        let lambda_star_estimate = points.iter().map(|p| p.lambda).fold(0.0, f64::max);
        let fold_index = points
            .windows(2)
            .position(|w| w[1].lambda < w[0].lambda * (1.0 - FOLD_DROP));
        let lambda_star_fit = fold_index
            .filter(|&k| k > 0 && k + 1 < points.len())
            .and_then(|k| parabola_vertex(&points[k - 1..=k + 1]));
        Self {
            params,
            points,
            lambda_star_estimate,
            lambda_star_fit,
            fold_index,
        }
    }

    pub fn params(&self) -> &ProblemParams<f64> {
        &self.params
    }

    pub fn points(&self) -> &[BranchPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The largest computed `λ`.
    pub fn lambda_star_estimate(&self) -> f64 {
        self.lambda_star_estimate
    }

    /// Vertex of the parabola `λ(m)` through the fold point and its neighbours.
    pub fn lambda_star_fit(&self) -> Option<f64> {
        self.lambda_star_fit
    }

    pub fn fold_detected(&self) -> bool {
        self.fold_index.is_some()
    }

    /// Index of the first local maximum of `λ`.
    pub fn fold_index(&self) -> Option<usize> {
        self.fold_index
    }

    /// Points strictly before the fold (all points if there is none).
    pub fn pre_fold(&self) -> &[BranchPoint] {
        &self.points[..self.fold_index.unwrap_or(self.points.len())]
    }

    /// Profiles grow pointwise with `λ` before the fold.
    pub fn pre_fold_ordered(&self) -> bool {
        self.pre_fold().windows(2).all(|w| {
            w[1].profile
                .values()
                .iter()
                .zip(w[0].profile.values())
                .all(|(b, a)| b >= a)
        })
    }
}

fn parabola_vertex(p: &[BranchPoint]) -> Option<f64> {
    let (x0, x1, x2) = (p[0].peak, p[1].peak, p[2].peak);
    let (y0, y1, y2) = (p[0].lambda, p[1].lambda, p[2].lambda);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a < 0.0) {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let xv = -b / (2.0 * a);
    Some(y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1))
}
