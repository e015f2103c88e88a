//! Stationarity measures for constrained problems.
//!
//! Four ways to quantify how close a feasible point is to stationarity,
//! which genuinely disagree on non-convex or even linear constrained
//! problems (the scalar example from [`Problem::example41`] keeps its
//! gradient-mapping measure bounded below by 1/2 in expectation while the
//! Goldstein measure at a shrinking radius vanishes at the boundary):
//!
//! * Goldstein: distance from `-grad fbar(x)` to the Goldstein cone of the
//!   indicator at radius `eps`;
//! * gradient mapping: `||x - Pi_X(x - alpha g)|| / alpha`;
//! * tangent residual: `||Pi_{T_X(x)}(-grad fbar(x))||`;
//! * Moreau: `||x - prox_{lambda}(x)|| / lambda` where the prox is taken
//!   for `fbar` plus the indicator of the set, requiring
//!   `lambda * L < 1` for the subproblem to remain strongly convex.

use thiserror::Error;

use crate::geometry::{ConvexSet, GeometryError};
use crate::linalg;
use crate::problems::Problem;

#[derive(Debug, Error)]
pub enum StationarityError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("prox computation did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
}

/// Goldstein stationarity measure `dist(-grad fbar(x), G_eps(x))`.
pub fn goldstein_measure(
    problem: &Problem,
    x: &[f64],
    eps: f64,
) -> Result<f64, StationarityError> {
    let v = linalg::scaled(&problem.mean_grad(x), -1.0);
    Ok(problem.set().goldstein_distance(x, eps, &v)?)
}

/// Goldstein measure along a trajectory with a per-point radius.
pub fn goldstein_along(
    problem: &Problem,
    xs: &[Vec<f64>],
    radius_at: impl Fn(usize) -> f64,
) -> Result<Vec<f64>, StationarityError> {
    xs.iter()
        .enumerate()
        .map(|(k, x)| goldstein_measure(problem, x, radius_at(k)))
        .collect()
}

/// Gradient-mapping norm `||x - Pi_X(x - alpha g)|| / alpha` for a gradient
/// sample `g` (pass the mean gradient for the deterministic variant).
pub fn gradient_mapping(
    set: &ConvexSet,
    x: &[f64],
    g: &[f64],
    alpha: f64,
) -> Result<f64, StationarityError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(StationarityError::InvalidParameter(format!(
            "gradient mapping needs alpha > 0, got {alpha}"
        )));
    }
    let shifted: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - alpha * gi).collect();
    let p = set.project(&shifted);
    Ok(linalg::dist(x, &p) / alpha)
}

/// `||Pi_{T_X(x)}(-grad fbar(x))||`, the projected mean-gradient residual.
pub fn tangent_residual(problem: &Problem, x: &[f64]) -> Result<f64, StationarityError> {
    let v = linalg::scaled(&problem.mean_grad(x), -1.0);
    let t = problem.set().tangent_cone_project(x, &v)?;
    Ok(linalg::norm(&t))
}

/// Moreau-envelope gradient norm `||x - prox(x)|| / lambda` where
/// `prox(x) = argmin_{y in X} fbar(y) + ||y - x||^2 / (2 lambda)`.
///
/// The subproblem is solved by projected gradient descent; it is strongly
/// convex precisely when `lambda * L < 1` for the gradient Lipschitz
/// constant `L` of the mean objective, which is enforced up front.
pub fn moreau_grad_norm(
    problem: &Problem,
    x: &[f64],
    lambda: f64,
) -> Result<f64, StationarityError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(StationarityError::InvalidParameter(format!(
            "moreau radius must be positive, got {lambda}"
        )));
    }
    let smooth = problem.mean_grad_lipschitz();
    if lambda * smooth >= 1.0 {
        return Err(StationarityError::InvalidParameter(format!(
            "lambda * L = {} >= 1; the prox subproblem is not strongly convex",
            lambda * smooth
        )));
    }
    let set = problem.set();
    let step = 1.0 / (smooth + 1.0 / lambda);
    let tol = 1e-13 * linalg::norm(x).max(1.0);
    let max_iter = 100_000;
    let mut y = set.project(x);
    for _ in 0..max_iter {
        let mut g = problem.mean_grad(&y);
        for i in 0..g.len() {
            g[i] += (y[i] - x[i]) / lambda;
        }
        let shifted: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - step * gi).collect();
        let next = set.project(&shifted);
        let moved = linalg::dist(&next, &y);
        y = next;
        if moved <= tol {
            return Ok(linalg::dist(x, &y) / lambda);
        }
    }
    Err(StationarityError::NonConvergence { iterations: max_iter })
}

/// `sum_k w_k v_k / sum_k w_k`.
pub fn weighted_average(weights: &[f64], values: &[f64]) -> f64 {
    assert_eq!(weights.len(), values.len(), "weight/value length mismatch");
    let mut num = linalg::KahanSum::default();
    let mut den = linalg::KahanSum::default();
    for (w, v) in weights.iter().zip(values) {
        num.add(w * v);
        den.add(*w);
    }
    num.value() / den.value()
}

/// Prefix weighted averages: entry `k` averages the first `k + 1` terms.
pub fn running_weighted_average(weights: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(weights.len(), values.len(), "weight/value length mismatch");
    let mut num = linalg::KahanSum::default();
    let mut den = linalg::KahanSum::default();
    weights
        .iter()
        .zip(values)
        .map(|(w, v)| {
            num.add(w * v);
            den.add(*w);
            num.value() / den.value()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexSet;
    use crate::problems::{NoiseSpec, Objective};
    use crate::linalg::Mat;

    #[test]
    fn gradient_mapping_on_the_scalar_example() {
        let p = Problem::example41();
        let set = p.set();
        // Interior: the mapping returns the raw gradient magnitude.
        let g_up = p.grad(&[0.5], &[2.0]); // +1
        assert!((gradient_mapping(set, &[0.5], &g_up, 0.1).unwrap() - 1.0).abs() < 1e-12);
        let g_dn = p.grad(&[0.5], &[-2.0]); // -3
        assert!((gradient_mapping(set, &[0.5], &g_dn, 0.1).unwrap() - 3.0).abs() < 1e-12);
        // At the right endpoint the outward sample is absorbed by the
        // projection, so the two equally likely values are 0 and 1 and the
        // expected measure is 1/2.
        assert_eq!(gradient_mapping(set, &[1.0], &p.grad(&[1.0], &[-2.0]), 0.1).unwrap(), 0.0);
        assert!((gradient_mapping(set, &[1.0], &p.grad(&[1.0], &[2.0]), 0.1).unwrap() - 1.0).abs() < 1e-12);
        assert!(gradient_mapping(set, &[1.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn goldstein_measure_vanishes_only_near_the_active_boundary() {
        let p = Problem::example41();
        // -grad fbar = +1 everywhere.
        assert_eq!(goldstein_measure(&p, &[1.0], 0.0).unwrap(), 0.0);
        assert_eq!(goldstein_measure(&p, &[0.92], 0.1).unwrap(), 0.0);
        assert_eq!(goldstein_measure(&p, &[0.85], 0.1).unwrap(), 1.0);
        assert_eq!(goldstein_measure(&p, &[0.0], 0.5).unwrap(), 1.0);
        let along = goldstein_along(&p, &[vec![0.85], vec![0.92]], |_| 0.1).unwrap();
        assert_eq!(along, vec![1.0, 0.0]);
    }

    #[test]
    fn tangent_residual_cases() {
        let p = Problem::example41();
        assert_eq!(tangent_residual(&p, &[1.0]).unwrap(), 0.0);
        assert_eq!(tangent_residual(&p, &[0.3]).unwrap(), 1.0);
        assert_eq!(tangent_residual(&p, &[-1.0]).unwrap(), 1.0);
    }

    /// Brute-force prox by scanning a fine grid over the interval.
    fn prox_oracle(
        value: impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        x: f64,
        lambda: f64,
    ) -> f64 {
        let steps = 2_000_000;
        let mut best = (f64::INFINITY, lo);
        for k in 0..=steps {
            let y = lo + (hi - lo) * k as f64 / steps as f64;
            let obj = value(y) + (y - x).powi(2) / (2.0 * lambda);
            if obj < best.0 {
                best = (obj, y);
            }
        }
        best.1
    }

    #[test]
    fn moreau_measure_zero_when_point_is_the_prox() {
        // Indicator of [1, 2] alone (zero objective): prox = projection,
        // so the measure at x = 1 with lambda = 1 vanishes.
        let set = ConvexSet::new_box(vec![1.0], vec![2.0]).unwrap();
        let p = Problem::additive(set, Objective::Linear { g: vec![0.0] }, NoiseSpec::Zero)
            .unwrap();
        let measure = moreau_grad_norm(&p, &[1.0], 1.0).unwrap();
        assert!(measure.abs() < 1e-10, "measure {measure}");
        let oracle = prox_oracle(|_| 0.0, 1.0, 2.0, 1.0, 1.0);
        assert!((oracle - 1.0).abs() < 1e-5);
    }

    #[test]
    fn moreau_measure_matches_grid_oracle_with_curvature() {
        let set = ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap();
        let mut m = Mat::zeros(1, 1);
        m.set(0, 0, 1.0);
        let p = Problem::additive(
            set,
            Objective::Quadratic { p: m, q: vec![0.0] },
            NoiseSpec::Zero,
        )
        .unwrap();
        // argmin 0.5 y^2 + (y - 0.8)^2 / (2 * 0.5) = 8/15, inside the box.
        let measure = moreau_grad_norm(&p, &[0.8], 0.5).unwrap();
        let expected = (0.8 - 8.0 / 15.0) / 0.5;
        assert!((measure - expected).abs() < 1e-9, "measure {measure}");
        let oracle = prox_oracle(|y| 0.5 * y * y, -1.0, 1.0, 0.8, 0.5);
        assert!((oracle - 8.0 / 15.0).abs() < 1e-5);
        // lambda * L >= 1 must be rejected.
        assert!(moreau_grad_norm(&p, &[0.8], 1.0).is_err());
    }

    #[test]
    fn weighted_averages() {
        let w = [1.0, 3.0];
        let v = [2.0, 6.0];
        assert_eq!(weighted_average(&w, &v), 5.0);
        assert_eq!(running_weighted_average(&w, &v), vec![2.0, 5.0]);
    }
}
