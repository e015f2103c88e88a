//! Plumbing shared across experiment suites: standard test problems,
//! per-trajectory series, and the pass/fail record each suite returns.

use psgd_core::bounds::BoundConstants;
use psgd_core::engine::{TimeGrid, Trajectory};
use psgd_core::geometry::ConvexSet;
use psgd_core::linalg::{self, Mat};
use psgd_core::problems::{NoiseSpec, Objective, Problem};
use psgd_core::stationarity;

/// One named check; suites return a list of these and the binary turns
/// them into PASS/FAIL lines and the process exit code.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

pub fn print_results(results: &[CheckResult]) -> bool {
    let mut all = true;
    for r in results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {} — {}", r.name, r.detail);
        all &= r.passed;
    }
    all
}

/// Smooth non-convex objective on the square [-1,1]^2 used by the figure
/// and rate suites: convex quadratic plus a cosine ripple.
pub fn nonconvex_square(sigma: f64) -> Problem {
    let set = ConvexSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let objective = Objective::CosineQuadratic {
        p: Mat::from_rows(&[vec![0.2, 0.0], vec![0.0, 0.2]]).unwrap(),
        q: vec![0.05, -0.03],
        amplitude: 0.15,
        frequency: std::f64::consts::PI,
    };
    Problem::additive(set, objective, NoiseSpec::Gaussian { sigma_hat: sigma }).unwrap()
}

/// Scalar quadratic on [-1,1] with Gaussian noise; minimizer at 0.3 is
/// interior, so the stationarity measure really has to shrink.
pub fn scalar_quadratic(sigma: f64) -> Problem {
    let set = ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap();
    let objective = Objective::Quadratic {
        p: Mat::from_rows(&[vec![1.0]]).unwrap(),
        q: vec![-0.3],
    };
    Problem::additive(set, objective, NoiseSpec::Gaussian { sigma_hat: sigma }).unwrap()
}

/// Realized gradient-mapping norms `||x_k - x_{k+1}|| / alpha_k`; the
/// projected step already encodes the sampled gradient, so no recompute.
pub fn stochastic_gm_series(grid: &TimeGrid, traj: &Trajectory) -> Vec<f64> {
    (0..grid.num_steps())
        .map(|k| linalg::dist(&traj.xs[k], &traj.xs[k + 1]) / grid.alphas()[k])
        .collect()
}

/// Goldstein measure along the first `N` iterates at per-step radii.
pub fn goldstein_series(
    problem: &Problem,
    grid: &TimeGrid,
    traj: &Trajectory,
    radii: &[f64],
) -> Result<Vec<f64>, stationarity::StationarityError> {
    stationarity::goldstein_along(problem, &traj.xs[..grid.num_steps()], |k| radii[k])
}

/// Step-weighted mean of the squared values (the theorem's left side).
pub fn weighted_square_mean(alphas: &[f64], values: &[f64]) -> f64 {
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    stationarity::weighted_average(alphas, &squares)
}

/// Column-wise mean and standard error across per-seed series.
pub fn mean_se_across(series: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = series.len();
    assert!(n > 0, "no series");
    let len = series[0].len();
    let mut mean = vec![0.0; len];
    for s in series {
        assert_eq!(s.len(), len, "ragged series");
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut se = vec![0.0; len];
    if n > 1 {
        for s in series {
            for ((e, v), m) in se.iter_mut().zip(s).zip(&mean) {
                *e += (v - m) * (v - m);
            }
        }
        for e in &mut se {
            *e = (*e / (n as f64 - 1.0) / n as f64).sqrt();
        }
    }
    (mean, se)
}

/// JSON echo of the bound constants for report provenance.
pub fn constants_json(c: &BoundConstants) -> serde_json::Value {
    serde_json::json!({
        "assumption": format!("{:?}", c.assumption),
        "lipschitz": c.lipschitz,
        "grad_bound": c.grad_bound,
        "diameter": c.diameter,
        "inner_radius": c.inner_radius,
        "dim": c.dim,
        "c1": c.c1,
        "c2": c.c2,
        "c3": c.c3,
        "c4": c.c4,
        "c5": c.c5,
        "c7": c.c7,
        "c8": c.c8,
        "c5_prime": c.c5_prime,
        "c6_prime": c.c6_prime,
    })
}

/// Indices `0, stride, 2 stride, ..., last` used to thin emitted series.
pub fn stride_indices(len: usize, target: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let stride = len.div_ceil(target).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}
