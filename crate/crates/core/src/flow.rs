//! Projected gradient flow and the interval-restarted comparison process.
//!
//! The continuous-time object behind the analysis is the projected ODE
//! `dy/dt = Pi_{T_X(y)}(-grad fbar(y))`, integrated here with projected
//! Euler steps `y <- Pi_X(y - h grad fbar(y))` (first-order accurate; the
//! projection absorbs the tangent-cone projection up to `O(h)`).
//!
//! The jumping process restarts the flow from the current iterate at the
//! start of every unit analysis interval and tracks, at each grid time
//! `tau_k`, the deviation `||x_k - y(tau_k)||` between the iterate and the
//! flow of its own interval. The reported radius pads the measured value
//! with an integration-error margin `h (u + ||grad fbar(x_k)||)` and clips
//! at the set diameter, so it remains a usable Goldstein radius for the
//! true flow rather than its numerical approximation.

use thiserror::Error;

use crate::engine::{TimeGrid, Trajectory};
use crate::geometry::GeometryError;
use crate::linalg;
use crate::par;
use crate::problems::Problem;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Samples of a single flow: `points[j]` approximates `y(times[j])`.
#[derive(Clone, Debug)]
pub struct FlowPath {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl FlowPath {
    pub fn final_point(&self) -> &[f64] {
        self.points.last().expect("nonempty path")
    }
}

/// Integrate the projected mean-gradient flow from `y0` over `[0, t_span]`
/// with substep `h` (the last step shrinks to land exactly on `t_span`).
pub fn integrate_projected_ode(
    problem: &Problem,
    y0: &[f64],
    t_span: f64,
    h: f64,
) -> Result<FlowPath, FlowError> {
    if !(t_span.is_finite() && t_span > 0.0) {
        return Err(FlowError::InvalidInput(format!(
            "integration span must be positive, got {t_span}"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(FlowError::InvalidInput(format!(
            "step size must be positive, got {h}"
        )));
    }
    let violation = problem.set().violation(y0);
    if violation > 1e-9 {
        return Err(FlowError::Geometry(GeometryError::PointNotInSet {
            violation,
        }));
    }
    let steps = (t_span / h).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    let mut y = problem.set().project(y0);
    let mut t = 0.0;
    times.push(t);
    points.push(y.clone());
    for _ in 0..steps {
        let dt = h.min(t_span - t);
        y = euler_step(problem, &y, dt);
        t += dt;
        times.push(t);
        points.push(y.clone());
    }
    Ok(FlowPath { times, points })
}

fn euler_step(problem: &Problem, y: &[f64], dt: f64) -> Vec<f64> {
    let g = problem.mean_grad(y);
    let shifted: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - dt * gi).collect();
    problem.set().project(&shifted)
}

/// Time average of the mean objective along a path, by the trapezoid rule.
pub fn mean_value_time_average(problem: &Problem, path: &FlowPath) -> f64 {
    assert!(path.times.len() >= 2, "need at least two samples");
    let mut acc = linalg::KahanSum::default();
    let mut prev_value = problem.mean_value(&path.points[0]);
    for j in 1..path.times.len() {
        let value = problem.mean_value(&path.points[j]);
        let dt = path.times[j] - path.times[j - 1];
        acc.add(0.5 * (prev_value + value) * dt);
        prev_value = value;
    }
    acc.value() / (path.times.last().unwrap() - path.times[0])
}

/// What the jumping process keeps besides the deviations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StorePolicy {
    /// Flow samples at every grid time.
    Full,
    /// Flow samples at interval starts and every `stride`-th grid time.
    Strided(usize),
    /// No flow samples, only deviations (constant memory in the horizon).
    DeviationsOnly,
}

/// Deviation data of the iterates against the interval-restarted flow.
#[derive(Clone, Debug)]
pub struct JumpingProcess {
    /// Padded radii `b_k` for `k = 0..=N`.
    pub radii: Vec<f64>,
    /// Measured deviations `||x_k - y(tau_k)||` without the margin.
    pub raw_deviations: Vec<f64>,
    /// Per-interval maximum of the raw deviations.
    pub interval_max_raw: Vec<f64>,
    /// Stored flow sample times (subset of the grid times, per policy).
    pub flow_times: Vec<f64>,
    /// Stored flow samples, aligned with `flow_times`.
    pub flow_points: Vec<Vec<f64>>,
}

/// Build the jumping process for a realized trajectory.
///
/// Each analysis interval integrates independently (in parallel when the
/// `parallel` feature is on): the flow restarts at the iterate anchoring
/// the interval, and every discrete step of size `alpha_k` advances the
/// flow by `ceil(alpha_k / h)` equal substeps so the flow is sampled at
/// exactly the grid times.
pub fn build_jumping_process(
    problem: &Problem,
    grid: &TimeGrid,
    traj: &Trajectory,
    h: f64,
    policy: StorePolicy,
) -> Result<JumpingProcess, FlowError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(FlowError::InvalidInput(format!(
            "step size must be positive, got {h}"
        )));
    }
    if matches!(policy, StorePolicy::Strided(0)) {
        return Err(FlowError::InvalidInput("stride must be positive".into()));
    }
    let n = grid.num_steps();
    if traj.xs.len() != n + 1 {
        return Err(FlowError::InvalidInput(format!(
            "trajectory has {} points, grid expects {}",
            traj.xs.len(),
            n + 1
        )));
    }
    let diameter = problem.set().diameter();
    let u = problem.grad_bound();

    struct Segment {
        first: usize,
        raw: Vec<f64>,
        stored: Vec<(usize, Vec<f64>)>,
    }

    let segments: Vec<Segment> = par::map_indexed(grid.num_intervals(), |i| {
        let steps = grid.interval_steps(i);
        let last_interval = i + 1 == grid.num_intervals();
        let first = steps.start;
        let mut y = traj.xs[first].clone();
        let mut raw = Vec::with_capacity(steps.len() + 1);
        let mut stored = Vec::new();
        let keep = |k: usize| match policy {
            StorePolicy::Full => true,
            StorePolicy::Strided(s) => k % s == 0,
            StorePolicy::DeviationsOnly => false,
        };
        raw.push(0.0); // the flow restarts exactly at the anchor iterate
        if keep(first) || matches!(policy, StorePolicy::Strided(_)) {
            stored.push((first, y.clone()));
        }
        for k in steps.clone() {
            let alpha = grid.alphas()[k];
            let substeps = (alpha / h).ceil().max(1.0) as usize;
            let dt = alpha / substeps as f64;
            for _ in 0..substeps {
                y = euler_step(problem, &y, dt);
            }
            let grid_point = k + 1;
            // Interval i owns grid points first..steps.end, and the final
            // interval also owns the last grid point N.
            if grid_point < steps.end || (last_interval && grid_point == n) {
                raw.push(linalg::dist(&traj.xs[grid_point], &y));
                if keep(grid_point) {
                    stored.push((grid_point, y.clone()));
                }
            }
        }
        Segment { first, raw, stored }
    });

    let mut raw_deviations = vec![0.0; n + 1];
    let mut interval_max_raw = Vec::with_capacity(segments.len());
    let mut flow_times = Vec::new();
    let mut flow_points = Vec::new();
    for seg in segments {
        let mut max_raw = 0.0_f64;
        for (offset, &d) in seg.raw.iter().enumerate() {
            raw_deviations[seg.first + offset] = d;
            max_raw = max_raw.max(d);
        }
        interval_max_raw.push(max_raw);
        for (k, y) in seg.stored {
            flow_times.push(grid.taus()[k]);
            flow_points.push(y);
        }
    }

    let radii = raw_deviations
        .iter()
        .enumerate()
        .map(|(k, &raw)| {
            if raw == 0.0 {
                return 0.0;
            }
            let grad_norm = linalg::norm(&problem.mean_grad(&traj.xs[k]));
            (raw + h * (u + grad_norm)).min(diameter)
        })
        .collect();

    Ok(JumpingProcess {
        radii,
        raw_deviations,
        interval_max_raw,
        flow_times,
        flow_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_psgd, run_mean_process, StepSchedule};
    use crate::geometry::ConvexSet;
    use crate::linalg::Mat;
    use crate::problems::{NoiseSpec, Objective, Problem};

    #[test]
    fn scalar_example_flow_is_exact() {
        // fbar(y) = -y on [-1, 1]: the flow is y(t) = min(y0 + t, 1), and
        // projected Euler reproduces it exactly for any substep.
        let p = Problem::example41();
        let path = integrate_projected_ode(&p, &[0.0], 2.0, 0.01).unwrap();
        for (t, y) in path.times.iter().zip(&path.points) {
            assert!((y[0] - t.min(1.0)).abs() < 1e-12, "t={t}");
        }
        // Mean objective is non-increasing along the flow.
        let mut prev = f64::INFINITY;
        for y in &path.points {
            let v = p.mean_value(y);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        // Time average of -y(t) = -min(t, 1) over [0, 2]: -(1/2 + 1) / 2.
        let avg = mean_value_time_average(&p, &path);
        assert!((avg + 0.75).abs() < 1e-6, "avg {avg}");
    }

    fn quadratic_interval() -> Problem {
        let set = ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap();
        let mut m = Mat::zeros(1, 1);
        m.set(0, 0, 1.0);
        Problem::additive(
            set,
            Objective::Quadratic { p: m, q: vec![0.0] },
            NoiseSpec::Zero,
        )
        .unwrap()
    }

    #[test]
    fn euler_error_halves_with_the_step() {
        // Interior flow of 0.5 y^2 is y(t) = y0 exp(-t).
        let p = quadratic_interval();
        let exact = 0.8 * (-1.0_f64).exp();
        let err_at = |h: f64| {
            let path = integrate_projected_ode(&p, &[0.8], 1.0, h).unwrap();
            (path.final_point()[0] - exact).abs()
        };
        let e1 = err_at(0.01);
        let e2 = err_at(0.005);
        let ratio = e1 / e2;
        assert!((1.8..=2.2).contains(&ratio), "halving ratio {ratio}");
    }

    #[test]
    fn flow_speed_is_bounded_by_the_gradient_bound() {
        let p = quadratic_interval();
        let h = 0.02;
        let path = integrate_projected_ode(&p, &[0.8], 1.5, h).unwrap();
        for w in path.points.windows(2) {
            assert!(linalg::dist(&w[0], &w[1]) <= p.grad_bound() * h + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = quadratic_interval();
        assert!(integrate_projected_ode(&p, &[0.8], 0.0, 0.01).is_err());
        assert!(integrate_projected_ode(&p, &[0.8], 1.0, -0.1).is_err());
        assert!(integrate_projected_ode(&p, &[3.0], 1.0, 0.1).is_err());
    }

    #[test]
    fn jumping_process_on_the_scalar_example() {
        let p = Problem::example41();
        let schedule = StepSchedule::Constant { alpha: 0.375 };
        let grid = TimeGrid::new(&schedule, 9).unwrap();
        let traj = run_psgd(&p, &schedule, 9, &[0.0], 5).unwrap();
        let jp = build_jumping_process(&p, &grid, &traj, 1e-3, StorePolicy::Full).unwrap();
        assert_eq!(jp.radii.len(), 10);
        assert_eq!(jp.raw_deviations.len(), 10);
        assert_eq!(jp.interval_max_raw.len(), grid.num_intervals());
        // Restart points deviate by zero and radii never exceed the
        // diameter.
        for &k in grid.break_indices() {
            if k < 9 {
                assert_eq!(jp.raw_deviations[k], 0.0);
                assert_eq!(jp.radii[k], 0.0);
            }
        }
        for (&b, &raw) in jp.radii.iter().zip(&jp.raw_deviations) {
            assert!(b <= p.set().diameter() + 1e-12);
            assert!(b >= raw.min(p.set().diameter()));
        }
        // Full policy stores a sample at every grid time.
        assert_eq!(jp.flow_times.len(), 10);
        for (t, tau) in jp.flow_times.iter().zip(grid.taus()) {
            assert_eq!(t, tau);
        }
    }

    #[test]
    fn zero_noise_deviations_shrink_with_alpha() {
        // With no noise the iteration is Euler at step alpha, so the
        // deviation from the fine flow is the Euler gap, O(alpha).
        let p = quadratic_interval();
        let max_raw = |alpha: f64| {
            let n = (2.0 / alpha) as usize;
            let schedule = StepSchedule::Constant { alpha };
            let grid = TimeGrid::new(&schedule, n).unwrap();
            let traj = run_mean_process(&p, &schedule, n, &[0.8]).unwrap();
            let jp = build_jumping_process(&p, &grid, &traj, 1e-5, StorePolicy::DeviationsOnly)
                .unwrap();
            assert!(jp.flow_times.is_empty());
            jp.raw_deviations.iter().fold(0.0_f64, |m, &d| m.max(d))
        };
        let d1 = max_raw(0.1);
        let d2 = max_raw(0.05);
        assert!(d1 < 0.05, "deviation {d1} too large");
        let ratio = d1 / d2;
        assert!((1.6..=2.4).contains(&ratio), "alpha halving ratio {ratio}");
    }

    #[test]
    fn strided_storage_keeps_interval_starts() {
        let p = Problem::example41();
        let schedule = StepSchedule::Constant { alpha: 0.25 };
        let grid = TimeGrid::new(&schedule, 16).unwrap();
        let traj = run_psgd(&p, &schedule, 16, &[0.0], 9).unwrap();
        let jp = build_jumping_process(&p, &grid, &traj, 1e-3, StorePolicy::Strided(8)).unwrap();
        for &k in grid.break_indices() {
            if k < 16 {
                let tau = grid.taus()[k];
                assert!(
                    jp.flow_times.iter().any(|t| (t - tau).abs() < 1e-15),
                    "missing interval start at tau {tau}"
                );
            }
        }
        assert!(jp.flow_times.len() < grid.taus().len());
        assert!(build_jumping_process(&p, &grid, &traj, 1e-3, StorePolicy::Strided(0)).is_err());
    }

    #[test]
    fn deterministic_across_calls() {
        let p = Problem::example41();
        let schedule = StepSchedule::Harmonic { a: 1.0, b: 2.0 };
        let grid = TimeGrid::new(&schedule, 40).unwrap();
        let traj = run_psgd(&p, &schedule, 40, &[0.0], 77).unwrap();
        let a = build_jumping_process(&p, &grid, &traj, 1e-3, StorePolicy::Full).unwrap();
        let b = build_jumping_process(&p, &grid, &traj, 1e-3, StorePolicy::Full).unwrap();
        assert_eq!(a.radii, b.radii);
        assert_eq!(a.flow_points, b.flow_points);
    }
}
