//! Two-panel reproduction of the introductory figure.
//!
//! Left: two runs on a non-convex 2-D problem, started at a basin
//! boundary so the noise decides which stationary point each run reaches,
//! together with the interval-restarted flow segments. Right: a scalar
//! convex run whose final iterate the deviation bound pins near the
//! minimizer. The original figure fixes neither the objective nor the
//! noise scale; the choices here are built-in and echoed in the summary.

use std::path::Path;

use anyhow::{bail, Context};
use psgd_core::bounds::BoundConstants;
use psgd_core::engine::{self, TimeGrid, Trajectory};
use psgd_core::flow::{build_jumping_process, JumpingProcess, StorePolicy};
use psgd_core::linalg;
use psgd_core::problems::Problem;
use psgd_core::seeds;

use crate::config::{RunConfig, ScheduleConfig};
use crate::experiments::shared::{self, CheckResult};
use crate::report::{LinePlot, Reporter};

/// Noise scales for the two fixed panels.
const LEFT_SIGMA: f64 = 0.5;
const RIGHT_SIGMA: f64 = 0.1;
const RIGHT_MINIMIZER: f64 = 0.3;

/// Root of the mean gradient's coordinate `i` on the given bracket: the
/// basin boundary of the double-well drift, found by bisection.
fn coordinate_root(problem: &Problem, i: usize, mut lo: f64, mut hi: f64) -> f64 {
    let g = |t: f64| {
        let mut x = vec![0.0; problem.dim()];
        x[i] = t;
        problem.mean_grad(&x)[i]
    };
    assert!(
        g(lo) * g(hi) < 0.0,
        "bracket must straddle the unstable equilibrium"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn interval_max_radii(grid: &TimeGrid, jp: &JumpingProcess) -> Vec<f64> {
    (0..grid.num_intervals())
        .map(|i| {
            grid.interval_steps(i)
                .map(|k| jp.radii[k])
                .fold(0.0_f64, f64::max)
        })
        .collect()
}

pub fn execute(cfg: &RunConfig, _cfg_path: &Path, out: &Path) -> anyhow::Result<Vec<CheckResult>> {
    let ScheduleConfig::Constant { alpha } = cfg.schedule else {
        bail!("invalid config: the figure uses a constant step schedule");
    };
    let schedule = cfg.schedule();
    let n = cfg.steps;
    let grid = TimeGrid::new(&schedule, n)?;
    let h = cfg.flow_step();
    let stride = n.div_ceil(1000).max(1);

    let left = shared::nonconvex_square(LEFT_SIGMA);
    let right = shared::scalar_quadratic(RIGHT_SIGMA);
    let left_constants = BoundConstants::for_problem(&left, cfg.assumption(&left))?;
    let right_constants = BoundConstants::for_problem(&right, cfg.assumption(&right))?;

    // Both runs start exactly on the basin boundary.
    let x0 = vec![
        coordinate_root(&left, 0, 0.0, 0.5),
        coordinate_root(&left, 1, -0.5, 0.5),
    ];

    let mut reporter = Reporter::new(out, cfg.resolved_json(&left))
        .with_context(|| format!("cannot write to {}", out.display()))?;
    reporter.note("constants_left", shared::constants_json(&left_constants));
    reporter.note("constants_right", shared::constants_json(&right_constants));
    reporter.note(
        "provenance",
        serde_json::json!({
            "note": "the source figure leaves the objective and noise scale open; \
                     both panels use the built-in problems recorded here",
            "left": {"objective": "cosine-quadratic on [-1,1]^2", "sigma_hat": LEFT_SIGMA,
                      "start": x0},
            "right": {"objective": "0.5 (x - 0.3)^2 on [-1,1]", "sigma_hat": RIGHT_SIGMA},
        }),
    );

    // Left panel: two seeds, same start.
    let mut trajs: Vec<Trajectory> = Vec::new();
    let mut jps: Vec<JumpingProcess> = Vec::new();
    for r in 0..2 {
        let seed = seeds::run_seed(cfg.master_seed, r);
        let traj = engine::run_psgd(&left, &schedule, n, &x0, seed)?;
        let jp = build_jumping_process(&left, &grid, &traj, h, StorePolicy::Strided(stride))?;
        trajs.push(traj);
        jps.push(jp);
    }

    let divergence = linalg::dist(trajs[0].final_iterate(), trajs[1].final_iterate());
    let needed = 0.1 * left.set().diameter();
    reporter.check(
        "runs_diverge",
        divergence >= needed,
        format!("final iterates are {divergence:.3} apart, requires >= {needed:.3}"),
    );

    for (r, jp) in jps.iter().enumerate() {
        let maxima = interval_max_radii(&grid, jp);
        let mut within = 0usize;
        for (i, &m) in maxima.iter().enumerate() {
            let steps = grid.interval_steps(i);
            let hi = left_constants
                .interval_deviation_tail_bound(&grid.alphas()[steps], 0.05)?;
            if m <= hi {
                within += 1;
            }
        }
        let frac = within as f64 / maxima.len() as f64;
        reporter.check(
            &format!("deviations_within_tail_bound_run{r}"),
            frac >= 0.95,
            format!(
                "{within}/{} intervals have max b_k <= h_i(0.05)",
                maxima.len()
            ),
        );
    }

    let feasible = trajs.iter().all(|t| {
        t.xs.iter()
            .all(|x| left.set().violation(x) <= 1e-9)
    });
    reporter.check(
        "trajectories_feasible",
        feasible,
        "every iterate of both runs lies in the constraint set".into(),
    );

    // Break markers come from the same grid that the flow restarts use.
    let breaks = grid.breaks();
    let marker_rows: Vec<Vec<f64>> = breaks
        .iter()
        .enumerate()
        .map(|(i, &s)| vec![i as f64, s])
        .collect();
    reporter.csv("breaks.csv", &["interval", "start_time"], &marker_rows)?;
    let segment_starts: Vec<f64> = grid
        .break_indices()
        .iter()
        .take(grid.num_intervals())
        .map(|&k| grid.taus()[k])
        .collect();
    reporter.check(
        "break_markers_match_grid",
        segment_starts == breaks[..grid.num_intervals()],
        "flow restart times equal the emitted break markers".into(),
    );

    // Left artifacts: iterate paths plus restarted flow segments.
    let idx = shared::stride_indices(n + 1, 2000);
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&k| {
            let t = if k == 0 { 0.0 } else { grid.taus()[k - 1] + grid.alphas()[k - 1] };
            vec![
                t,
                trajs[0].xs[k][0],
                trajs[0].xs[k][1],
                trajs[1].xs[k][0],
                trajs[1].xs[k][1],
            ]
        })
        .collect();
    reporter.csv(
        "left_trajectories.csv",
        &["tau", "run0_x1", "run0_x2", "run1_x1", "run1_x2"],
        &rows,
    )?;
    let mut flow_rows = Vec::new();
    for (r, jp) in jps.iter().enumerate() {
        for (t, p) in jp.flow_times.iter().zip(&jp.flow_points) {
            flow_rows.push(vec![r as f64, *t, p[0], p[1]]);
        }
    }
    reporter.csv("left_flow.csv", &["run", "time", "y1", "y2"], &flow_rows)?;

    let mut plot = LinePlot::new("Two runs from one start", "time", "x1")
        .with_vlines(breaks.clone());
    for (r, traj) in trajs.iter().enumerate() {
        let pts: Vec<(f64, f64)> = idx
            .iter()
            .map(|&k| {
                let t = if k == 0 { 0.0 } else { grid.taus()[k - 1] + grid.alphas()[k - 1] };
                (t, traj.xs[k][0])
            })
            .collect();
        plot = plot.with_series(&format!("run {r}"), pts);
    }
    for (r, jp) in jps.iter().enumerate() {
        // Split the stored flow into per-interval segments so the restart
        // jumps stay visible.
        let mut boundary = 1usize;
        let mut seg: Vec<(f64, f64)> = Vec::new();
        let mut first = true;
        for (t, p) in jp.flow_times.iter().zip(&jp.flow_points) {
            while boundary < breaks.len() && *t >= breaks[boundary] - 1e-12 {
                if seg.len() > 1 {
                    let name = if first { format!("flow segments, run {r}") } else { String::new() };
                    plot = plot.with_dashed_series(&name, std::mem::take(&mut seg));
                    first = false;
                } else {
                    seg.clear();
                }
                boundary += 1;
            }
            seg.push((*t, p[0]));
        }
        if seg.len() > 1 {
            let name = if first { format!("flow segments, run {r}") } else { String::new() };
            plot = plot.with_dashed_series(&name, seg);
        }
    }
    reporter.svg("left.svg", &plot)?;

    // Right panel: single scalar run against its restarted flow.
    let right_x0 = vec![0.0];
    let rtraj = engine::run_psgd(&right, &schedule, n, &right_x0, seeds::run_seed(cfg.master_seed, 2))?;
    let rjp = build_jumping_process(&right, &grid, &rtraj, h, StorePolicy::Strided(stride))?;
    let tolerance = 5.0 * alpha.sqrt() * (right_constants.c1 + right_constants.c2);
    let err = (rtraj.final_iterate()[0] - RIGHT_MINIMIZER).abs();
    reporter.check(
        "right_final_iterate_near_minimizer",
        err <= tolerance,
        format!("|x_N - {RIGHT_MINIMIZER}| = {err:.4e} <= 5 sqrt(alpha) (c1 + c2) = {tolerance:.4e}"),
    );

    let rrows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&k| {
            let t = if k == 0 { 0.0 } else { grid.taus()[k - 1] + grid.alphas()[k - 1] };
            vec![t, rtraj.xs[k][0]]
        })
        .collect();
    reporter.csv("right_trajectory.csv", &["tau", "x"], &rrows)?;
    let rplot = LinePlot::new("Scalar convex run", "time", "x")
        .with_series(
            "iterates",
            rrows.iter().map(|r| (r[0], r[1])).collect(),
        )
        .with_dashed_series(
            "restarted flow",
            rjp.flow_times.iter().zip(&rjp.flow_points).map(|(t, p)| (*t, p[0])).collect(),
        )
        .with_vlines(breaks);
    reporter.svg("right.svg", &rplot)?;

    reporter.finish().map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basin_boundary_root_is_unstable_zero() {
        let p = shared::nonconvex_square(0.5);
        let r0 = coordinate_root(&p, 0, 0.0, 0.5);
        let mut x = vec![0.0, 0.0];
        x[0] = r0;
        assert!(p.mean_grad(&x)[0].abs() < 1e-12);
        assert!(r0 > 0.0 && r0 < 0.2, "root {r0}");
    }

    #[test]
    fn panels_pass_on_the_reference_settings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(
            &path,
            r#"{
                "problem": {"kind": "example41"},
                "schedule": {"kind": "constant", "alpha": 0.0001},
                "steps": 100000,
                "master_seed": 0
            }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let out = dir.path().join("out");
        let checks = execute(&cfg, &path, &out).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        assert!(out.join("left.svg").exists());
        assert!(out.join("right.svg").exists());
        assert!(out.join("breaks.csv").exists());
    }

    #[test]
    fn harmonic_schedule_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(
            &path,
            r#"{
                "problem": {"kind": "example41"},
                "schedule": {"kind": "harmonic", "a": 1.0, "b": 2.0},
                "steps": 100
            }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let err = execute(&cfg, &path, &dir.path().join("out")).unwrap_err();
        assert!(err.to_string().contains("constant step"));
    }
}
