//! Diminishing-step asymptotics: under a Robbins–Monro schedule both the
//! deviations and the running weighted measure must die out. The limit
//! statement is not testable at a finite horizon, so the suite checks a
//! 50% first-to-last-quartile drop across analysis intervals.

use std::path::Path;

use anyhow::{bail, Context};
use psgd_core::bounds::BoundConstants;
use psgd_core::engine::{self, TimeGrid};
use psgd_core::flow::{build_jumping_process, StorePolicy};
use psgd_core::stationarity::running_weighted_average;

use crate::config::{RunConfig, ScheduleConfig};
use crate::experiments::shared::{self, CheckResult};
use crate::report::{LinePlot, Reporter};

struct SeedOut {
    interval_max: Vec<f64>,
    running_at_interval_end: Vec<f64>,
}

fn quartile_drop(series: &[f64]) -> (f64, f64) {
    let q = series.len().div_ceil(4);
    let first = series[..q].iter().sum::<f64>() / q as f64;
    let last = series[series.len() - q..].iter().sum::<f64>() / q as f64;
    (first, last)
}

pub fn execute(cfg: &RunConfig, cfg_path: &Path, out: &Path) -> anyhow::Result<Vec<CheckResult>> {
    if !matches!(cfg.schedule, ScheduleConfig::Harmonic { .. }) {
        bail!("invalid config: the Robbins-Monro suite needs a diminishing (harmonic) schedule");
    }
    let problem = cfg.problem(cfg_path)?;
    let schedule = cfg.schedule();
    let grid = TimeGrid::new(&schedule, cfg.steps)?;
    let n = grid.num_steps();
    if grid.num_intervals() < 8 {
        bail!(
            "invalid config: quartile comparison needs at least 8 analysis intervals, got {}",
            grid.num_intervals()
        );
    }
    let x0 = cfg.start(&problem)?;
    // Fixed default substep: the schedule spans decades of alpha, so the
    // alpha-proportional default would spend almost all its work on the
    // tiny late steps that need it least.
    let h = cfg.flow_step.unwrap_or(1e-3);
    let constants = BoundConstants::for_problem(&problem, cfg.assumption(&problem))?;

    let interval_ends: Vec<usize> = (0..grid.num_intervals())
        .map(|i| grid.interval_steps(i).end - 1)
        .collect();

    let runs = engine::run_many_map(
        &problem,
        &schedule,
        n,
        &x0,
        cfg.master_seed,
        cfg.seeds,
        |_, traj| -> anyhow::Result<SeedOut> {
            let jp = build_jumping_process(&problem, &grid, traj, h, StorePolicy::DeviationsOnly)?;
            let gold = shared::goldstein_series(&problem, &grid, traj, &jp.radii)?;
            let squares: Vec<f64> = gold.iter().map(|g| g * g).collect();
            let running = running_weighted_average(grid.alphas(), &squares);
            let interval_max = (0..grid.num_intervals())
                .map(|i| {
                    grid.interval_steps(i)
                        .map(|k| jp.radii[k])
                        .fold(0.0_f64, f64::max)
                })
                .collect();
            Ok(SeedOut {
                interval_max,
                running_at_interval_end: interval_ends.iter().map(|&k| running[k]).collect(),
            })
        },
    )?;
    let runs: Vec<SeedOut> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut reporter = Reporter::new(out, cfg.resolved_json(&problem))
        .with_context(|| format!("cannot write to {}", out.display()))?;
    reporter.note("constants", shared::constants_json(&constants));

    let (max_mean, max_se) = shared::mean_se_across(
        &runs.iter().map(|r| r.interval_max.clone()).collect::<Vec<_>>(),
    );
    let (run_mean, run_se) = shared::mean_se_across(
        &runs
            .iter()
            .map(|r| r.running_at_interval_end.clone())
            .collect::<Vec<_>>(),
    );

    let (dev_first, dev_last) = quartile_drop(&max_mean);
    reporter.check(
        "interval_max_deviations_drop",
        dev_last <= 0.5 * dev_first,
        format!("first-quartile mean {dev_first:.4e}, last-quartile mean {dev_last:.4e}"),
    );
    let (m_first, m_last) = quartile_drop(&run_mean);
    reporter.check(
        "running_weighted_measure_drops",
        m_last <= 0.5 * m_first,
        format!("first-quartile mean {m_first:.4e}, last-quartile mean {m_last:.4e}"),
    );

    let breaks = grid.breaks();
    let rows: Vec<Vec<f64>> = (0..grid.num_intervals())
        .map(|i| {
            vec![
                i as f64,
                breaks[i],
                max_mean[i],
                max_se[i],
                run_mean[i],
                run_se[i],
            ]
        })
        .collect();
    reporter.csv(
        "intervals.csv",
        &[
            "interval",
            "start_time",
            "mean_interval_max_b",
            "se_max_b",
            "mean_running_weighted_measure",
            "se_running",
        ],
        &rows,
    )?;
    let plot = LinePlot::new("Robbins-Monro decay", "interval", "value")
        .with_series(
            "interval max b_k",
            rows.iter().map(|r| (r[0], r[2])).collect(),
        )
        .with_series(
            "running weighted squared measure",
            rows.iter().map(|r| (r[0], r[4])).collect(),
        );
    reporter.svg("decay.svg", &plot)?;

    reporter.finish().map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;
    use psgd_core::problems::{NoiseSpec, Objective, Problem};
    use psgd_core::geometry::ConvexSet;
    use psgd_core::linalg::Mat;
    use psgd_core::stationarity;

    #[test]
    fn constant_schedule_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(
            &path,
            r#"{
                "problem": {"kind": "example41"},
                "schedule": {"kind": "constant", "alpha": 0.1},
                "steps": 100
            }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let err = execute(&cfg, &path, &dir.path().join("out")).unwrap_err();
        assert!(err.to_string().contains("harmonic"), "{err}");
    }

    #[test]
    fn decay_on_a_smooth_box_problem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(
            &path,
            r#"{
                "problem": {
                    "kind": "additive",
                    "set": {"kind": "box", "lower": [-1.0, -1.0], "upper": [1.0, 1.0]},
                    "objective": {
                        "kind": "cosine_quadratic",
                        "p": [[0.2, 0.0], [0.0, 0.2]],
                        "q": [0.05, -0.03],
                        "amplitude": 0.15,
                        "frequency": 3.141592653589793
                    },
                    "noise": {"kind": "gaussian", "sigma_hat": 0.5}
                },
                "schedule": {"kind": "harmonic", "a": 1.0, "b": 2.0},
                "steps": 20000,
                "x0": [0.5, 0.5],
                "seeds": 10,
                "master_seed": 1
            }"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let out = dir.path().join("out");
        let checks = execute(&cfg, &path, &out).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        assert!(out.join("intervals.csv").exists());
        assert!(out.join("decay.svg").exists());
    }

    #[test]
    fn zero_noise_weighted_measure_reaches_zero() {
        // Deterministic descent on a strongly convex quadratic: with the
        // harmonic schedule the weighted squared measure decays like the
        // plain gradient method's.
        let problem = Problem::additive(
            ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap(),
            Objective::Quadratic {
                p: Mat::from_rows(&[vec![1.0]]).unwrap(),
                q: vec![-0.3],
            },
            NoiseSpec::Zero,
        )
        .unwrap();
        let schedule = engine::StepSchedule::Harmonic { a: 1.0, b: 2.0 };
        let n = 5000;
        let grid = TimeGrid::new(&schedule, n).unwrap();
        let traj = engine::run_psgd(&problem, &schedule, n, &[0.0], 1).unwrap();
        let jp = build_jumping_process(&problem, &grid, &traj, 1e-3, StorePolicy::DeviationsOnly)
            .unwrap();
        let gold = shared::goldstein_series(&problem, &grid, &traj, &jp.radii).unwrap();
        let squares: Vec<f64> = gold.iter().map(|g| g * g).collect();
        let final_avg = stationarity::weighted_average(grid.alphas(), &squares);
        assert!(final_avg < 1e-2, "weighted squared measure {final_avg}");
        // The terminal iterate is essentially stationary.
        assert!(gold[n - 1] < 1e-3, "final measure {}", gold[n - 1]);
    }
}
