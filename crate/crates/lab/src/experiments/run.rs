//! Generic experiment: fan a configured problem out over seeds, compare
//! the measured deviations and stationarity measures against the bound
//! formulas, and emit the full artifact set.

use std::path::Path;

use anyhow::Context;
use psgd_core::bounds::BoundConstants;
use psgd_core::engine::{self, TimeGrid};
use psgd_core::flow::{build_jumping_process, StorePolicy};
use psgd_core::stationarity;

use crate::config::{MeasureConfig, RunConfig, ScheduleConfig};
use crate::experiments::shared::{self, CheckResult};
use crate::report::{LinePlot, Reporter};
use crate::stats;

struct SeedOut {
    radii: Vec<f64>,
    gold: Vec<f64>,
    gm: Vec<f64>,
    tres: Vec<f64>,
    weighted_sq_gold: f64,
    /// Per requested delta: the plain mean over k of the squared measure
    /// at the fixed high-probability radius (constant schedules only).
    hp_means: Vec<f64>,
    interval_max: Vec<f64>,
}

pub fn execute(cfg: &RunConfig, cfg_path: &Path, out: &Path) -> anyhow::Result<Vec<CheckResult>> {
    let problem = cfg.problem(cfg_path)?;
    let schedule = cfg.schedule();
    let grid = TimeGrid::new(&schedule, cfg.steps)?;
    let x0 = cfg.start(&problem)?;
    let h = cfg.flow_step();
    let constants = BoundConstants::for_problem(&problem, cfg.assumption(&problem))?;
    let measures = cfg.measures();
    let deltas = cfg.deltas();
    let n = grid.num_steps();

    // The high-probability corollary needs a constant step.
    let hp_bounds: Vec<_> = match cfg.schedule {
        ScheduleConfig::Constant { alpha } => deltas
            .iter()
            .map(|&d| constants.uniform_tail_bound(alpha, n, d))
            .collect::<Result<_, _>>()?,
        ScheduleConfig::Harmonic { .. } => Vec::new(),
    };

    let want_gold = measures.contains(&MeasureConfig::Goldstein);
    let want_gm = measures.contains(&MeasureConfig::GradientMapping);
    let want_tres = measures.contains(&MeasureConfig::NormalCone);
    let hp_radii: Vec<f64> = hp_bounds.iter().map(|b| b.radius).collect();

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
            let weighted_sq_gold = shared::weighted_square_mean(grid.alphas(), &gold);
            let gm = if want_gm {
                shared::stochastic_gm_series(&grid, traj)
            } else {
                Vec::new()
            };
            let tres = if want_tres {
                traj.xs[..n]
                    .iter()
                    .map(|x| stationarity::tangent_residual(&problem, x))
                    .collect::<Result<_, _>>()?
            } else {
                Vec::new()
            };
            let hp_means = hp_radii
                .iter()
                .map(|&r| {
                    let series =
                        stationarity::goldstein_along(&problem, &traj.xs[..n], |_| r)?;
                    Ok(series.iter().map(|m| m * m).sum::<f64>() / n as f64)
                })
                .collect::<Result<Vec<f64>, stationarity::StationarityError>>()?;
            Ok(SeedOut {
                radii: jp.radii,
                gold,
                gm,
                tres,
                weighted_sq_gold,
                hp_means,
                interval_max: jp.interval_max_raw,
            })
        },
    )?;
    let runs: Vec<SeedOut> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut reporter = Reporter::new(out, cfg.resolved_json(&problem))
        .with_context(|| format!("cannot write to {}", out.display()))?;
    reporter.note("constants", shared::constants_json(&constants));

    // Seed-mean deviations against the per-interval expectation bound.
    let (mean_bk, se_bk) = shared::mean_se_across(
        &runs.iter().map(|r| r.radii.clone()).collect::<Vec<_>>(),
    );
    let bound_at = |k: usize| {
        let steps = grid.interval_steps(grid.interval_of(k.min(n - 1)));
        constants.interval_deviation_bound(&grid.alphas()[steps])
    };
    let mut worst_margin = f64::INFINITY;
    let mut dev_ok = true;
    for k in 0..n {
        let margin = bound_at(k) - mean_bk[k];
        worst_margin = worst_margin.min(margin);
        dev_ok &= margin >= 0.0;
    }
    reporter.check(
        "deviation_bound",
        dev_ok,
        format!("min over k of bound - mean(b_k) = {worst_margin:.4e}"),
    );

    // Weighted squared Goldstein measure against the theorem right side.
    let per_seed_weighted: Vec<f64> = runs.iter().map(|r| r.weighted_sq_gold).collect();
    let lhs = stats::mean(&per_seed_weighted);
    let lhs_se = stats::standard_error(&per_seed_weighted);
    let rhs = constants.weighted_measure_bound(&grid);
    reporter.check(
        "weighted_measure_bound",
        lhs <= rhs,
        format!("mean weighted squared measure {lhs:.4e} (se {lhs_se:.1e}) vs bound {rhs:.4e}"),
    );
    reporter.note(
        "weighted_squared_goldstein",
        serde_json::json!({
            "mean": lhs,
            "se": lhs_se,
            "q10": stats::quantile(&per_seed_weighted, 0.10),
            "q50": stats::quantile(&per_seed_weighted, 0.50),
            "q90": stats::quantile(&per_seed_weighted, 0.90),
            "bound": rhs,
        }),
    );

    // High-probability coverage per requested confidence level.
    for (j, hb) in hp_bounds.iter().enumerate() {
        let delta = deltas[j];
        let violations = runs.iter().filter(|r| r.hp_means[j] > hb.bound).count();
        let fraction = violations as f64 / cfg.seeds as f64;
        let slack = 3.0 * (delta * (1.0 - delta) / cfg.seeds as f64).sqrt();
        reporter.check(
            &format!("hp_coverage_delta_{delta}"),
            fraction <= delta + slack,
            format!(
                "{violations}/{} runs exceed {:.4e} (radius {:.4e}); allowed fraction {:.3}",
                cfg.seeds,
                hb.bound,
                hb.radius,
                delta + slack
            ),
        );
    }

    // Artifacts: thinned per-step series with seed means.
    let idx = shared::stride_indices(n, 2000);
    let mut rows = Vec::with_capacity(idx.len());
    let (mean_gold, _) = if want_gold {
        shared::mean_se_across(&runs.iter().map(|r| r.gold.clone()).collect::<Vec<_>>())
    } else {
        (vec![0.0; n], Vec::new())
    };
    let gm_mean = if want_gm {
        shared::mean_se_across(&runs.iter().map(|r| r.gm.clone()).collect::<Vec<_>>()).0
    } else {
        Vec::new()
    };
    let tres_mean = if want_tres {
        shared::mean_se_across(&runs.iter().map(|r| r.tres.clone()).collect::<Vec<_>>()).0
    } else {
        Vec::new()
    };
    let mut header = vec!["k", "tau", "alpha", "mean_b", "se_b", "deviation_bound"];
    if want_gold {
        header.push("mean_goldstein_at_b");
    }
    if want_gm {
        header.push("mean_gradient_mapping");
    }
    if want_tres {
        header.push("mean_normal_cone_residual");
    }
    for &k in &idx {
        let mut row = vec![
            k as f64,
            grid.taus()[k],
            grid.alphas()[k],
            mean_bk[k],
            se_bk[k],
            bound_at(k),
        ];
        if want_gold {
            row.push(mean_gold[k]);
        }
        if want_gm {
            row.push(gm_mean[k]);
        }
        if want_tres {
            row.push(tres_mean[k]);
        }
        rows.push(row);
    }
    reporter.csv("series.csv", &header, &rows)?;

    let interval_rows: Vec<Vec<f64>> = {
        let (mean_im, se_im) = shared::mean_se_across(
            &runs.iter().map(|r| r.interval_max.clone()).collect::<Vec<_>>(),
        );
        let breaks = grid.breaks();
        (0..grid.num_intervals())
            .map(|i| vec![i as f64, breaks[i], mean_im[i], se_im[i]])
            .collect()
    };
    reporter.csv(
        "intervals.csv",
        &["interval", "start_time", "mean_max_raw_deviation", "se"],
        &interval_rows,
    )?;

    let dev_points: Vec<(f64, f64)> = idx.iter().map(|&k| (grid.taus()[k], mean_bk[k])).collect();
    let bound_points: Vec<(f64, f64)> =
        idx.iter().map(|&k| (grid.taus()[k], bound_at(k))).collect();
    let mut plot = LinePlot::new("Deviations vs bound", "time", "value")
        .with_series("mean b_k", dev_points)
        .with_dashed_series("interval bound", bound_points)
        .with_vlines(grid.breaks());
    if want_gold {
        plot = plot.with_series(
            "mean Goldstein at b_k",
            idx.iter().map(|&k| (grid.taus()[k], mean_gold[k])).collect(),
        );
    }
    reporter.svg("run.svg", &plot)?;

    reporter.finish().map_err(Into::into)
}
