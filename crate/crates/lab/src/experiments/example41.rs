//! The scalar illustration: maximize x over [-1, 1] with two-point noise.
//!
//! The classical measures stay bounded away from zero along the whole
//! trajectory — the stochastic gradient mapping averages at least 1/2 —
//! while the Goldstein measure read at the deviation radii b_k vanishes
//! once the iterates settle at the boundary.

use std::path::Path;

use anyhow::{bail, Context};
use psgd_core::bounds::BoundConstants;
use psgd_core::engine::{self, TimeGrid};
use psgd_core::flow::{build_jumping_process, StorePolicy};
use psgd_core::geometry::ConvexSet;
use psgd_core::problems::{NoiseSpec, Objective, Problem};
use psgd_core::stationarity::{self, weighted_average};

use crate::config::{ProblemConfig, RunConfig};
use crate::experiments::shared::{self, CheckResult};
use crate::report::{LinePlot, Reporter};
use crate::stats;

struct SeedOut {
    gm: Vec<f64>,
    gold: Vec<f64>,
    radii: Vec<f64>,
    weighted_gm: f64,
    tail_gold: f64,
    mean_abs_one_minus_z: f64,
}

pub fn execute(cfg: &RunConfig, cfg_path: &Path, out: &Path) -> anyhow::Result<Vec<CheckResult>> {
    if !matches!(cfg.problem, ProblemConfig::Example41) {
        bail!("invalid config: the example41 suite needs \"problem\": {{\"kind\": \"example41\"}}");
    }
    let problem = cfg.problem(cfg_path)?;
    let schedule = cfg.schedule();
    let grid = TimeGrid::new(&schedule, cfg.steps)?;
    let n = grid.num_steps();
    let x0 = cfg.start(&problem)?;
    let h = cfg.flow_step();
    let constants = BoundConstants::for_problem(&problem, cfg.assumption(&problem))?;

    let runs = engine::run_many_map(
        &problem,
        &schedule,
        n,
        &x0,
        cfg.master_seed,
        cfg.seeds,
        |_, traj| -> anyhow::Result<SeedOut> {
            let jp = build_jumping_process(&problem, &grid, traj, h, StorePolicy::DeviationsOnly)?;
            let gm = shared::stochastic_gm_series(&grid, traj);
            let gold = shared::goldstein_series(&problem, &grid, traj, &jp.radii)?;
            let weighted_gm = weighted_average(grid.alphas(), &gm);
            let tail = &gold[n / 2..];
            let tail_gold = tail.iter().sum::<f64>() / tail.len() as f64;
            let mean_abs_one_minus_z =
                traj.zs.iter().map(|z| (1.0 - z[0]).abs()).sum::<f64>() / n as f64;
            Ok(SeedOut {
                gm,
                gold,
                radii: jp.radii,
                weighted_gm,
                tail_gold,
                mean_abs_one_minus_z,
            })
        },
    )?;
    let runs: Vec<SeedOut> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut reporter = Reporter::new(out, cfg.resolved_json(&problem))
        .with_context(|| format!("cannot write to {}", out.display()))?;
    reporter.note("constants", shared::constants_json(&constants));

    let weighted: Vec<f64> = runs.iter().map(|r| r.weighted_gm).collect();
    let gm_mean = stats::mean(&weighted);
    let gm_se = stats::standard_error(&weighted);
    reporter.check(
        "gradient_mapping_nonvanishing",
        gm_mean >= 0.5,
        format!("seed-mean weighted gradient mapping {gm_mean:.4} (se {gm_se:.1e}) >= 0.5"),
    );

    let tails: Vec<f64> = runs.iter().map(|r| r.tail_gold).collect();
    let tail_mean = stats::mean(&tails);
    reporter.check(
        "goldstein_tail_vanishes",
        tail_mean <= 0.1,
        format!("Goldstein measure at b_k over the last half averages {tail_mean:.4} <= 0.1"),
    );

    let zbar: Vec<f64> = runs.iter().map(|r| r.mean_abs_one_minus_z).collect();
    let z_mean = stats::mean(&zbar);
    reporter.check(
        "two_point_law",
        (z_mean - 2.0).abs() <= 0.05,
        format!("mean |1 - z| = {z_mean:.4}, expected 2 from the two-point law"),
    );

    // Noise-free variant: plain gradient ascent hits the maximizer at the
    // boundary and both deterministic measures vanish there.
    {
        let quiet = Problem::additive(
            ConvexSet::new_box(vec![-1.0], vec![1.0])?,
            Objective::Linear { g: vec![-1.0] },
            NoiseSpec::Zero,
        )?;
        let steps = ((2.0 / schedule.alpha(0)).ceil() as usize).max(n.min(10_000));
        let traj = engine::run_psgd(&quiet, &schedule, steps, &x0, 0)?;
        let x = traj.final_iterate();
        let gm0 = stationarity::gradient_mapping(
            quiet.set(),
            x,
            &quiet.mean_grad(x),
            schedule.alpha(0),
        )?;
        let gold0 = stationarity::goldstein_measure(&quiet, x, 0.0)?;
        let ok = (x[0] - 1.0).abs() <= 1e-9 && gm0 <= 1e-9 && gold0 <= 1e-9;
        reporter.check(
            "zero_noise_boundary_stationarity",
            ok,
            format!("final x = {:.6}, gradient mapping {gm0:.2e}, Goldstein {gold0:.2e}", x[0]),
        );
    }

    // Side-by-side emission of the competing measures.
    let idx = shared::stride_indices(n, 2000);
    let (gm_series, _) = shared::mean_se_across(&runs.iter().map(|r| r.gm.clone()).collect::<Vec<_>>());
    let (gold_series, _) =
        shared::mean_se_across(&runs.iter().map(|r| r.gold.clone()).collect::<Vec<_>>());
    let (bk_series, _) =
        shared::mean_se_across(&runs.iter().map(|r| r.radii.clone()).collect::<Vec<_>>());
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&k| {
            vec![
                k as f64,
                grid.taus()[k],
                gm_series[k],
                gold_series[k],
                bk_series[k],
            ]
        })
        .collect();
    reporter.csv(
        "measures.csv",
        &["k", "tau", "mean_gradient_mapping", "mean_goldstein_at_b", "mean_b"],
        &rows,
    )?;
    let plot = LinePlot::new(
        "Gradient mapping vs Goldstein measure at b_k",
        "time",
        "measure",
    )
    .with_series(
        "gradient mapping",
        idx.iter().map(|&k| (grid.taus()[k], gm_series[k])).collect(),
    )
    .with_series(
        "Goldstein at b_k",
        idx.iter().map(|&k| (grid.taus()[k], gold_series[k])).collect(),
    )
    .with_dashed_series(
        "mean b_k",
        idx.iter().map(|&k| (grid.taus()[k], bk_series[k])).collect(),
    );
    reporter.svg("measures.svg", &plot)?;

    reporter.note(
        "weighted_gradient_mapping",
        serde_json::json!({"mean": gm_mean, "se": gm_se}),
    );
    reporter.finish().map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> (tempfile::TempDir, std::path::PathBuf, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, json).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        (dir, path, cfg)
    }

    #[test]
    fn rejects_other_problems() {
        let (dir, path, cfg) = cfg(
            r#"{
                "problem": {
                    "kind": "additive",
                    "set": {"kind": "box", "lower": [-1.0], "upper": [1.0]},
                    "objective": {"kind": "linear", "g": [-1.0]},
                    "noise": {"kind": "zero"}
                },
                "schedule": {"kind": "constant", "alpha": 0.01},
                "steps": 10
            }"#,
        );
        let err = execute(&cfg, &path, &dir.path().join("out")).unwrap_err();
        assert!(err.to_string().contains("example41"));
    }

    #[test]
    fn small_instance_passes_all_checks() {
        let (dir, path, cfg) = cfg(
            r#"{
                "problem": {"kind": "example41"},
                "schedule": {"kind": "constant", "alpha": 0.01},
                "steps": 2000,
                "seeds": 12,
                "master_seed": 5
            }"#,
        );
        let out = dir.path().join("out");
        let checks = execute(&cfg, &path, &out).unwrap();
        assert_eq!(checks.len(), 4);
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        assert!(out.join("measures.csv").exists());
        assert!(out.join("measures.svg").exists());
    }
}
