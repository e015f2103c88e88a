//! Dump the bound constants and closed-form right sides for a config.

use std::path::Path;

use anyhow::Context;
use psgd_core::bounds::BoundConstants;
use psgd_core::engine::TimeGrid;

use crate::config::{RunConfig, ScheduleConfig};
use crate::experiments::shared::{self, CheckResult};
use crate::report::Reporter;

pub fn execute(cfg: &RunConfig, cfg_path: &Path, out: &Path) -> anyhow::Result<Vec<CheckResult>> {
    let problem = cfg.problem(cfg_path)?;
    let constants = BoundConstants::for_problem(&problem, cfg.assumption(&problem))?;
    let grid = TimeGrid::new(&cfg.schedule(), cfg.steps)?;

    let mut reporter = Reporter::new(out, cfg.resolved_json(&problem))
        .with_context(|| format!("cannot write to {}", out.display()))?;
    let json = shared::constants_json(&constants);
    println!("{}", serde_json::to_string_pretty(&json)?);
    reporter.note("constants", json);

    let mut derived = serde_json::json!({
        "weighted_measure_bound": constants.weighted_measure_bound(&grid),
        "num_intervals": grid.num_intervals(),
        "horizon": grid.horizon(),
    });
    if let ScheduleConfig::Constant { alpha } = cfg.schedule {
        derived["expected_deviation_bound"] =
            constants.constant_step_deviation(alpha).into();
        derived["constant_step_measure_bound"] =
            constants.constant_step_measure_bound(alpha, cfg.steps).into();
        let mut hp = Vec::new();
        for delta in cfg.deltas() {
            match constants.uniform_tail_bound(alpha, cfg.steps, delta) {
                Ok(b) => hp.push(serde_json::json!({
                    "delta": delta,
                    "delta_hat": b.delta_hat,
                    "q": b.q,
                    "radius": b.radius,
                    "bound": b.bound,
                })),
                Err(e) => hp.push(serde_json::json!({
                    "delta": delta,
                    "unavailable": e.to_string(),
                })),
            }
        }
        derived["high_probability"] = hp.into();
    }
    println!("{}", serde_json::to_string_pretty(&derived)?);
    reporter.note("derived", derived);

    let finite = [
        constants.c1,
        constants.c2,
        constants.c7,
        constants.c8,
        constants.c5_prime,
        constants.c6_prime,
    ]
    .iter()
    .all(|v| v.is_finite());
    reporter.check(
        "constants_finite",
        finite,
        "all derived constants are finite".into(),
    );
    reporter.finish().map_err(Into::into)
}
