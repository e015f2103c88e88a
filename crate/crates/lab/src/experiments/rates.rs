//! Convergence-rate sweeps: the closed-form right sides must carry the
//! advertised exponents, and Monte Carlo runs must sit below them at
//! every horizon.

use std::path::Path;

use anyhow::{bail, Context};
use psgd_core::bounds::BoundConstants;
use psgd_core::engine::{self, TimeGrid};
use psgd_core::flow::{build_jumping_process, StorePolicy};

use crate::config::{AlphaRule, RunConfig};
use crate::experiments::shared::{self, CheckResult};
use crate::report::{LinePlot, Reporter};
use crate::stats;

/// Horizons for the pure formula fit, matching the rate statements.
pub const FORMULA_N: [usize; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
pub const SLOPE_TOL_EXPECTATION: f64 = 0.02;
pub const SLOPE_TOL_HP: f64 = 0.05;

/// Per-(N, alpha) aggregate.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub n: usize,
    pub alpha: f64,
    pub mean: f64,
    pub se: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub empirical_slope: f64,
    pub empirical_slope_se: f64,
    pub rhs_slope: f64,
}

/// Fitted log-log slope of the expectation bound along `alpha = N^{-2/3}`.
pub fn expectation_rhs_slope(constants: &BoundConstants, ns: &[usize]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let alpha = AlphaRule::NPowTwoThirds.alpha(n);
            (
                (n as f64).ln(),
                constants.constant_step_measure_bound(alpha, n).ln(),
            )
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    stats::ols(&xs, &ys).slope
}

/// Fitted log-log slope of the high-probability bound along
/// `alpha = N^{-4/5}` after dividing out its `sqrt(log)` factor.
pub fn hp_rhs_slope(
    constants: &BoundConstants,
    ns: &[usize],
    delta: f64,
) -> Result<f64, psgd_core::bounds::BoundsError> {
    let mut xs = Vec::with_capacity(ns.len());
    let mut ys = Vec::with_capacity(ns.len());
    for &n in ns {
        let alpha = AlphaRule::NPowFourFifths.alpha(n);
        let hp = constants.uniform_tail_bound(alpha, n, delta)?;
        let log_factor = (2.0 / hp.delta_hat).ln().sqrt();
        xs.push((n as f64).ln());
        ys.push((hp.bound / log_factor).ln());
    }
    Ok(stats::ols(&xs, &ys).slope)
}

pub fn execute(cfg: &RunConfig, cfg_path: &Path, out: &Path) -> anyhow::Result<Vec<CheckResult>> {
    if cfg.seeds < 30 {
        bail!("invalid config: rate sweeps need at least 30 seeds, got {}", cfg.seeds);
    }
    let ns = cfg.n_list();
    if ns.len() < 4 {
        bail!("invalid config: the slope fit needs at least 4 horizons, got {}", ns.len());
    }
    let lo = *ns.iter().min().unwrap() as f64;
    let hi = *ns.iter().max().unwrap() as f64;
    if hi / lo < 100.0 {
        bail!("invalid config: the horizon list must span at least two decades");
    }
    let rule = cfg.alpha_rule();
    let problem = cfg.problem(cfg_path)?;
    let x0 = cfg.start(&problem)?;
    let constants = BoundConstants::for_problem(&problem, cfg.assumption(&problem))?;
    let delta = cfg.deltas()[0];

    let mut reporter = Reporter::new(out, cfg.resolved_json(&problem))
        .with_context(|| format!("cannot write to {}", out.display()))?;
    reporter.note("constants", shared::constants_json(&constants));

    // Formula-only exponent checks on the canonical horizon list.
    let slope = expectation_rhs_slope(&constants, &FORMULA_N);
    reporter.check(
        "rhs_slope_expectation",
        (slope + 1.0 / 3.0).abs() <= SLOPE_TOL_EXPECTATION,
        format!("log-log slope of the bound at alpha = N^-2/3 is {slope:.4}, target -1/3"),
    );
    match hp_rhs_slope(&constants, &FORMULA_N, delta) {
        Ok(hp_slope) => {
            reporter.check(
                "rhs_slope_high_probability",
                (hp_slope + 0.2).abs() <= SLOPE_TOL_HP,
                format!(
                    "log-log slope of the deflated tail bound at alpha = N^-4/5 is {hp_slope:.4}, \
                     target -1/5"
                ),
            );
        }
        Err(e) => reporter.check(
            "rhs_slope_high_probability",
            false,
            format!("tail constants unavailable: {e}"),
        ),
    }

    // Monte Carlo sweep on the configured horizons.
    let mut points = Vec::with_capacity(ns.len());
    for &n in &ns {
        let alpha = rule.alpha(n);
        if !(alpha > 0.0 && alpha <= 0.5) {
            bail!("alpha rule gives step {alpha} at N = {n}; needs (0, 1/2]");
        }
        let schedule = engine::StepSchedule::Constant { alpha };
        let grid = TimeGrid::new(&schedule, n)?;
        let h = cfg.flow_step.unwrap_or((alpha / 20.0).max(1e-4));
        let per_seed = engine::run_many_map(
            &problem,
            &schedule,
            n,
            &x0,
            cfg.master_seed,
            cfg.seeds,
            |_, traj| -> anyhow::Result<f64> {
                let jp =
                    build_jumping_process(&problem, &grid, traj, h, StorePolicy::DeviationsOnly)?;
                let gold = shared::goldstein_series(&problem, &grid, traj, &jp.radii)?;
                Ok(shared::weighted_square_mean(grid.alphas(), &gold))
            },
        )?;
        let vals: Vec<f64> = per_seed.into_iter().collect::<Result<_, _>>()?;
        points.push(SweepPoint {
            n,
            alpha,
            mean: stats::mean(&vals),
            se: stats::standard_error(&vals),
            q10: stats::quantile(&vals, 0.10),
            q50: stats::quantile(&vals, 0.50),
            q90: stats::quantile(&vals, 0.90),
            rhs: constants.constant_step_measure_bound(alpha, n),
        });
    }

    let below = points.iter().all(|p| p.mean <= p.rhs);
    let worst = points
        .iter()
        .map(|p| p.mean / p.rhs)
        .fold(0.0_f64, f64::max);
    reporter.check(
        "empirical_below_rhs",
        below,
        format!("max over N of empirical/bound = {worst:.3e}"),
    );

    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean.max(1e-300).ln()).collect();
    let fit = stats::ols(&xs, &ys);
    let rhs_fit_slope = {
        let ys: Vec<f64> = points.iter().map(|p| p.rhs.ln()).collect();
        stats::ols(&xs, &ys).slope
    };
    let result = SweepResult {
        points: points.clone(),
        empirical_slope: fit.slope,
        empirical_slope_se: fit.slope_se,
        rhs_slope: rhs_fit_slope,
    };
    reporter.note(
        "sweep",
        serde_json::json!({
            "empirical_slope": result.empirical_slope,
            "empirical_slope_se": result.empirical_slope_se,
            "rhs_slope_on_configured_horizons": result.rhs_slope,
        }),
    );

    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p.n as f64, p.alpha, p.mean, p.se, p.q10, p.q50, p.q90, p.rhs])
        .collect();
    reporter.csv(
        "sweep.csv",
        &["n", "alpha", "mean", "se", "q10", "q50", "q90", "rhs"],
        &rows,
    )?;
    let plot = LinePlot::new("Weighted squared measure vs horizon", "N", "value")
        .log_log()
        .with_series(
            "empirical mean",
            points.iter().map(|p| (p.n as f64, p.mean)).collect(),
        )
        .with_dashed_series(
            "theorem bound",
            points.iter().map(|p| (p.n as f64, p.rhs)).collect(),
        );
    reporter.svg("sweep.svg", &plot)?;

    reporter.finish().map_err(Into::into)
}
