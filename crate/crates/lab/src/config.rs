//! JSON experiment configuration.
//!
//! Schemas are strict: unknown fields are rejected so typos fail loudly
//! with the offending path, line, and column. Geometry follows the
//! conventions of the core crate; the polytope matrix is spelled `"A"` to
//! match the usual `Ay <= b` notation.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

use psgd_core::bounds::Assumption;
use psgd_core::engine::StepSchedule;
use psgd_core::geometry::ConvexSet;
use psgd_core::linalg::Mat;
use psgd_core::problems::{NoiseSpec, Objective, Problem};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config {path}: {message}")]
    Semantic { path: PathBuf, message: String },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Polytope {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    Quadratic {
        p: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
    CosineQuadratic {
        p: Vec<Vec<f64>>,
        q: Vec<f64>,
        amplitude: f64,
        frequency: f64,
    },
    Linear {
        g: Vec<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    Gaussian { sigma_hat: f64 },
    Rademacher { magnitude: f64 },
    BoundedUniform { half_width: f64 },
    Ar1 { rho: f64, sigma_hat: f64 },
    Zero,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Constant { alpha: f64 },
    Harmonic { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionConfig {
    SubGaussianIid,
    BoundedSecondMomentIid,
    LMixing,
}

impl From<AssumptionConfig> for Assumption {
    fn from(a: AssumptionConfig) -> Assumption {
        match a {
            AssumptionConfig::SubGaussianIid => Assumption::SubGaussianIid,
            AssumptionConfig::BoundedSecondMomentIid => Assumption::BoundedSecondMomentIid,
            AssumptionConfig::LMixing => Assumption::LMixing,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// The built-in scalar illustration problem.
    Example41,
    Additive {
        set: SetConfig,
        objective: ObjectiveConfig,
        noise: NoiseConfig,
    },
}

/// Stationarity measures a run should evaluate along the trajectory.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MeasureConfig {
    Goldstein,
    GradientMapping,
    NormalCone,
}

/// Step rule for rate sweeps, α(N) as a power of the horizon.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    /// α = N^{-2/3}: the in-expectation rate regime.
    NPowTwoThirds,
    /// α = N^{-4/5}: the high-probability rate regime.
    NPowFourFifths,
}

impl AlphaRule {
    pub fn alpha(&self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            AlphaRule::NPowTwoThirds => n.powf(-2.0 / 3.0),
            AlphaRule::NPowFourFifths => n.powf(-4.0 / 5.0),
        }
    }
}

fn default_seeds() -> usize {
    1
}

fn default_master_seed() -> u64 {
    0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub schedule: ScheduleConfig,
    pub steps: usize,
    /// Start point; defaults to the projection of the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Noise assumption for the bound constants; defaults to the strongest
    /// one the noise supports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumption: Option<AssumptionConfig>,
    /// Flow substep; defaults to `min(alpha_min / 20, 1e-3)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_step: Option<f64>,
    /// Confidence levels for tail bounds; defaults to [0.05, 0.1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    /// Measures to evaluate along runs; defaults to Goldstein plus the
    /// gradient mapping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<Vec<MeasureConfig>>,
    /// Output directory; the `--out` flag overrides this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Horizon list for rate sweeps; defaults to 100, 1000, 10000, 31623.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Step rule for rate sweeps; defaults to α = N^{-2/3}.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_rule: Option<AlphaRule>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        config.validate(path)?;
        Ok(config)
    }

    fn validate(&self, path: &Path) -> Result<(), ConfigError> {
        let fail = |message: String| ConfigError::Semantic {
            path: path.to_path_buf(),
            message,
        };
        if self.steps == 0 {
            return Err(fail("steps must be at least 1".into()));
        }
        if self.seeds == 0 {
            return Err(fail("seeds must be at least 1".into()));
        }
        if let Some(h) = self.flow_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(fail(format!("flow_step must be positive, got {h}")));
            }
        }
        for &d in self.deltas.as_deref().unwrap_or(&[]) {
            if !(d > 0.0 && d < 1.0) {
                return Err(fail(format!("delta must be in (0, 1), got {d}")));
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.iter().any(|&n| n == 0) {
                return Err(fail("n_list entries must be at least 1".into()));
            }
        }
        // Building the problem exercises all the structural checks.
        self.problem(path)?;
        self.schedule()
            .validate()
            .map_err(|e| fail(e.to_string()))?;
        Ok(())
    }

    pub fn problem(&self, path: &Path) -> Result<Problem, ConfigError> {
        build_problem(&self.problem).map_err(|message| ConfigError::Semantic {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn schedule(&self) -> StepSchedule {
        match self.schedule {
            ScheduleConfig::Constant { alpha } => StepSchedule::Constant { alpha },
            ScheduleConfig::Harmonic { a, b } => StepSchedule::Harmonic { a, b },
        }
    }

    /// The assumption to use: explicit, or the strongest supported one.
    pub fn assumption(&self, problem: &Problem) -> Assumption {
        match self.assumption {
            Some(a) => a.into(),
            None => {
                if !problem.noise().is_iid() {
                    Assumption::LMixing
                } else if problem.noise_constants().sigma_hat.is_some() {
                    Assumption::SubGaussianIid
                } else {
                    Assumption::BoundedSecondMomentIid
                }
            }
        }
    }

    /// Flow substep: explicit, or `min(alpha_min / 20, 1e-3)`.
    pub fn flow_step(&self) -> f64 {
        match self.flow_step {
            Some(h) => h,
            None => {
                let schedule = self.schedule();
                let alpha_min = (0..self.steps)
                    .map(|k| schedule.alpha(k))
                    .fold(f64::INFINITY, f64::min);
                (alpha_min / 20.0).min(1e-3)
            }
        }
    }

    /// Start point: explicit, or the projection of the origin.
    pub fn start(&self, problem: &Problem) -> Result<Vec<f64>, ConfigError> {
        match &self.x0 {
            Some(x) => Ok(x.clone()),
            None => Ok(problem.set().project(&vec![0.0; problem.dim()])),
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.deltas.clone().unwrap_or_else(|| vec![0.05, 0.1])
    }

    pub fn measures(&self) -> Vec<MeasureConfig> {
        self.measures
            .clone()
            .unwrap_or_else(|| vec![MeasureConfig::Goldstein, MeasureConfig::GradientMapping])
    }

    pub fn n_list(&self) -> Vec<usize> {
        self.n_list
            .clone()
            .unwrap_or_else(|| vec![100, 1_000, 10_000, 31_623])
    }

    pub fn alpha_rule(&self) -> AlphaRule {
        self.alpha_rule.unwrap_or(AlphaRule::NPowTwoThirds)
    }

    /// Resolved-config echo for provenance; serializing `self` would drop
    /// the defaults that were applied.
    pub fn resolved_json(&self, problem: &Problem) -> serde_json::Value {
        serde_json::json!({
            "problem": self.problem,
            "schedule": self.schedule,
            "steps": self.steps,
            "x0": self.start(problem).ok(),
            "seeds": self.seeds,
            "master_seed": self.master_seed,
            "assumption": format!("{:?}", self.assumption(problem)),
            "flow_step": self.flow_step(),
            "deltas": self.deltas(),
            "measures": self.measures(),
            "n_list": self.n_list(),
            "alpha_rule": self.alpha_rule(),
        })
    }
}

fn build_problem(config: &ProblemConfig) -> Result<Problem, String> {
    match config {
        ProblemConfig::Example41 => Ok(Problem::example41()),
        ProblemConfig::Additive {
            set,
            objective,
            noise,
        } => {
            let set = match set {
                SetConfig::Box { lower, upper } => {
                    ConvexSet::new_box(lower.clone(), upper.clone())
                }
                SetConfig::Ball { center, radius } => {
                    ConvexSet::new_ball(center.clone(), *radius)
                }
                SetConfig::Polytope { a, b } => ConvexSet::new_polytope(a.clone(), b.clone()),
            }
            .map_err(|e| e.to_string())?;
            let objective = match objective {
                ObjectiveConfig::Quadratic { p, q } => Objective::Quadratic {
                    p: Mat::from_rows(p).ok_or("matrix p must be rectangular and nonempty")?,
                    q: q.clone(),
                },
                ObjectiveConfig::CosineQuadratic {
                    p,
                    q,
                    amplitude,
                    frequency,
                } => Objective::CosineQuadratic {
                    p: Mat::from_rows(p).ok_or("matrix p must be rectangular and nonempty")?,
                    q: q.clone(),
                    amplitude: *amplitude,
                    frequency: *frequency,
                },
                ObjectiveConfig::Linear { g } => Objective::Linear { g: g.clone() },
            };
            let noise = match noise {
                NoiseConfig::Gaussian { sigma_hat } => NoiseSpec::Gaussian {
                    sigma_hat: *sigma_hat,
                },
                NoiseConfig::Rademacher { magnitude } => NoiseSpec::Rademacher {
                    magnitude: *magnitude,
                },
                NoiseConfig::BoundedUniform { half_width } => NoiseSpec::BoundedUniform {
                    half_width: *half_width,
                },
                NoiseConfig::Ar1 { rho, sigma_hat } => NoiseSpec::Ar1 {
                    rho: *rho,
                    sigma_hat: *sigma_hat,
                },
                NoiseConfig::Zero => NoiseSpec::Zero,
            };
            Problem::additive(set, objective, noise).map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn loads_a_full_config() {
        let (_dir, path) = write_temp(
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
                "schedule": {"kind": "constant", "alpha": 0.25},
                "steps": 32,
                "seeds": 8,
                "master_seed": 7
            }"#,
        );
        let config = RunConfig::load(&path).unwrap();
        let problem = config.problem(&path).unwrap();
        assert_eq!(problem.dim(), 2);
        assert_eq!(config.seeds, 8);
        assert_eq!(config.master_seed, 7);
        assert_eq!(config.assumption(&problem), Assumption::SubGaussianIid);
        assert!((config.flow_step() - 1e-3).abs() < 1e-15);
        assert_eq!(config.start(&problem).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn polytope_uses_capital_a() {
        let (_dir, path) = write_temp(
            r#"{
                "problem": {
                    "kind": "additive",
                    "set": {
                        "kind": "polytope",
                        "A": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                        "b": [1.0, 1.0, 1.0, 1.0]
                    },
                    "objective": {"kind": "linear", "g": [1.0, 0.0]},
                    "noise": {"kind": "zero"}
                },
                "schedule": {"kind": "harmonic", "a": 1.0, "b": 2.0},
                "steps": 10
            }"#,
        );
        let config = RunConfig::load(&path).unwrap();
        assert_eq!(config.seeds, 1); // documented default
        assert_eq!(config.master_seed, 0);
        assert_eq!(config.deltas(), vec![0.05, 0.1]);
        let problem = config.problem(&path).unwrap();
        assert_eq!(problem.set().vertices().unwrap().len(), 4);
    }

    #[test]
    fn unknown_fields_are_rejected_with_location() {
        let (_dir, path) = write_temp(
            r#"{
                "problem": {"kind": "example41"},
                "schedule": {"kind": "constant", "alpha": 0.1},
                "steps": 5,
                "sedes": 3
            }"#,
        );
        let err = RunConfig::load(&path).unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert!(message.contains("sedes"), "message: {message}");
                assert!(line >= 1);
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn semantic_errors_surface() {
        let (_dir, path) = write_temp(
            r#"{
                "problem": {"kind": "example41"},
                "schedule": {"kind": "constant", "alpha": 0.9},
                "steps": 5
            }"#,
        );
        let err = RunConfig::load(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Semantic { .. }), "got {err}");

        let (_dir, path) = write_temp(
            r#"{
                "problem": {
                    "kind": "additive",
                    "set": {"kind": "box", "lower": [1.0], "upper": [-1.0]},
                    "objective": {"kind": "linear", "g": [1.0]},
                    "noise": {"kind": "zero"}
                },
                "schedule": {"kind": "constant", "alpha": 0.1},
                "steps": 5
            }"#,
        );
        let err = RunConfig::load(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Semantic { .. }), "got {err}");
    }

    #[test]
    fn ar1_defaults_to_l_mixing() {
        let (_dir, path) = write_temp(
            r#"{
                "problem": {
                    "kind": "additive",
                    "set": {"kind": "box", "lower": [-1.0], "upper": [1.0]},
                    "objective": {"kind": "linear", "g": [-1.0]},
                    "noise": {"kind": "ar1", "rho": 0.5, "sigma_hat": 1.0}
                },
                "schedule": {"kind": "constant", "alpha": 0.1},
                "steps": 5
            }"#,
        );
        let config = RunConfig::load(&path).unwrap();
        let problem = config.problem(&path).unwrap();
        assert_eq!(config.assumption(&problem), Assumption::LMixing);
    }
}
