//! Stochastic optimization problems over compact convex sets.
//!
//! A problem pairs a [`ConvexSet`] with a smooth mean objective and a noise
//! model for the stochastic gradients `grad f(x, z) = grad fbar(x) + z`.
//! Each noise family exposes the constants used by the deviation and
//! stationarity bounds:
//!
//! * `sigma`   — `E||z||^2 <= sigma^2` (second-moment bound);
//! * `sigma_hat` — per-coordinate sub-gaussian parameter, when one exists;
//! * `psi2`    — the L-mixing magnitude `Psi_2`, finite for all families
//!   here (correlated noise only has this and `sigma`).
//!
//! The smoothness constant reported by [`Problem::lipschitz`] is
//! `max(L, 1)` where `L` is the gradient Lipschitz constant of the mean
//! objective: the coupling of the additive noise into the gradient is
//! 1-Lipschitz, and the flow comparison arguments need the joint constant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::geometry::ConvexSet;
use crate::linalg::{self, Mat};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("invalid noise: {0}")]
    InvalidNoise(String),
}

type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Smooth mean objective `fbar`.
#[derive(Clone)]
pub enum Objective {
    /// `0.5 x'Px + q'x` with symmetric `P`.
    Quadratic { p: Mat, q: Vec<f64> },
    /// `0.5 x'Px + q'x + amplitude * sum_i cos(frequency * x_i)`.
    ///
    /// With `amplitude * frequency^2 > ||P||` the Hessian changes sign and
    /// the objective is genuinely non-convex.
    CosineQuadratic {
        p: Mat,
        q: Vec<f64>,
        amplitude: f64,
        frequency: f64,
    },
    /// `g'x`.
    Linear { g: Vec<f64> },
    /// User-supplied smooth objective with certified constants.
    Custom {
        value: ValueFn,
        grad: GradFn,
        grad_lipschitz: f64,
        grad_bound: f64,
    },
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Quadratic { p, q } => f
                .debug_struct("Quadratic")
                .field("p", p)
                .field("q", q)
                .finish(),
            Objective::CosineQuadratic {
                p,
                q,
                amplitude,
                frequency,
            } => f
                .debug_struct("CosineQuadratic")
                .field("p", p)
                .field("q", q)
                .field("amplitude", amplitude)
                .field("frequency", frequency)
                .finish(),
            Objective::Linear { g } => f.debug_struct("Linear").field("g", g).finish(),
            Objective::Custom { grad_lipschitz, grad_bound, .. } => f
                .debug_struct("Custom")
                .field("grad_lipschitz", grad_lipschitz)
                .field("grad_bound", grad_bound)
                .finish(),
        }
    }
}

impl Objective {
    fn dim(&self) -> Option<usize> {
        match self {
            Objective::Quadratic { q, .. } => Some(q.len()),
            Objective::CosineQuadratic { q, .. } => Some(q.len()),
            Objective::Linear { g } => Some(g.len()),
            Objective::Custom { .. } => None,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), ProblemError> {
        if let Some(d) = self.dim() {
            if d != dim {
                return Err(ProblemError::DimensionMismatch(format!(
                    "objective dimension {d} does not match set dimension {dim}"
                )));
            }
        }
        match self {
            Objective::Quadratic { p, q } | Objective::CosineQuadratic { p, q, .. } => {
                if p.rows() != q.len() || p.cols() != q.len() {
                    return Err(ProblemError::DimensionMismatch(
                        "quadratic matrix shape does not match the linear term".into(),
                    ));
                }
                if !p.is_symmetric(1e-9) {
                    return Err(ProblemError::InvalidObjective(
                        "quadratic matrix must be symmetric".into(),
                    ));
                }
                if let Objective::CosineQuadratic {
                    amplitude,
                    frequency,
                    ..
                } = self
                {
                    if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                        return Err(ProblemError::InvalidObjective(
                            "cosine amplitude must be finite and >= 0".into(),
                        ));
                    }
                    if !(*frequency > 0.0 && frequency.is_finite()) {
                        return Err(ProblemError::InvalidObjective(
                            "cosine frequency must be finite and > 0".into(),
                        ));
                    }
                }
                Ok(())
            }
            Objective::Linear { .. } => Ok(()),
            Objective::Custom {
                grad_lipschitz,
                grad_bound,
                ..
            } => {
                if !(grad_lipschitz.is_finite() && *grad_lipschitz >= 0.0)
                    || !(grad_bound.is_finite() && *grad_bound >= 0.0)
                {
                    return Err(ProblemError::InvalidObjective(
                        "custom objective constants must be finite and >= 0".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Quadratic { p, q } => 0.5 * linalg::dot(x, &p.matvec(x)) + linalg::dot(q, x),
            Objective::CosineQuadratic {
                p,
                q,
                amplitude,
                frequency,
            } => {
                0.5 * linalg::dot(x, &p.matvec(x))
                    + linalg::dot(q, x)
                    + amplitude * x.iter().map(|xi| (frequency * xi).cos()).sum::<f64>()
            }
            Objective::Linear { g } => linalg::dot(g, x),
            Objective::Custom { value, .. } => value(x),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Objective::Quadratic { p, q } => linalg::add(&p.matvec(x), q),
            Objective::CosineQuadratic {
                p,
                q,
                amplitude,
                frequency,
            } => {
                let mut g = linalg::add(&p.matvec(x), q);
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi -= amplitude * frequency * (frequency * xi).sin();
                }
                g
            }
            Objective::Linear { g } => g.clone(),
            Objective::Custom { grad, .. } => grad(x),
        }
    }

    /// Gradient Lipschitz constant of the mean objective.
    fn grad_lipschitz(&self) -> f64 {
        match self {
            Objective::Quadratic { p, .. } => linalg::spectral_norm_sym(p),
            Objective::CosineQuadratic {
                p,
                amplitude,
                frequency,
                ..
            } => linalg::spectral_norm_sym(p) + amplitude * frequency * frequency,
            Objective::Linear { .. } => 0.0,
            Objective::Custom { grad_lipschitz, .. } => *grad_lipschitz,
        }
    }

    /// Upper bound on `sup_{x in X} ||grad fbar(x)||`.
    ///
    /// Exact on boxes and polytopes for affine gradients (a convex norm is
    /// maximized at a vertex); balls and the cosine term use the triangle
    /// inequality, which only loosens downstream bounds.
    fn grad_bound(&self, set: &ConvexSet) -> f64 {
        // sup of the affine part ||Px + q||: exact at extreme points when
        // they are enumerable, otherwise center value plus operator-norm
        // slack over the diameter.
        let affine_sup = |p: &Mat, q: &[f64]| -> f64 {
            if let Some(vertices) = box_like_vertices(set) {
                vertices
                    .iter()
                    .map(|v| linalg::norm(&linalg::add(&p.matvec(v), q)))
                    .fold(0.0, f64::max)
            } else {
                let center = set.project(&vec![0.0; set.dim()]);
                linalg::norm(&linalg::add(&p.matvec(&center), q))
                    + linalg::spectral_norm_sym(p) * set.diameter()
            }
        };
        match self {
            Objective::Quadratic { p, q } => affine_sup(p, q),
            Objective::CosineQuadratic {
                p,
                q,
                amplitude,
                frequency,
            } => affine_sup(p, q) + amplitude * frequency * (set.dim() as f64).sqrt(),
            Objective::Linear { g } => linalg::norm(g),
            Objective::Custom { grad_bound, .. } => *grad_bound,
        }
    }
}

/// Extreme points of a box or polytope; `None` for balls or boxes too
/// high-dimensional to enumerate.
fn box_like_vertices(set: &ConvexSet) -> Option<Vec<Vec<f64>>> {
    if let Some(vs) = set.vertices() {
        return Some(vs.to_vec());
    }
    let (lower, upper) = set.bounds()?;
    let n = lower.len();
    if n > 20 {
        return None;
    }
    let corners = (0..(1usize << n))
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                .collect()
        })
        .collect();
    Some(corners)
}

/// Noise model for the stochastic gradient `z` sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    /// iid `N(0, sigma_hat^2 I)`.
    Gaussian { sigma_hat: f64 },
    /// iid coordinates `+/- magnitude` with equal probability.
    Rademacher { magnitude: f64 },
    /// iid coordinates uniform on `[-half_width, half_width]`.
    BoundedUniform { half_width: f64 },
    /// Coordinate-wise AR(1): `s_{k+1} = rho s_k + sigma_hat w_k`, `s_0 = 0`,
    /// with standard normal innovations; samples are the states `s_{k+1}`.
    Ar1 { rho: f64, sigma_hat: f64 },
    /// Degenerate noise; the iteration becomes deterministic.
    Zero,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ProblemError::InvalidNoise(format!("{what} must be finite and > 0, got {v}")))
            }
        };
        match self {
            NoiseSpec::Gaussian { sigma_hat } => positive(*sigma_hat, "sigma_hat"),
            NoiseSpec::Rademacher { magnitude } => positive(*magnitude, "magnitude"),
            NoiseSpec::BoundedUniform { half_width } => positive(*half_width, "half_width"),
            NoiseSpec::Ar1 { rho, sigma_hat } => {
                positive(*sigma_hat, "sigma_hat")?;
                if rho.is_finite() && rho.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(ProblemError::InvalidNoise(format!(
                        "AR(1) requires |rho| < 1, got {rho}"
                    )))
                }
            }
            NoiseSpec::Zero => Ok(()),
        }
    }

    /// Whether the sequence is independent across steps.
    pub fn is_iid(&self) -> bool {
        !matches!(self, NoiseSpec::Ar1 { .. })
    }

    /// Moment constants of the noise in dimension `dim`.
    pub fn constants(&self, dim: usize) -> NoiseConstants {
        let n = dim as f64;
        match self {
            NoiseSpec::Gaussian { sigma_hat } => NoiseConstants {
                sigma: n.sqrt() * sigma_hat,
                sigma_hat: Some(*sigma_hat),
                psi2: n.sqrt() * sigma_hat,
            },
            NoiseSpec::Rademacher { magnitude } => NoiseConstants {
                sigma: magnitude * n.sqrt(),
                sigma_hat: Some(*magnitude),
                psi2: magnitude * n.sqrt(),
            },
            NoiseSpec::BoundedUniform { half_width } => NoiseConstants {
                sigma: half_width * (n / 3.0).sqrt(),
                sigma_hat: Some(*half_width),
                psi2: half_width * (n / 3.0).sqrt(),
            },
            NoiseSpec::Ar1 { rho, sigma_hat } => {
                let stationary = sigma_hat / (1.0 - rho * rho).sqrt();
                NoiseConstants {
                    sigma: n.sqrt() * stationary,
                    sigma_hat: None,
                    psi2: n.sqrt() * stationary / (1.0 - rho),
                }
            }
            NoiseSpec::Zero => NoiseConstants {
                sigma: 0.0,
                sigma_hat: Some(0.0),
                psi2: 0.0,
            },
        }
    }
}

/// Second-moment, sub-gaussian, and L-mixing magnitudes of a noise model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConstants {
    /// `sqrt(E ||z_k||^2)` bound (stationary value for AR(1)).
    pub sigma: f64,
    /// Per-coordinate sub-gaussian parameter; `None` for correlated noise.
    pub sigma_hat: Option<f64>,
    /// L-mixing magnitude `Psi_2`.
    pub psi2: f64,
}

/// Stateful sampler for a noise sequence.
#[derive(Clone, Debug)]
pub struct NoiseProcess {
    spec: NoiseSpec,
    dim: usize,
    rng: ChaCha8Rng,
    ar_state: Vec<f64>,
}

impl NoiseProcess {
    pub fn new(spec: NoiseSpec, dim: usize, seed: u64) -> Self {
        NoiseProcess {
            spec,
            dim,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ar_state: vec![0.0; dim],
        }
    }

    pub fn next_noise(&mut self) -> Vec<f64> {
        match &self.spec {
            NoiseSpec::Gaussian { sigma_hat } => (0..self.dim)
                .map(|_| {
                    let w: f64 = StandardNormal.sample(&mut self.rng);
                    sigma_hat * w
                })
                .collect(),
            NoiseSpec::Rademacher { magnitude } => (0..self.dim)
                .map(|_| if self.rng.random::<bool>() { *magnitude } else { -magnitude })
                .collect(),
            NoiseSpec::BoundedUniform { half_width } => {
                use rand::Rng;
                (0..self.dim)
                    .map(|_| self.rng.random_range(-half_width..*half_width))
                    .collect()
            }
            NoiseSpec::Ar1 { rho, sigma_hat } => {
                for s in self.ar_state.iter_mut() {
                    let w: f64 = StandardNormal.sample(&mut self.rng);
                    *s = rho * *s + sigma_hat * w;
                }
                self.ar_state.clone()
            }
            NoiseSpec::Zero => vec![0.0; self.dim],
        }
    }
}

use rand::Rng as _;

/// A stochastic problem: constraint set, mean objective, and noise.
#[derive(Clone, Debug)]
pub struct Problem {
    set: ConvexSet,
    objective: Objective,
    noise: NoiseSpec,
    mean_lipschitz: f64,
    lipschitz: f64,
    grad_bound: f64,
}

impl Problem {
    pub fn additive(
        set: ConvexSet,
        objective: Objective,
        noise: NoiseSpec,
    ) -> Result<Self, ProblemError> {
        objective.validate(set.dim())?;
        noise.validate()?;
        // The additive noise enters the gradient with a unit coefficient,
        // so the joint smoothness constant is at least one.
        let mean_lipschitz = objective.grad_lipschitz();
        let lipschitz = mean_lipschitz.max(1.0);
        let grad_bound = objective.grad_bound(&set);
        Ok(Problem {
            set,
            objective,
            noise,
            mean_lipschitz,
            lipschitz,
            grad_bound,
        })
    }

    /// The scalar illustration problem: minimize `fbar(x) = -x` over
    /// `[-1, 1]` with gradient samples `-1 + z`, `z = +/-2` equiprobable.
    /// The mean gradient always points at the right endpoint, yet every
    /// stochastic gradient step moves at full speed in one of the two
    /// directions, so gradient-mapping style measures stay bounded away
    /// from zero while the Goldstein measure vanishes at the boundary.
    pub fn example41() -> Self {
        let set = ConvexSet::new_box(vec![-1.0], vec![1.0]).expect("static set");
        Problem::additive(
            set,
            Objective::Linear { g: vec![-1.0] },
            NoiseSpec::Rademacher { magnitude: 2.0 },
        )
        .expect("static problem")
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn noise_constants(&self) -> NoiseConstants {
        self.noise.constants(self.dim())
    }

    pub fn noise_process(&self, seed: u64) -> NoiseProcess {
        NoiseProcess::new(self.noise.clone(), self.dim(), seed)
    }

    /// Mean objective value `fbar(x)`.
    pub fn mean_value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    /// Mean gradient `grad fbar(x)`.
    pub fn mean_grad(&self, x: &[f64]) -> Vec<f64> {
        self.objective.grad(x)
    }

    /// Stochastic gradient `grad fbar(x) + z`.
    pub fn grad(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        linalg::add(&self.objective.grad(x), z)
    }

    /// Joint smoothness constant `l >= 1`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Gradient Lipschitz constant of the mean objective alone, without
    /// the unit floor (governs weak convexity of prox subproblems).
    pub fn mean_grad_lipschitz(&self) -> f64 {
        self.mean_lipschitz
    }

    /// Bound `u` on the mean gradient norm over the set.
    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_constants_frozen_values() {
        let ar = NoiseSpec::Ar1 { rho: 0.5, sigma_hat: 1.0 }.constants(1);
        assert!((ar.sigma - 1.0 / 0.75_f64.sqrt()).abs() < 1e-12);
        assert!((ar.psi2 - 2.309_401_076_758_503_4).abs() < 1e-12);
        assert_eq!(ar.sigma_hat, None);

        let g = NoiseSpec::Gaussian { sigma_hat: 0.5 }.constants(2);
        assert!((g.sigma - 0.5 * 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.sigma_hat, Some(0.5));
        assert_eq!(g.psi2, g.sigma);

        let r = NoiseSpec::Rademacher { magnitude: 2.0 }.constants(1);
        assert_eq!((r.sigma, r.sigma_hat, r.psi2), (2.0, Some(2.0), 2.0));

        let u = NoiseSpec::BoundedUniform { half_width: 1.0 }.constants(3);
        assert!((u.sigma - 1.0).abs() < 1e-15);
        assert_eq!(u.sigma_hat, Some(1.0));

        let z = NoiseSpec::Zero.constants(4);
        assert_eq!((z.sigma, z.sigma_hat, z.psi2), (0.0, Some(0.0), 0.0));
    }

    #[test]
    fn noise_streams_are_deterministic_per_seed() {
        let spec = NoiseSpec::Gaussian { sigma_hat: 1.0 };
        let mut a = NoiseProcess::new(spec.clone(), 3, 99);
        let mut b = NoiseProcess::new(spec.clone(), 3, 99);
        let mut c = NoiseProcess::new(spec, 3, 100);
        let xs: Vec<Vec<f64>> = (0..50).map(|_| a.next_noise()).collect();
        let ys: Vec<Vec<f64>> = (0..50).map(|_| b.next_noise()).collect();
        let zs: Vec<Vec<f64>> = (0..50).map(|_| c.next_noise()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn noise_moments_match_spec() {
        // Gaussian per-coordinate RMS.
        let mut p = NoiseProcess::new(NoiseSpec::Gaussian { sigma_hat: 0.7 }, 2, 1);
        let mut sq = 0.0;
        let draws = 100_000;
        for _ in 0..draws {
            let z = p.next_noise();
            sq += linalg::dot(&z, &z);
        }
        let rms = (sq / (2.0 * draws as f64)).sqrt();
        assert!((rms - 0.7).abs() < 0.01, "gaussian rms {rms}");

        // Rademacher support and mean.
        let mut p = NoiseProcess::new(NoiseSpec::Rademacher { magnitude: 2.0 }, 1, 2);
        let mut mean = 0.0;
        for _ in 0..draws {
            let z = p.next_noise()[0];
            assert!(z == 2.0 || z == -2.0);
            mean += z / draws as f64;
        }
        assert!(mean.abs() < 0.05, "rademacher mean {mean}");

        // Uniform bounds and variance.
        let mut p = NoiseProcess::new(NoiseSpec::BoundedUniform { half_width: 1.5 }, 1, 3);
        let mut var = 0.0;
        for _ in 0..draws {
            let z = p.next_noise()[0];
            assert!(z.abs() <= 1.5);
            var += z * z / draws as f64;
        }
        assert!((var - 1.5 * 1.5 / 3.0).abs() < 0.02, "uniform var {var}");
    }

    #[test]
    fn ar1_autocorrelation_and_scale() {
        let rho = 0.5;
        let mut p = NoiseProcess::new(NoiseSpec::Ar1 { rho, sigma_hat: 1.0 }, 1, 4);
        let n = 200_000;
        let samples: Vec<f64> = (0..n).map(|_| p.next_noise()[0]).collect();
        let tail = &samples[1000..]; // discard the burn-in from s_0 = 0
        let var: f64 = tail.iter().map(|s| s * s).sum::<f64>() / tail.len() as f64;
        let stationary = 1.0 / (1.0 - rho * rho);
        assert!((var - stationary).abs() / stationary < 0.03, "ar1 var {var}");
        let lag1: f64 = tail.windows(2).map(|w| w[0] * w[1]).sum::<f64>()
            / (tail.len() - 1) as f64;
        assert!((lag1 / var - rho).abs() < 0.02, "ar1 lag-1 corr {}", lag1 / var);
    }

    #[test]
    fn example41_matches_its_description() {
        let p = Problem::example41();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.lipschitz(), 1.0);
        assert_eq!(p.grad_bound(), 1.0);
        assert_eq!(p.set().diameter(), 2.0);
        assert_eq!(p.set().inner_radius(), 1.0);
        assert_eq!(p.mean_grad(&[0.3]), vec![-1.0]);
        assert_eq!(p.grad(&[0.3], &[2.0]), vec![1.0]);
        assert_eq!(p.grad(&[0.3], &[-2.0]), vec![-3.0]);
        assert_eq!(p.mean_value(&[0.25]), -0.25);
        let c = p.noise_constants();
        assert_eq!((c.sigma, c.sigma_hat), (2.0, Some(2.0)));
    }

    #[test]
    fn quadratic_constants_on_a_box() {
        let set = ConvexSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let p = Problem::additive(
            set,
            Objective::Quadratic {
                p: Mat::identity(2),
                q: vec![0.0, 0.0],
            },
            NoiseSpec::Zero,
        )
        .unwrap();
        // sup ||x|| over the square is attained at a corner.
        assert!((p.grad_bound() - 2.0_f64.sqrt()).abs() < 1e-9);
        // ||P|| = 1 and the joint constant is floored at 1.
        assert!((p.lipschitz() - 1.0).abs() < 1e-9);

        let set = ConvexSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mut stiff = Mat::identity(2);
        stiff.set(0, 0, 3.0);
        let p = Problem::additive(
            set,
            Objective::Quadratic { p: stiff, q: vec![0.0, 0.0] },
            NoiseSpec::Zero,
        )
        .unwrap();
        assert!((p.lipschitz() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn cosine_quadratic_gradient_matches_finite_differences() {
        let set = ConvexSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let obj = Objective::CosineQuadratic {
            p: {
                let mut m = Mat::identity(2);
                m.set(0, 0, 0.2);
                m.set(1, 1, 0.2);
                m
            },
            q: vec![0.05, -0.03],
            amplitude: 0.15,
            frequency: std::f64::consts::PI,
        };
        let problem = Problem::additive(set, obj, NoiseSpec::Gaussian { sigma_hat: 0.5 }).unwrap();
        let expect_l = 0.2 + 0.15 * std::f64::consts::PI.powi(2);
        assert!((problem.lipschitz() - expect_l).abs() < 1e-9);
        assert!(expect_l > 1.0, "this objective must be genuinely non-convex");

        let h = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = problem.mean_grad(&x);
            assert!(linalg::norm(&g) <= problem.grad_bound() + 1e-9);
            for i in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (problem.mean_value(&xp) - problem.mean_value(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "coordinate {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let set = ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap();
        let err = Problem::additive(
            set.clone(),
            Objective::Linear { g: vec![1.0, 2.0] },
            NoiseSpec::Zero,
        )
        .unwrap_err();
        assert!(matches!(err, ProblemError::DimensionMismatch(_)));

        let err = Problem::additive(
            set.clone(),
            Objective::Linear { g: vec![1.0] },
            NoiseSpec::Ar1 { rho: 1.0, sigma_hat: 1.0 },
        )
        .unwrap_err();
        assert!(matches!(err, ProblemError::InvalidNoise(_)));

        let mut asym = Mat::zeros(1, 1);
        asym.set(0, 0, 1.0);
        let ok = Problem::additive(
            set,
            Objective::Quadratic { p: asym, q: vec![0.0] },
            NoiseSpec::Zero,
        );
        assert!(ok.is_ok());
    }
}
