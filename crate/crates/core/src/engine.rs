//! Projected stochastic gradient iteration and its time grid.
//!
//! The iteration is `x_{k+1} = Pi_X(x_k - alpha_k g(x_k, z_k))` with step
//! sizes constrained to `(0, 1/2]`. Analysis happens in continuous time:
//! step `k` occupies `[tau_k, tau_{k+1})` where `tau_k = sum_{j<k} alpha_j`,
//! and the horizon `[0, tau_N]` is split into intervals of length at most
//! one by greedily taking the largest grid point within unit distance of
//! the previous break. Because steps never exceed 1/2, every interval has
//! length greater than `1 - max alpha` (except possibly the last) and the
//! construction always advances.

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::linalg::KahanSum;
use crate::par;
use crate::problems::Problem;
use crate::seeds;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Step-size schedule with every step in `(0, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant { alpha: f64 },
    /// `alpha_k = a / (k + b)`.
    Harmonic { a: f64, b: f64 },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<(), EngineError> {
        let check = |first: f64| {
            if !(first.is_finite() && first > 0.0 && first <= 0.5) {
                Err(EngineError::InvalidSchedule(format!(
                    "largest step must lie in (0, 1/2], got {first}"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            StepSchedule::Constant { alpha } => check(*alpha),
            StepSchedule::Harmonic { a, b } => {
                if !(a.is_finite() && *a > 0.0 && b.is_finite() && *b > 0.0) {
                    return Err(EngineError::InvalidSchedule(format!(
                        "harmonic schedule requires a > 0 and b > 0, got a={a}, b={b}"
                    )));
                }
                check(a / b)
            }
        }
    }

    pub fn alpha(&self, k: usize) -> f64 {
        match self {
            StepSchedule::Constant { alpha } => *alpha,
            StepSchedule::Harmonic { a, b } => a / (k as f64 + b),
        }
    }

    /// Largest step over all iterations (attained at `k = 0`).
    pub fn max_alpha(&self) -> f64 {
        self.alpha(0)
    }
}

/// Cumulative times, step sizes, and unit-length analysis intervals for a
/// horizon of `n` steps.
#[derive(Clone, Debug)]
pub struct TimeGrid {
    alphas: Vec<f64>,
    taus: Vec<f64>,
    break_indices: Vec<usize>,
    interval_id: Vec<usize>,
}

impl TimeGrid {
    pub fn new(schedule: &StepSchedule, n: usize) -> Result<Self, EngineError> {
        schedule.validate()?;
        if n == 0 {
            return Err(EngineError::InvalidHorizon("need at least one step".into()));
        }
        let alphas: Vec<f64> = (0..n).map(|k| schedule.alpha(k)).collect();
        let mut taus = Vec::with_capacity(n + 1);
        let mut acc = KahanSum::default();
        taus.push(0.0);
        for &a in &alphas {
            acc.add(a);
            taus.push(acc.value());
        }

        // Greedy unit covering: from each break, jump to the largest grid
        // point at distance <= 1.
        let mut break_indices = vec![0usize];
        let mut i = 0usize;
        while i < n {
            let start = taus[i];
            let mut j = i;
            while j < n && taus[j + 1] - start <= 1.0 {
                j += 1;
            }
            debug_assert!(j > i, "steps <= 1/2 always fit one more grid point");
            break_indices.push(j);
            i = j;
        }

        let mut interval_id = vec![0usize; n];
        for w in 0..break_indices.len() - 1 {
            for item in interval_id
                .iter_mut()
                .take(break_indices[w + 1])
                .skip(break_indices[w])
            {
                *item = w;
            }
        }
        Ok(TimeGrid {
            alphas,
            taus,
            break_indices,
            interval_id,
        })
    }

    pub fn num_steps(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `tau_0 = 0, ..., tau_N`; `n + 1` points.
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Total elapsed time `tau_N`.
    pub fn horizon(&self) -> f64 {
        *self.taus.last().unwrap()
    }

    /// Indices `j` such that `tau_j` is an interval break (first is 0,
    /// last is `n`).
    pub fn break_indices(&self) -> &[usize] {
        &self.break_indices
    }

    /// Break values `s_0 = 0 < s_1 < ... < s_chi = tau_N`.
    pub fn breaks(&self) -> Vec<f64> {
        self.break_indices.iter().map(|&j| self.taus[j]).collect()
    }

    /// Number of analysis intervals.
    pub fn num_intervals(&self) -> usize {
        self.break_indices.len() - 1
    }

    /// Which interval step `k` belongs to (`0 <= k < n`).
    pub fn interval_of(&self, k: usize) -> usize {
        self.interval_id[k]
    }

    /// Step indices making up interval `i`.
    pub fn interval_steps(&self, i: usize) -> std::ops::Range<usize> {
        self.break_indices[i]..self.break_indices[i + 1]
    }
}

/// A realized run: iterates `x_0..x_N` and the noise draws that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<Vec<f64>>,
    pub zs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_iterate(&self) -> &[f64] {
        self.xs.last().expect("nonempty trajectory")
    }
}

fn check_start(problem: &Problem, x0: &[f64]) -> Result<(), EngineError> {
    if x0.len() != problem.dim() {
        return Err(EngineError::InvalidHorizon(format!(
            "x0 has dimension {}, problem has {}",
            x0.len(),
            problem.dim()
        )));
    }
    let violation = problem.set().violation(x0);
    if violation > 1e-9 {
        return Err(EngineError::Geometry(GeometryError::PointNotInSet {
            violation,
        }));
    }
    Ok(())
}

/// Run projected SGD for `n` steps from `x0` with the given noise seed.
pub fn run_psgd(
    problem: &Problem,
    schedule: &StepSchedule,
    n: usize,
    x0: &[f64],
    seed: u64,
) -> Result<Trajectory, EngineError> {
    schedule.validate()?;
    check_start(problem, x0)?;
    let mut noise = problem.noise_process(seed);
    let mut xs = Vec::with_capacity(n + 1);
    let mut zs = Vec::with_capacity(n);
    let mut x = x0.to_vec();
    xs.push(x.clone());
    for k in 0..n {
        let z = noise.next_noise();
        let g = problem.grad(&x, &z);
        let alpha = schedule.alpha(k);
        let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
        x = problem.set().project(&y);
        zs.push(z);
        xs.push(x.clone());
    }
    Ok(Trajectory { xs, zs })
}

/// Deterministic comparison process driven by the mean gradient.
pub fn run_mean_process(
    problem: &Problem,
    schedule: &StepSchedule,
    n: usize,
    x0: &[f64],
) -> Result<Trajectory, EngineError> {
    schedule.validate()?;
    check_start(problem, x0)?;
    let mut xs = Vec::with_capacity(n + 1);
    let mut x = x0.to_vec();
    xs.push(x.clone());
    for k in 0..n {
        let g = problem.mean_grad(&x);
        let alpha = schedule.alpha(k);
        let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
        x = problem.set().project(&y);
        xs.push(x.clone());
    }
    Ok(Trajectory { xs, zs: Vec::new() })
}

/// Fan out independent runs (seeded from `master_seed` by run index) and
/// reduce each trajectory to a summary value. Runs execute in parallel
/// when the `parallel` feature is on; outputs are ordered by run index
/// either way.
pub fn run_many_map<T, F>(
    problem: &Problem,
    schedule: &StepSchedule,
    n: usize,
    x0: &[f64],
    master_seed: u64,
    runs: usize,
    f: F,
) -> Result<Vec<T>, EngineError>
where
    T: Send,
    F: Fn(usize, &Trajectory) -> T + Sync,
{
    schedule.validate()?;
    check_start(problem, x0)?;
    let results = par::map_indexed(runs, |r| {
        let seed = seeds::run_seed(master_seed, r as u64);
        let traj = run_psgd(problem, schedule, n, x0, seed).expect("inputs validated");
        f(r, &traj)
    });
    Ok(results)
}
