//! Closed-form convergence bounds for projected SGD.
//!
//! All bounds are parameterized by a small set of problem constants:
//! the joint smoothness `l`, mean-gradient bound `u`, set diameter `D`,
//! origin-centered inner radius `r > 0`, dimension `n`, and the noise
//! magnitudes from [`crate::problems::NoiseConstants`]. The base constants
//! are
//!
//! * `c1` — scale of the averaged noise over a unit time interval, whose
//!   form depends on the noise assumption (see [`Assumption`]);
//! * `c2 = (u + sqrt(2 r^-1 u (D u + D^2))) e^l` — discretization drift of
//!   the projected iteration against its continuous-time flow;
//! * `c3, c4, c5` — sub-gaussian tail constants, available only for iid
//!   noise with a per-coordinate sub-gaussian parameter;
//! * `c7 = (u + 2 u l) c1`, `c8 = (u + 2 u l) c2` — the same scales after
//!   multiplying through the measure comparison;
//! * `c5' = 2 (c7 + c8)` and `c6' = D u + c7 + c8` — aggregated forms used
//!   by the constant-step corollaries.
//!
//! The per-interval deviation of the iteration from the projected flow
//! restarted at the interval start obeys
//! `E[dev] <= c1 sqrt(sum alpha_j^2) + c2 sqrt(max alpha_j)`, and the
//! weighted Goldstein measure over the horizon is bounded by
//! [`BoundConstants::weighted_measure_bound`].

use thiserror::Error;

use crate::engine::TimeGrid;
use crate::linalg::KahanSum;
use crate::problems::Problem;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("missing constant: {0}")]
    MissingConstant(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which property of the noise the bounds lean on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assumption {
    /// iid with per-coordinate sub-gaussian parameter `sigma_hat`:
    /// `c1 = e^l sqrt(n) sigma_hat`, tail constants available.
    SubGaussianIid,
    /// iid with a second-moment bound `sigma`: `c1 = e^l sigma`.
    BoundedSecondMomentIid,
    /// L-mixing with magnitude `Psi_2` (covers correlated noise):
    /// `c1 = 2 l e^l Psi_2`.
    LMixing,
}

/// Problem constants with every derived bound coefficient.
#[derive(Clone, Copy, Debug)]
pub struct BoundConstants {
    pub assumption: Assumption,
    pub lipschitz: f64,
    pub grad_bound: f64,
    pub diameter: f64,
    pub inner_radius: f64,
    pub dim: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    pub c7: f64,
    pub c8: f64,
    pub c5_prime: f64,
    pub c6_prime: f64,
}

/// High-probability uniform bound at a constant step size.
#[derive(Clone, Copy, Debug)]
pub struct HpBound {
    /// Per-event confidence after the union over restarts.
    pub delta_hat: f64,
    /// Tail coefficient `q(delta_hat)`.
    pub q: f64,
    /// Goldstein radius `q alpha^{1/4}` at which the measure is read.
    pub radius: f64,
    /// Bound on the weighted measure holding with probability `1 - delta`.
    pub bound: f64,
}

impl BoundConstants {
    pub fn for_problem(problem: &Problem, assumption: Assumption) -> Result<Self, BoundsError> {
        let l = problem.lipschitz();
        let u = problem.grad_bound();
        let d = problem.set().diameter();
        let r = problem.set().inner_radius();
        let n = problem.dim();
        if r <= 0.0 {
            return Err(BoundsError::InvalidInput(
                "the set must contain a ball of positive radius around the origin".into(),
            ));
        }
        let noise = problem.noise_constants();
        if !problem.noise().is_iid() && assumption != Assumption::LMixing {
            return Err(BoundsError::InvalidInput(
                "correlated noise only supports the L-mixing assumption".into(),
            ));
        }
        let el = l.exp();
        let c1 = match assumption {
            Assumption::SubGaussianIid => {
                let sh = noise.sigma_hat.ok_or_else(|| {
                    BoundsError::MissingConstant(
                        "noise has no per-coordinate sub-gaussian parameter".into(),
                    )
                })?;
                el * (n as f64).sqrt() * sh
            }
            Assumption::BoundedSecondMomentIid => el * noise.sigma,
            Assumption::LMixing => 2.0 * l * el * noise.psi2,
        };
        let c2 = (u + (2.0 / r * u * (d * u + d * d)).sqrt()) * el;
        let (c3, c4, c5) = match (assumption, noise.sigma_hat) {
            (Assumption::SubGaussianIid, Some(sh)) => {
                let e2l = (2.0 * l).exp();
                (
                    Some(2.0 * 2.0_f64.sqrt() * e2l * sh * d),
                    Some(4.0 * e2l * sh * sh),
                    Some(e2l * (n as f64 + 1.0) * sh * sh),
                )
            }
            _ => (None, None, None),
        };
        let amp = u + 2.0 * u * l;
        let c7 = amp * c1;
        let c8 = amp * c2;
        Ok(BoundConstants {
            assumption,
            lipschitz: l,
            grad_bound: u,
            diameter: d,
            inner_radius: r,
            dim: n,
            c1,
            c2,
            c3,
            c4,
            c5,
            c7,
            c8,
            c5_prime: 2.0 * (c7 + c8),
            c6_prime: d * u + c7 + c8,
        })
    }

    /// Expected deviation of the iterates from the restarted flow over one
    /// analysis interval with the given step sizes:
    /// `c1 sqrt(sum alpha^2) + c2 sqrt(max alpha)`.
    pub fn interval_deviation_bound(&self, alphas: &[f64]) -> f64 {
        let sumsq: f64 = alphas.iter().map(|a| a * a).sum();
        let max = alphas.iter().fold(0.0_f64, |m, &a| m.max(a));
        self.c1 * sumsq.sqrt() + self.c2 * max.sqrt()
    }

    /// Constant-step simplification `(c1 + c2) sqrt(alpha)`, valid because
    /// a unit interval holds at most `1/alpha` steps.
    pub fn constant_step_deviation(&self, alpha: f64) -> f64 {
        (self.c1 + self.c2) * alpha.sqrt()
    }

    /// Tail version of the interval deviation, holding with probability
    /// `1 - delta` (sub-gaussian iid noise only).
    pub fn interval_deviation_tail_bound(
        &self,
        alphas: &[f64],
        delta: f64,
    ) -> Result<f64, BoundsError> {
        let (c3, c4, c5) = self.tail_constants()?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BoundsError::InvalidInput(format!(
                "confidence level must be in (0, 1), got {delta}"
            )));
        }
        let sumsq: f64 = alphas.iter().map(|a| a * a).sum();
        let max = alphas.iter().fold(0.0_f64, |m, &a| m.max(a));
        let log_term = (2.0 / delta).ln();
        let inner = c3 * log_term.sqrt() * sumsq.sqrt() + (c4 * log_term + c5) * sumsq;
        Ok(inner.sqrt() + self.c2 * max.sqrt())
    }

    /// Bound on the step-weighted average of the squared Goldstein measure
    /// (at the per-step deviation radii) over the whole horizon:
    /// `(sum_i [c7 sqrt(sum_{j in i} alpha_j^2) + c8 sqrt(max_{j in i}
    /// alpha_j)] + D u) / tau_N`.
    pub fn weighted_measure_bound(&self, grid: &TimeGrid) -> f64 {
        let mut acc = KahanSum::default();
        for i in 0..grid.num_intervals() {
            let steps = grid.interval_steps(i);
            let alphas = &grid.alphas()[steps];
            acc.add(self.c7 * alphas.iter().map(|a| a * a).sum::<f64>().sqrt());
            acc.add(self.c8 * alphas.iter().fold(0.0_f64, |m, &a| m.max(a)).sqrt());
        }
        acc.add(self.diameter * self.grad_bound);
        acc.value() / grid.horizon()
    }

    /// Closed form of [`Self::weighted_measure_bound`] for a constant step.
    ///
    /// An interval holds `m = max{k : k alpha <= 1}` steps; evaluating the
    /// membership by multiplication keeps this in lockstep with the
    /// compensated summation used by the grid construction.
    pub fn constant_step_measure_bound(&self, alpha: f64, n: usize) -> f64 {
        let mut m = 1usize;
        while (m + 1) as f64 * alpha <= 1.0 {
            m += 1;
        }
        let m = m.min(n);
        let full = n / m;
        let rem = n % m;
        let per_full = self.c7 * alpha * (m as f64).sqrt() + self.c8 * alpha.sqrt();
        let mut total = full as f64 * per_full;
        if rem > 0 {
            total += self.c7 * alpha * (rem as f64).sqrt() + self.c8 * alpha.sqrt();
        }
        (total + self.diameter * self.grad_bound) / (alpha * n as f64)
    }

    /// High-probability uniform bound for a constant step: with
    /// probability `1 - delta`, the average over `k < N` of the squared
    /// measure at the fixed Goldstein radius `q alpha^{1/4}` is at most
    /// `2 q alpha^{1/4} + (q + D u) / (alpha N)`, where `q` folds the
    /// tail constants at the union-adjusted confidence
    /// `delta_hat = delta / (2 alpha N + 1)`.
    pub fn uniform_tail_bound(
        &self,
        alpha: f64,
        n: usize,
        delta: f64,
    ) -> Result<HpBound, BoundsError> {
        let (c3, c4, c5) = self.tail_constants()?;
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(BoundsError::InvalidInput(format!(
                "step size must be in (0, 1/2], got {alpha}"
            )));
        }
        if n == 0 || !(delta > 0.0 && delta < 1.0) {
            return Err(BoundsError::InvalidInput(
                "need n >= 1 and confidence in (0, 1)".into(),
            ));
        }
        let horizon = alpha * n as f64;
        let delta_hat = delta / (2.0 * horizon + 1.0);
        let log_term = (2.0 / delta_hat).ln();
        let amp = self.grad_bound * (1.0 + 2.0 * self.lipschitz);
        let q = amp * (c3 * log_term.sqrt() + c4 * log_term + c5).sqrt() + amp * self.c8;
        let radius = q * alpha.powf(0.25);
        let bound = 2.0 * radius + (q + self.diameter * self.grad_bound) / horizon;
        Ok(HpBound {
            delta_hat,
            q,
            radius,
            bound,
        })
    }

    fn tail_constants(&self) -> Result<(f64, f64, f64), BoundsError> {
        match (self.c3, self.c4, self.c5) {
            (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
            _ => Err(BoundsError::MissingConstant(
                "tail bounds need iid sub-gaussian noise constants".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::StepSchedule;
    use crate::geometry::ConvexSet;
    use crate::problems::{NoiseSpec, Objective};

    fn unit_problem(noise: NoiseSpec) -> Problem {
        let set = ConvexSet::new_box(vec![-1.0], vec![1.0]).unwrap();
        Problem::additive(set, Objective::Linear { g: vec![-1.0] }, noise).unwrap()
    }

    #[test]
    fn frozen_constant_values() {
        // l = 1, u = 1, D = 2, r = 1, n = 1, sigma_hat = 1.
        let p = unit_problem(NoiseSpec::Gaussian { sigma_hat: 1.0 });
        let c = BoundConstants::for_problem(&p, Assumption::SubGaussianIid).unwrap();
        let e = std::f64::consts::E;
        assert!((c.c1 - e).abs() < 1e-12);
        let c2_expected = (1.0 + 12.0_f64.sqrt()) * e;
        assert!((c.c2 - c2_expected).abs() < 1e-12);
        assert!((c.c3.unwrap() - 4.0 * 2.0_f64.sqrt() * e * e).abs() < 1e-11);
        assert!((c.c4.unwrap() - 4.0 * e * e).abs() < 1e-11);
        assert!((c.c5.unwrap() - 2.0 * e * e).abs() < 1e-11);
        assert!((c.c7 - 3.0 * e).abs() < 1e-12);
        assert!((c.c8 - 3.0 * c2_expected).abs() < 1e-11);
        assert!((c.c5_prime - 2.0 * (c.c7 + c.c8)).abs() < 1e-12);
        assert!((c.c6_prime - (2.0 + c.c7 + c.c8)).abs() < 1e-12);
    }

    #[test]
    fn assumption_variants_change_c1() {
        let e = std::f64::consts::E;
        // Rademacher magnitude 2 in dimension 1: sigma_hat = sigma = 2.
        let p = unit_problem(NoiseSpec::Rademacher { magnitude: 2.0 });
        let a1 = BoundConstants::for_problem(&p, Assumption::SubGaussianIid).unwrap();
        let a2 = BoundConstants::for_problem(&p, Assumption::BoundedSecondMomentIid).unwrap();
        assert!((a1.c1 - 2.0 * e).abs() < 1e-12);
        assert!((a2.c1 - 2.0 * e).abs() < 1e-12);
        assert!(a2.c3.is_none());

        let p = unit_problem(NoiseSpec::Ar1 { rho: 0.5, sigma_hat: 1.0 });
        let a3 = BoundConstants::for_problem(&p, Assumption::LMixing).unwrap();
        let psi2 = 2.309_401_076_758_503_4;
        assert!((a3.c1 - 2.0 * e * psi2).abs() < 1e-12);
        assert!(BoundConstants::for_problem(&p, Assumption::SubGaussianIid).is_err());
        assert!(BoundConstants::for_problem(&p, Assumption::BoundedSecondMomentIid).is_err());
        assert!(a3.c3.is_none());
        assert!(matches!(
            a3.uniform_tail_bound(0.1, 100, 0.1),
            Err(BoundsError::MissingConstant(_))
        ));
    }

    #[test]
    fn origin_ball_is_required() {
        let set = ConvexSet::new_box(vec![0.0], vec![1.0]).unwrap();
        let p = Problem::additive(set, Objective::Linear { g: vec![1.0] }, NoiseSpec::Zero)
            .unwrap();
        assert!(matches!(
            BoundConstants::for_problem(&p, Assumption::SubGaussianIid),
            Err(BoundsError::InvalidInput(_))
        ));
    }

    #[test]
    fn deviation_bounds_dual_path() {
        let p = unit_problem(NoiseSpec::Gaussian { sigma_hat: 0.5 });
        let c = BoundConstants::for_problem(&p, Assumption::SubGaussianIid).unwrap();
        let alphas = [0.3, 0.25, 0.125, 0.3];
        let sumsq: f64 = alphas.iter().map(|a| a * a).sum();
        let expected = c.c1 * sumsq.sqrt() + c.c2 * 0.3_f64.sqrt();
        assert!((c.interval_deviation_bound(&alphas) - expected).abs() < 1e-12);
        assert!(
            (c.constant_step_deviation(0.25) - (c.c1 + c.c2) * 0.5).abs() < 1e-12
        );
        let delta = 0.05_f64;
        let log_term = (2.0 / delta).ln();
        let inner = c.c3.unwrap() * log_term.sqrt() * sumsq.sqrt()
            + (c.c4.unwrap() * log_term + c.c5.unwrap()) * sumsq;
        let expected_tail = inner.sqrt() + c.c2 * 0.3_f64.sqrt();
        let got = c.interval_deviation_tail_bound(&alphas, delta).unwrap();
        assert!((got - expected_tail).abs() < 1e-12);
        assert!(c.interval_deviation_tail_bound(&alphas, 0.0).is_err());
    }

    #[test]
    fn constant_step_closed_form_matches_grid_sum() {
        let p = unit_problem(NoiseSpec::Gaussian { sigma_hat: 1.0 });
        let c = BoundConstants::for_problem(&p, Assumption::SubGaussianIid).unwrap();
        for (alpha, n) in [
            (0.375, 9usize),
            (0.25, 40),
            (0.5, 4),
            (0.01, 1000),
            (1.0 / 3.0, 50),
            (0.19, 7), // horizon shorter than the nominal interval count
        ] {
            let grid = TimeGrid::new(&StepSchedule::Constant { alpha }, n).unwrap();
            let from_grid = c.weighted_measure_bound(&grid);
            let closed = c.constant_step_measure_bound(alpha, n);
            assert!(
                (from_grid - closed).abs() <= 1e-12 * from_grid.abs().max(1.0),
                "alpha={alpha}, n={n}: grid {from_grid} vs closed {closed}"
            );
        }
    }

    #[test]
    fn uniform_tail_bound_arithmetic() {
        let p = unit_problem(NoiseSpec::Gaussian { sigma_hat: 1.0 });
        let c = BoundConstants::for_problem(&p, Assumption::SubGaussianIid).unwrap();
        let hp = c.uniform_tail_bound(0.25, 100, 0.1).unwrap();
        let delta_hat = 0.1 / (2.0 * 25.0 + 1.0);
        assert!((hp.delta_hat - delta_hat).abs() < 1e-15);
        let log_term = (2.0 / delta_hat).ln();
        let amp = 3.0; // u (1 + 2 l) with u = l = 1
        let q = amp
            * (c.c3.unwrap() * log_term.sqrt() + c.c4.unwrap() * log_term + c.c5.unwrap()).sqrt()
            + amp * c.c8;
        assert!((hp.q - q).abs() < 1e-11);
        assert!((hp.radius - q * 0.25_f64.powf(0.25)).abs() < 1e-11);
        let bound = 2.0 * hp.radius + (q + 2.0) / 25.0;
        assert!((hp.bound - bound).abs() < 1e-11);
        assert!(c.uniform_tail_bound(0.6, 100, 0.1).is_err());
        assert!(c.uniform_tail_bound(0.25, 0, 0.1).is_err());
    }
}
