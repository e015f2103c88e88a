//! Projected stochastic gradient descent on compact convex sets, plus the
//! measurement apparatus needed to study how close its iterates come to
//! stationarity in the Goldstein sense.
//!
//! The crate is organized around one experiment pipeline:
//!
//! 1. [`geometry`] — boxes, balls and bounded polytopes with exact
//!    projections, normal/tangent cone projections, and Goldstein cones
//!    (convex hulls of normal cones over an epsilon-ball) with both exact
//!    and sampling-oracle distance evaluations.
//! 2. [`problems`] — stochastic objectives `f(x, z)` with Lipschitz mean
//!    gradients and pluggable noise processes (sub-Gaussian IID, bounded
//!    IID, scaled Rademacher, filtered AR(1)).
//! 3. [`engine`] — step schedules, the derived time grid with its unit-length
//!    break points, and the projected SGD / projected mean-gradient loops.
//! 4. [`flow`] — projected-Euler integration of the mean flow, the restarted
//!    ("jumping") flow built on the break points, and the per-iterate
//!    deviation radii `b_k` it yields.
//! 5. [`stationarity`] — measure series: Goldstein-cone distances at chosen
//!    radii, projected gradient mappings, Moreau gradient norms, tangent
//!    residuals, and their step-weighted averages.
//! 6. [`bounds`] — the closed-form constants `c1..c8` and the finite-time
//!    expectation / high-probability bounds the measures are compared to.
//!
//! Batch work (seed fan-outs, per-interval flow integration) goes through
//! [`par`], which uses rayon when the default `parallel` feature is enabled
//! and a sequential fallback otherwise; results are merged by index so both
//! paths are deterministic.

pub mod bounds;
pub mod engine;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod nnls;
pub mod par;
pub mod problems;
pub mod seeds;
pub mod stationarity;
