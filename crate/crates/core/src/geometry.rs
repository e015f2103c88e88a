//! Compact convex sets and their cone calculus.
//!
//! Three set families are supported: axis-aligned boxes, Euclidean balls,
//! and bounded polytopes `{y : Ay <= b}`. Every set caches its diameter `D`
//! and the inner radius `r` of the largest origin-centered ball it contains
//! (`r = 0` when the origin is not strictly inside).
//!
//! The cone operations implement, for a closed convex set `X`:
//!
//! * projection `Pi_X`, with the variational characterization
//!   `y* = Pi_X(x)  <=>  x - y* in N_X(y*)`;
//! * projections onto the normal cone `N_X(x)` and tangent cone `T_X(x)`,
//!   related through the Moreau decomposition `g = Pi_T(g) + Pi_N(g)` with
//!   `Pi_T(g) ⟂ Pi_N(g)`;
//! * the Goldstein cone of the indicator at radius `eps`, i.e. the convex
//!   hull of all normal cones at points of `X` within `eps` of `x` (the
//!   hull of a union of convex cones is their Minkowski sum), together with
//!   exact distances to it and a sampling oracle used to validate them.
//!
//! Box and ball Goldstein cones are exact. For polytopes the cone collects
//! rows by hyperplane distance, which can over-include faces whose nearest
//! face point lies farther than `eps`; the resulting distance is a lower
//! bound on the true one, so comparisons against the (upper-bounding)
//! sampling oracle remain one-sided.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use thiserror::Error;

use crate::linalg::{self, Mat};
use crate::nnls;

/// Membership slack used when an operation requires `x` to lie in the set.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Activity slack when collecting active faces for normal cones.
const ACTIVE_TOL: f64 = 1e-9;
/// Iterative polytope projections aim for this accuracy.
const PROJECTION_TOL: f64 = 1e-10;
/// Vertex-enumeration guard: subsets examined during polytope construction.
const MAX_VERTEX_SUBSETS: usize = 200_000;
/// Grid resolution used to deduplicate oracle generator directions. Must
/// stay well below the 1e-3 cross-validation tolerance: near a cap rim the
/// retained representative can sit a full cell away from the extreme
/// sampled direction, and that angular gap enters cone distances at first
/// order.
const ORACLE_DEDUP_RES: f64 = 5e-4;

/// Cap on the rim-refinement loop in the sampling oracle. Convergence of
/// the chord length to eps is geometric (contraction ratio around 1/4 for
/// ball caps), so a dozen passes leave a polar shortfall far below the
/// dedup resolution; a stall check exits earlier in the common case.
const ORACLE_REFINE_PASSES: usize = 12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point is not in the set (violation {violation:.3e})")]
    PointNotInSet { violation: f64 },
}

#[derive(Clone, Debug)]
enum SetKind {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Polytope {
        a: Mat,
        b: Vec<f64>,
        row_norms: Vec<f64>,
        vertices: Vec<Vec<f64>>,
    },
}

/// A compact convex set with cached diameter and origin-centered inner radius.
#[derive(Clone, Debug)]
pub struct ConvexSet {
    kind: SetKind,
    dim: usize,
    diameter: f64,
    inner_radius: f64,
}

impl ConvexSet {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(GeometryError::InvalidInput(
                "box bounds must be nonempty and of equal length".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(GeometryError::InvalidInput(format!(
                    "box requires finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        let dim = lower.len();
        let diameter = linalg::dist(&upper, &lower);
        let inner_radius = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (-l).min(*u))
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        Ok(ConvexSet {
            kind: SetKind::Box { lower, upper },
            dim,
            diameter,
            inner_radius,
        })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        if center.is_empty() || !radius.is_finite() || radius <= 0.0 {
            return Err(GeometryError::InvalidInput(
                "ball requires a nonempty center and radius > 0".into(),
            ));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::InvalidInput("ball center must be finite".into()));
        }
        let dim = center.len();
        let inner_radius = (radius - linalg::norm(&center)).max(0.0);
        Ok(ConvexSet {
            kind: SetKind::Ball { center, radius },
            dim,
            diameter: 2.0 * radius,
            inner_radius,
        })
    }

    /// `{y : Ay <= b}`, which must be bounded with nonempty interior.
    ///
    /// Boundedness is certified by checking that every signed coordinate
    /// direction lies in the conical hull of the rows of `A` (equivalent to
    /// a trivial recession cone). Vertices are enumerated from row subsets;
    /// the diameter is the exact pairwise maximum in dimension <= 3 and the
    /// diagonal of the vertex bounding box above that.
    pub fn new_polytope(rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, GeometryError> {
        if rows.is_empty() || rows.len() != b.len() {
            return Err(GeometryError::InvalidInput(
                "polytope requires as many rows as offsets".into(),
            ));
        }
        let a = Mat::from_rows(&rows).ok_or_else(|| {
            GeometryError::InvalidInput("constraint rows must share a positive length".into())
        })?;
        let dim = a.cols();
        if b.iter().any(|v| !v.is_finite()) || rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidInput("polytope data must be finite".into()));
        }
        let row_norms: Vec<f64> = (0..a.rows()).map(|i| linalg::norm(a.row(i))).collect();
        if row_norms.iter().any(|&n| n <= 1e-12) {
            return Err(GeometryError::InvalidInput("zero constraint row".into()));
        }

        // Recession cone is trivial iff cone(rows) covers every +/- e_i.
        let unit_rows: Vec<Vec<f64>> = (0..a.rows())
            .map(|i| linalg::scaled(a.row(i), 1.0 / row_norms[i]))
            .collect();
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let e = linalg::unit(dim, i, sign);
                if nnls::cone_distance(&unit_rows, &e) > 1e-8 {
                    return Err(GeometryError::InvalidInput(
                        "polytope is unbounded (rows do not positively span)".into(),
                    ));
                }
            }
        }

        let vertices = enumerate_vertices(&a, &b, &row_norms)?;
        if vertices.is_empty() {
            return Err(GeometryError::InvalidInput("polytope has no vertices".into()));
        }
        let mut centroid = vec![0.0; dim];
        for v in &vertices {
            linalg::axpy(1.0 / vertices.len() as f64, v, &mut centroid);
        }
        let centroid_margin = (0..a.rows())
            .map(|j| (b[j] - linalg::dot(a.row(j), &centroid)) / row_norms[j])
            .fold(f64::INFINITY, f64::min);
        if centroid_margin <= 1e-9 {
            return Err(GeometryError::InvalidInput(
                "polytope interior is empty or degenerate".into(),
            ));
        }

        let diameter = if dim <= 3 {
            let mut best = 0.0_f64;
            for i in 0..vertices.len() {
                for j in (i + 1)..vertices.len() {
                    best = best.max(linalg::dist(&vertices[i], &vertices[j]));
                }
            }
            best
        } else {
            let mut lo = vertices[0].clone();
            let mut hi = vertices[0].clone();
            for v in &vertices {
                for i in 0..dim {
                    lo[i] = lo[i].min(v[i]);
                    hi[i] = hi[i].max(v[i]);
                }
            }
            linalg::dist(&hi, &lo)
        };
        let origin_margin = (0..a.rows())
            .map(|j| b[j] / row_norms[j])
            .fold(f64::INFINITY, f64::min);
        Ok(ConvexSet {
            kind: SetKind::Polytope {
                a,
                b,
                row_norms,
                vertices,
            },
            dim,
            diameter,
            inner_radius: origin_margin.max(0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cached diameter `D` (exact for boxes and balls; for polytopes exact
    /// in dimension <= 3 and a vertex-bounding-box over-estimate above).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Radius of the largest origin-centered ball inside the set.
    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// Polytope vertices, when the set is a polytope.
    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        match &self.kind {
            SetKind::Polytope { vertices, .. } => Some(vertices),
            _ => None,
        }
    }

    /// Lower and upper bounds, when the set is a box.
    pub fn bounds(&self) -> Option<(&[f64], &[f64])> {
        match &self.kind {
            SetKind::Box { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }

    /// Signed worst-case constraint violation; nonpositive inside the set.
    pub fn violation(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        match &self.kind {
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(xi, (l, u))| (l - xi).max(xi - u))
                .fold(f64::NEG_INFINITY, f64::max),
            SetKind::Ball { center, radius } => linalg::dist(x, center) - radius,
            SetKind::Polytope {
                a, b, row_norms, ..
            } => (0..a.rows())
                .map(|j| (linalg::dot(a.row(j), x) - b[j]) / row_norms[j])
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.violation(x) <= tol
    }

    fn require_member(&self, x: &[f64]) -> Result<(), GeometryError> {
        let violation = self.violation(x);
        if violation > MEMBERSHIP_TOL {
            Err(GeometryError::PointNotInSet { violation })
        } else {
            Ok(())
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim, "dimension mismatch");
        match &self.kind {
            SetKind::Box { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            SetKind::Ball { center, radius } => {
                let d = linalg::dist(y, center);
                if d <= *radius {
                    y.to_vec()
                } else {
                    let s = radius / d;
                    y.iter()
                        .zip(center)
                        .map(|(v, c)| c + s * (v - c))
                        .collect()
                }
            }
            SetKind::Polytope {
                a, b, row_norms, ..
            } => project_polytope(a, b, row_norms, y),
        }
    }

    /// Projection of `g` onto the normal cone `N_X(x)`.
    pub fn normal_cone_project(&self, x: &[f64], g: &[f64]) -> Result<Vec<f64>, GeometryError> {
        assert_eq!(g.len(), self.dim, "dimension mismatch");
        self.require_member(x)?;
        match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut w = vec![0.0; self.dim];
                for i in 0..self.dim {
                    let at_upper = upper[i] - x[i] <= ACTIVE_TOL;
                    let at_lower = x[i] - lower[i] <= ACTIVE_TOL;
                    if at_upper && g[i] > 0.0 {
                        w[i] = g[i];
                    } else if at_lower && g[i] < 0.0 {
                        w[i] = g[i];
                    }
                }
                Ok(w)
            }
            SetKind::Ball { center, radius } => {
                let d = linalg::dist(x, center);
                if radius - d <= ACTIVE_TOL && d > 0.0 {
                    let axis: Vec<f64> = x.iter().zip(center).map(|(a, c)| (a - c) / d).collect();
                    let t = linalg::dot(g, &axis).max(0.0);
                    Ok(linalg::scaled(&axis, t))
                } else {
                    Ok(vec![0.0; self.dim])
                }
            }
            SetKind::Polytope {
                a, b, row_norms, ..
            } => {
                let active: Vec<Vec<f64>> = (0..a.rows())
                    .filter(|&j| (b[j] - linalg::dot(a.row(j), x)) / row_norms[j] <= ACTIVE_TOL)
                    .map(|j| linalg::scaled(a.row(j), 1.0 / row_norms[j]))
                    .collect();
                if active.is_empty() {
                    Ok(vec![0.0; self.dim])
                } else {
                    Ok(nnls::solve(&active, g).fitted)
                }
            }
        }
    }

    /// Unit generators of the normal cone at `p`, a point of the set
    /// (typically a projection output). Interior points yield none.
    ///
    /// The sampling oracle pools these instead of the raw chord direction
    /// `u - p`: the chord is a conic combination of them, so pooling the
    /// generators spans at least as much, and for polytopes it avoids
    /// amplifying projection error — when `u` sits barely outside a face,
    /// normalizing `u - p` turns a 1e-12 position error into a direction
    /// rotation large enough for the pooled NNLS to undercut the exact
    /// cone distance.
    fn boundary_normals(&self, p: &[f64]) -> Vec<Vec<f64>> {
        match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut gens = Vec::new();
                for i in 0..self.dim {
                    if upper[i] - p[i] <= ACTIVE_TOL {
                        gens.push(linalg::unit(self.dim, i, 1.0));
                    }
                    if p[i] - lower[i] <= ACTIVE_TOL {
                        gens.push(linalg::unit(self.dim, i, -1.0));
                    }
                }
                gens
            }
            SetKind::Ball { center, radius } => {
                let d = linalg::dist(p, center);
                if radius - d <= ACTIVE_TOL && d > 0.0 {
                    vec![p.iter().zip(center).map(|(a, c)| (a - c) / d).collect()]
                } else {
                    Vec::new()
                }
            }
            SetKind::Polytope {
                a, b, row_norms, ..
            } => (0..a.rows())
                .filter(|&j| (b[j] - linalg::dot(a.row(j), p)) / row_norms[j] <= ACTIVE_TOL)
                .map(|j| linalg::scaled(a.row(j), 1.0 / row_norms[j]))
                .collect(),
        }
    }

    /// Projection of `g` onto the tangent cone `T_X(x)`, via the Moreau
    /// decomposition `Pi_T(g) = g - Pi_N(g)`.
    pub fn tangent_cone_project(&self, x: &[f64], g: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let n = self.normal_cone_project(x, g)?;
        Ok(linalg::sub(g, &n))
    }

    /// Distance from `v` to the normal cone at `x` (equals `||Pi_T(v)||`).
    pub fn dist_to_normal_cone(&self, x: &[f64], v: &[f64]) -> Result<f64, GeometryError> {
        Ok(linalg::norm(&self.tangent_cone_project(x, v)?))
    }

    /// Goldstein cone at `x` with radius `eps`: the convex hull of all
    /// normal cones at points of the set within `eps` of `x`.
    pub fn goldstein_cone(&self, x: &[f64], eps: f64) -> Result<ConeDescription, GeometryError> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(GeometryError::InvalidInput("eps must be finite and >= 0".into()));
        }
        self.require_member(x)?;
        match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut gens = Vec::new();
                for i in 0..self.dim {
                    if upper[i] - x[i] <= eps {
                        gens.push(linalg::unit(self.dim, i, 1.0));
                    }
                    if x[i] - lower[i] <= eps {
                        gens.push(linalg::unit(self.dim, i, -1.0));
                    }
                }
                Ok(ConeDescription::exact(if gens.is_empty() {
                    ConeKind::Zero
                } else {
                    ConeKind::Generators(gens)
                }))
            }
            SetKind::Ball { center, radius } => {
                self.ball_goldstein_cone(center, *radius, x, eps)
            }
            SetKind::Polytope {
                a, b, row_norms, ..
            } => {
                let gens: Vec<Vec<f64>> = (0..a.rows())
                    .filter(|&j| (b[j] - linalg::dot(a.row(j), x)) / row_norms[j] <= eps)
                    .map(|j| linalg::scaled(a.row(j), 1.0 / row_norms[j]))
                    .collect();
                Ok(ConeDescription::exact(if gens.is_empty() {
                    ConeKind::Zero
                } else {
                    ConeKind::Generators(gens)
                }))
            }
        }
    }

    fn ball_goldstein_cone(
        &self,
        center: &[f64],
        radius: f64,
        x: &[f64],
        eps: f64,
    ) -> Result<ConeDescription, GeometryError> {
        let d = linalg::dist(x, center);
        if radius - d > eps {
            return Ok(ConeDescription::exact(ConeKind::Zero));
        }
        if self.dim == 1 {
            // Interval: check each endpoint separately.
            let mut gens = Vec::new();
            if (center[0] + radius) - x[0] <= eps {
                gens.push(vec![1.0]);
            }
            if x[0] - (center[0] - radius) <= eps {
                gens.push(vec![-1.0]);
            }
            return Ok(ConeDescription::exact(if gens.is_empty() {
                ConeKind::Zero
            } else {
                ConeKind::Generators(gens)
            }));
        }
        if eps >= radius + d {
            // Every boundary normal is reachable; the hull is all of space,
            // which the axis-aligned generator set represents exactly.
            let mut gens = Vec::with_capacity(2 * self.dim);
            for i in 0..self.dim {
                gens.push(linalg::unit(self.dim, i, 1.0));
                gens.push(linalg::unit(self.dim, i, -1.0));
            }
            return Ok(ConeDescription::exact(ConeKind::Generators(gens)));
        }
        // Law of cosines in the (center, x, boundary point) triangle gives
        // the angular radius of the reachable boundary cap.
        let cos_theta = ((radius * radius + d * d - eps * eps) / (2.0 * radius * d)).clamp(-1.0, 1.0);
        let axis: Vec<f64> = x.iter().zip(center).map(|(a, c)| (a - c) / d).collect();
        if cos_theta >= 0.0 {
            Ok(ConeDescription::exact(ConeKind::Revolution {
                axis,
                half_angle: cos_theta.acos(),
            }))
        } else {
            // The reachable direction cap exceeds a hemisphere. Its
            // positive hull is then all of space: any plane through the
            // axis meets the cap in an arc wider than pi, and such an arc
            // positively spans its plane. Reuse the axis-aligned
            // generator set as the exact whole-space representation.
            let mut gens = Vec::with_capacity(2 * self.dim);
            for i in 0..self.dim {
                gens.push(linalg::unit(self.dim, i, 1.0));
                gens.push(linalg::unit(self.dim, i, -1.0));
            }
            Ok(ConeDescription::exact(ConeKind::Generators(gens)))
        }
    }

    /// Distance from `v` to the Goldstein cone at `x` with radius `eps`.
    pub fn goldstein_distance(&self, x: &[f64], eps: f64, v: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.goldstein_cone(x, eps)?.distance(v))
    }

    /// Sampling estimate of the Goldstein-cone distance.
    ///
    /// Draws `n_samples` points `u` uniformly from the `eps`-sphere around
    /// `x`; each projection `p = Pi_X(u)` satisfies `||p - x|| <= eps`
    /// (projections are nonexpansive), so the unit generators of
    /// `N_X(p)` pooled across samples span a sub-cone of the true
    /// Goldstein cone. The returned distance is therefore an upper bound
    /// that converges from above as the sample count grows. Sphere
    /// sampling (rather than ball sampling) matters: every reachable
    /// normal direction `nu` at a boundary point `p` is hit exactly by
    /// some sphere point `p + t nu`, while interior draws waste samples
    /// and under-cover cap rims at first order in the angular gap. A few
    /// rim-refinement passes per sample close the remaining first-order
    /// gap in dimension three and up.
    pub fn goldstein_distance_oracle(
        &self,
        x: &[f64],
        eps: f64,
        v: &[f64],
        n_samples: usize,
        seed: u64,
    ) -> Result<f64, GeometryError> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(GeometryError::InvalidInput("eps must be finite and >= 0".into()));
        }
        self.require_member(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<Vec<f64>> = Vec::new();
        let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
        let tiny = 1e-13 * eps.max(1.0);
        for _ in 0..n_samples {
            let mut u = sample_on_sphere(&mut rng, x, eps);
            // Walk each sample toward the chord-eps rim: project, then
            // re-push the projection back onto the sphere along its own
            // chord and project again. Every iterate stays in the eps-ball
            // intersected with the set, and the chord length converges
            // geometrically to eps, so the pool picks up the extreme
            // normal directions that bind the cone distance instead of
            // stopping one sample-spacing short of them.
            let mut last_chord = 0.0;
            for _ in 0..ORACLE_REFINE_PASSES {
                let p = self.project(&u);
                for g in self.boundary_normals(&p) {
                    let key: Vec<i64> =
                        g.iter().map(|c| (c / ORACLE_DEDUP_RES).round() as i64).collect();
                    if seen.insert(key, ()).is_none() {
                        pool.push(g);
                    }
                }
                let chord = linalg::sub(&p, x);
                let m = linalg::norm(&chord);
                if m <= tiny || m >= eps * (1.0 - 1e-12) || m <= last_chord * (1.0 + 1e-9) {
                    break;
                }
                last_chord = m;
                u = x.to_vec();
                linalg::axpy(eps / m, &chord, &mut u);
            }
        }
        Ok(nnls::cone_distance_active_set(&pool, v))
    }

    /// Pseudo-uniform sample from the set (exact for boxes and balls; for
    /// polytopes a Dirichlet-weighted vertex mix, adequate for witnesses).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| rng.random_range(*l..*u))
                .collect(),
            SetKind::Ball { center, radius } => sample_in_ball(rng, center, *radius),
            SetKind::Polytope { vertices, .. } => {
                let mut weights: Vec<f64> = (0..vertices.len())
                    .map(|_| -(rng.random_range(1e-12..1.0_f64)).ln())
                    .collect();
                let total: f64 = weights.iter().sum();
                for w in &mut weights {
                    *w /= total;
                }
                let mut p = vec![0.0; self.dim];
                for (w, v) in weights.iter().zip(vertices) {
                    linalg::axpy(*w, v, &mut p);
                }
                p
            }
        }
    }
}

/// Description of a closed convex cone.
#[derive(Clone, Debug)]
pub struct ConeDescription {
    pub kind: ConeKind,
    /// True when the cone came from a sampled fallback rather than a closed
    /// form; distances to it are then upper bounds on the true distance.
    pub approximate: bool,
}

#[derive(Clone, Debug)]
pub enum ConeKind {
    /// The degenerate cone `{0}`.
    Zero,
    /// Conical hull of unit generators.
    Generators(Vec<Vec<f64>>),
    /// Revolution (circular) cone `{w : w . axis >= ||w|| cos(half_angle)}`
    /// with `half_angle <= pi/2`.
    Revolution { axis: Vec<f64>, half_angle: f64 },
}

impl ConeDescription {
    fn exact(kind: ConeKind) -> Self {
        ConeDescription {
            kind,
            approximate: false,
        }
    }

    /// Euclidean distance from `v` to the cone.
    pub fn distance(&self, v: &[f64]) -> f64 {
        match &self.kind {
            ConeKind::Zero => linalg::norm(v),
            ConeKind::Revolution { axis, half_angle } => {
                revolution_cone_distance(axis, *half_angle, v)
            }
            ConeKind::Generators(gens) => {
                if gens.is_empty() {
                    return linalg::norm(v);
                }
                if let Some(d) = axis_aligned_distance(gens, v) {
                    d
                } else if gens.len() <= 512 {
                    nnls::cone_distance(gens, v)
                } else {
                    nnls::cone_distance_active_set(gens, v)
                }
            }
        }
    }
}

/// Distance to a revolution cone; `half_angle` in `[0, pi]`, where `pi/2`
/// is a halfspace and anything >= `pi` means the whole space.
fn revolution_cone_distance(axis: &[f64], half_angle: f64, v: &[f64]) -> f64 {
    if half_angle >= std::f64::consts::PI - 1e-12 {
        return 0.0;
    }
    let s = linalg::dot(v, axis);
    let mut perp = v.to_vec();
    linalg::axpy(-s, axis, &mut perp);
    let b = linalg::norm(&perp);
    let ang = b.atan2(s); // in [0, pi] because b >= 0
    if ang <= half_angle {
        0.0
    } else if ang - half_angle >= std::f64::consts::FRAC_PI_2 {
        linalg::norm(v)
    } else {
        linalg::norm(v) * (ang - half_angle).sin()
    }
}

/// Coordinate-wise distance when every generator is a signed basis vector;
/// the conical hull is then a product of `{0}`, half-lines, or lines.
fn axis_aligned_distance(gens: &[Vec<f64>], v: &[f64]) -> Option<f64> {
    let dim = v.len();
    let mut has_pos = vec![false; dim];
    let mut has_neg = vec![false; dim];
    for g in gens {
        let mut axis = None;
        for (i, &c) in g.iter().enumerate() {
            if c.abs() > 1e-12 {
                if axis.is_some() || (c.abs() - 1.0).abs() > 1e-12 {
                    return None;
                }
                axis = Some((i, c > 0.0));
            }
        }
        let (i, positive) = axis?;
        if positive {
            has_pos[i] = true;
        } else {
            has_neg[i] = true;
        }
    }
    let mut sq = 0.0;
    for i in 0..dim {
        let r = match (has_pos[i], has_neg[i]) {
            (true, true) => 0.0,
            (true, false) => (-v[i]).max(0.0),
            (false, true) => v[i].max(0.0),
            (false, false) => v[i].abs(),
        };
        sq += r * r;
    }
    Some(sq.sqrt())
}

/// Uniform sample from the closed ball of radius `radius` around `center`.
pub fn sample_in_ball<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let dim = center.len();
    if radius == 0.0 {
        return center.to_vec();
    }
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    while linalg::normalize(&mut dir) == 0.0 {
        for d in dir.iter_mut() {
            *d = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let u: f64 = rng.random_range(0.0..1.0_f64);
    let r = radius * u.powf(1.0 / dim as f64);
    let mut p = center.to_vec();
    linalg::axpy(r, &dir, &mut p);
    p
}

/// Uniform sample from the sphere `||p - center|| = radius`.
pub fn sample_on_sphere<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let dim = center.len();
    if radius == 0.0 {
        return center.to_vec();
    }
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    while linalg::normalize(&mut dir) == 0.0 {
        for d in dir.iter_mut() {
            *d = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut p = center.to_vec();
    linalg::axpy(radius, &dir, &mut p);
    p
}

/// Dual accelerated projected gradient for polytope projection, then a KKT
/// polish on the detected active set.
fn project_polytope(a: &Mat, b: &[f64], row_norms: &[f64], y: &[f64]) -> Vec<f64> {
    let worst = (0..a.rows())
        .map(|j| (linalg::dot(a.row(j), y) - b[j]) / row_norms[j])
        .fold(f64::NEG_INFINITY, f64::max);
    if worst <= 0.0 {
        return y.to_vec();
    }
    // Dual of min ||x - y||^2 s.t. Ax <= b:
    //   min_{lambda >= 0} 0.5 lambda' AA' lambda - lambda' (Ay - b),
    // with primal recovery x = y - A' lambda.
    let rows: Vec<Vec<f64>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    let lipschitz = nnls::gram_norm_estimate(&rows);
    let c: Vec<f64> = (0..a.rows()).map(|j| linalg::dot(a.row(j), y) - b[j]).collect();
    let apply_q = |lambda: &[f64]| -> Vec<f64> {
        let atl = a.tr_matvec(lambda);
        a.matvec(&atl)
    };
    let qp = nnls::accel_nonneg_qp(apply_q, &c, lipschitz, PROJECTION_TOL, nnls::MAX_ITER);
    let atl = a.tr_matvec(&qp.lambda);
    let mut x: Vec<f64> = y.iter().zip(&atl).map(|(yi, t)| yi - t).collect();
    let dist = linalg::dist(y, &x);

    // Polish: equality-constrained projection on the active rows, dropping
    // rows with negative multipliers until the KKT signs are consistent.
    let mut active: Vec<usize> = (0..a.rows())
        .filter(|&j| (linalg::dot(a.row(j), &x) - b[j]) / row_norms[j] >= -1e-7)
        .collect();
    for _ in 0..a.rows().max(4) {
        if active.is_empty() {
            break;
        }
        let m = active.len();
        let mut gram = Mat::zeros(m, m);
        let mut rhs = vec![0.0; m];
        for (i, &ji) in active.iter().enumerate() {
            for (k, &jk) in active.iter().enumerate() {
                gram.set(i, k, linalg::dot(a.row(ji), a.row(jk)));
            }
            rhs[i] = linalg::dot(a.row(ji), y) - b[ji];
        }
        let nu = match linalg::solve(&gram, &rhs) {
            Some(nu) => nu,
            None => {
                active.pop();
                continue;
            }
        };
        if let Some(worst) = (0..m).filter(|&i| nu[i] < -1e-12).min_by(|&p, &q| nu[p].total_cmp(&nu[q]))
        {
            active.remove(worst);
            continue;
        }
        let mut cand = y.to_vec();
        for (i, &ji) in active.iter().enumerate() {
            linalg::axpy(-nu[i], a.row(ji), &mut cand);
        }
        let feasible = (0..a.rows())
            .all(|j| (linalg::dot(a.row(j), &cand) - b[j]) / row_norms[j] <= 1e-10);
        let cand_dist = linalg::dist(y, &cand);
        if feasible && cand_dist <= dist + 1e-12 {
            x = cand;
        }
        break;
    }
    x
}

/// Enumerate vertices as feasible solutions of dim-subsets of tight rows.
pub(crate) fn enumerate_vertices(
    a: &Mat,
    b: &[f64],
    row_norms: &[f64],
) -> Result<Vec<Vec<f64>>, GeometryError> {
    let m = a.rows();
    let n = a.cols();
    if n == 1 {
        // Interval: tightest upper and lower bounds.
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for j in 0..m {
            let coef = a.at(j, 0);
            if coef > 0.0 {
                hi = hi.min(b[j] / coef);
            } else if coef < 0.0 {
                lo = lo.max(b[j] / coef);
            }
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(GeometryError::InvalidInput("empty or unbounded interval".into()));
        }
        return Ok(vec![vec![lo], vec![hi]]);
    }
    let mut count_guard = 0usize;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        count_guard += 1;
        if count_guard > MAX_VERTEX_SUBSETS {
            return Err(GeometryError::InvalidInput(
                "polytope vertex enumeration exceeds the subset budget".into(),
            ));
        }
        let rows: Vec<Vec<f64>> = subset.iter().map(|&j| a.row(j).to_vec()).collect();
        if let Some(sq) = Mat::from_rows(&rows) {
            let rhs: Vec<f64> = subset.iter().map(|&j| b[j]).collect();
            if let Some(v) = linalg::solve(&sq, &rhs) {
                let feasible = (0..m)
                    .all(|j| (linalg::dot(a.row(j), &v) - b[j]) / row_norms[j] <= 1e-9);
                if feasible && !vertices.iter().any(|w| linalg::dist(w, &v) <= 1e-9) {
                    vertices.push(v);
                }
            }
        }
        // Next n-combination of 0..m in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(vertices);
            }
            i -= 1;
            if subset[i] != i + m - n {
                subset[i] += 1;
                for k in (i + 1)..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}
