//! Two-angle chart of the collinear shape sphere.
//!
//! A unit direction `u(θ, φ) = (cos θ, sin θ cos φ, sin θ sin φ)` projects the
//! mass tetrahedron onto a line, `r_i = u · e_i`. The six great circles
//! `r_i = r_j` cut the sphere into 24 open spherical triangles, one per strict
//! ordering of the `r_i`. Antipodal points give mirrored configurations, so
//! the triangles pair up into 12 physical classes.
//!
//! The circle `r_3 = r_4` is the equator `θ = π/2` (because `a_1 = a_2 = 0`
//! and `b_3 = b_4`, `c_3 = c_4`), so the northern hemisphere is exactly the set
//! of shapes with body 3 ahead of body 4. That is the representative used for
//! canonical classes.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tetrahedron::ShapeTetrahedron;

/// A point on the shape sphere. `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeAngles {
    pub theta: f64,
    pub phi: f64,
}

impl ShapeAngles {
    /// Clamps `theta` into `[0, π]` and reduces `phi` modulo `2π`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Self {
            theta: theta.clamp(0.0, PI),
            phi,
        }
    }

    /// The opposite point of the sphere, `(π − θ, φ + π)`.
    pub fn antipode(self) -> Self {
        Self::new(PI - self.theta, self.phi + PI)
    }

    pub fn direction(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [ct, st * cp, st * sp]
    }

    /// Inverse of [`ShapeAngles::direction`]; `u` need not be normalized.
    pub fn from_direction(u: [f64; 3]) -> Self {
        let rho = u[1].hypot(u[2]);
        Self::new(rho.atan2(u[0]), u[2].atan2(u[1]))
    }

    pub fn is_finite(self) -> bool {
        self.theta.is_finite() && self.phi.is_finite()
    }
}

/// Great-circle distance between two points of the sphere.
pub fn angular_distance(p: ShapeAngles, q: ShapeAngles) -> f64 {
    let (u, v) = (p.direction(), q.direction());
    let dot: f64 = (0..3).map(|k| u[k] * v[k]).sum();
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
    sin.atan2(dot)
}

/// Line coordinates `r_i = a_i cos θ + b_i sin θ cos φ + c_i sin θ sin φ`.
pub fn project(tet: &ShapeTetrahedron, angles: ShapeAngles) -> [f64; 4] {
    tet.project_onto(angles.direction())
}

/// `(s, t)` with `s = ∂r/∂θ` and `sin θ · t = ∂r/∂φ`.
pub fn tangents(tet: &ShapeTetrahedron, angles: ShapeAngles) -> ([f64; 4], [f64; 4]) {
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    let s = tet.project_onto([-st, ct * cp, ct * sp]);
    let t = tet.project_onto([0.0, -sp, cp]);
    (s, t)
}

/// A strict ordering of the four bodies by decreasing line coordinate.
///
/// `perm[0]` is the body with the largest coordinate. Indices are 0-based
/// internally and rendered 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderingClass {
    perm: [usize; 4],
}

impl OrderingClass {
    /// From 0-based body indices.
    pub fn new(perm: [usize; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for &p in &perm {
            if p >= 4 || seen[p] {
                return Err(Error::InvalidOrdering(perm.iter().map(|p| p + 1).collect()));
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    /// From 1-based body labels, as written on the command line.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let invalid = || Error::InvalidOrdering(labels.to_vec());
        if labels.len() != 4 || labels.iter().any(|&l| l == 0 || l > 4) {
            return Err(invalid());
        }
        Self::new([labels[0] - 1, labels[1] - 1, labels[2] - 1, labels[3] - 1])
            .map_err(|_| invalid())
    }

    pub fn perm(&self) -> [usize; 4] {
        self.perm
    }

    pub fn labels(&self) -> [usize; 4] {
        self.perm.map(|p| p + 1)
    }

    /// Position of `body` in the ordering (0 = largest coordinate).
    pub fn rank_of(&self, body: usize) -> usize {
        self.perm
            .iter()
            .position(|&p| p == body)
            .expect("perm is a bijection")
    }

    pub fn reversed(&self) -> Self {
        let [a, b, c, d] = self.perm;
        Self { perm: [d, c, b, a] }
    }

    /// Body 3 ahead of body 4, i.e. the northern-hemisphere representative.
    pub fn is_canonical(&self) -> bool {
        self.rank_of(2) < self.rank_of(3)
    }

    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            *self
        } else {
            self.reversed()
        }
    }

    /// All 24 orderings in lexicographic order.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        if let Ok(class) = Self::new([a, b, c, d]) {
                            out.push(class);
                        }
                    }
                }
            }
        }
        out
    }

    /// The 12 canonical representatives in lexicographic order.
    pub fn canonical_classes() -> Vec<Self> {
        Self::all().into_iter().filter(Self::is_canonical).collect()
    }

    /// 1-based index of this ordering's antipodal class among
    /// [`OrderingClass::canonical_classes`].
    pub fn class_id(&self) -> usize {
        let canon = self.canonical();
        Self::canonical_classes()
            .iter()
            .position(|c| *c == canon)
            .expect("canonical class is listed")
            + 1
    }

    /// Sorts `r` by decreasing value. Ties keep index order.
    pub fn from_coordinates(r: &[f64; 4]) -> Self {
        let mut perm = [0, 1, 2, 3];
        perm.sort_by(|&i, &j| r[j].total_cmp(&r[i]));
        Self { perm }
    }
}

impl fmt::Display for OrderingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.labels();
        write!(f, "{a}>{b}>{c}>{d}")
    }
}

/// Result of classifying a chart point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Strict(OrderingClass),
    /// The point lies on the great circle `r_i = r_j` (1-based, `i < j`).
    Boundary(usize, usize),
}

impl Classification {
    pub fn strict(self) -> Option<OrderingClass> {
        match self {
            Self::Strict(c) => Some(c),
            Self::Boundary(..) => None,
        }
    }
}

/// Default boundary tolerance `1e-9 · sqrt(μ)`.
pub fn default_boundary_tol(mu: f64) -> f64 {
    1e-9 * mu.sqrt()
}

/// Smallest gap `|r_i − r_j|` and the (0-based) pair attaining it.
pub fn min_gap(r: &[f64; 4]) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 1);
    for i in 0..4 {
        for j in i + 1..4 {
            let gap = (r[i] - r[j]).abs();
            if gap < best.0 {
                best = (gap, i, j);
            }
        }
    }
    best
}

pub fn classify_ordering(r: &[f64; 4], tol: f64) -> Classification {
    let (gap, i, j) = min_gap(r);
    if gap <= tol {
        Classification::Boundary(i + 1, j + 1)
    } else {
        Classification::Strict(OrderingClass::from_coordinates(r))
    }
}

/// Sampling budget for [`seed_for_ordering`].
pub const SEED_BUDGET: usize = 100_000;

/// Finds a point strictly inside the region of `target`.
///
/// Uniform rejection sampling on the sphere accepts a point in the target
/// region or in its mirror (which is mapped back by the antipode), then a
/// shrinking pattern search pushes it away from the region boundary.
pub fn seed_for_ordering(
    tet: &ShapeTetrahedron,
    target: OrderingClass,
    rng_seed: u64,
) -> Result<ShapeAngles> {
    seed_for_ordering_with_budget(tet, target, rng_seed, SEED_BUDGET)
}

pub fn seed_for_ordering_with_budget(
    tet: &ShapeTetrahedron,
    target: OrderingClass,
    rng_seed: u64,
    budget: usize,
) -> Result<ShapeAngles> {
    let sqrt_mu = tet.masses().mu().sqrt();
    let tol = default_boundary_tol(tet.masses().mu());
    let mirror = target.reversed();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    for _ in 0..budget {
        let z: f64 = rng.random_range(-1.0..1.0);
        let azimuth: f64 = rng.random_range(0.0..TAU);
        let rho = (1.0 - z * z).sqrt();
        let mut dir = [z, rho * azimuth.cos(), rho * azimuth.sin()];
        match classify_ordering(&tet.project_onto(dir), tol) {
            Classification::Strict(c) if c == target => {}
            Classification::Strict(c) if c == mirror => dir = dir.map(|x| -x),
            _ => continue,
        }
        let refined = push_to_interior(tet, dir, target);
        let r = tet.project_onto(refined);
        if OrderingClass::from_coordinates(&r) == target && min_gap(&r).0 > 1e-3 * sqrt_mu {
            return Ok(ShapeAngles::from_direction(refined));
        }
    }
    // Regions too thin to hit by sampling: pull evenly spaced positions in the
    // target order back onto the sphere through `E M Eᵀ = μ I`.
    let refined = push_to_interior(tet, even_spacing_direction(tet, target), target);
    let r = tet.project_onto(refined);
    if OrderingClass::from_coordinates(&r) == target && min_gap(&r).0 > tol {
        return Ok(ShapeAngles::from_direction(refined));
    }
    Err(Error::SeedExhausted { target, budget })
}

/// Shape direction whose projection puts the bodies at equally spaced
/// positions in the order of `target`.
fn even_spacing_direction(tet: &ShapeTetrahedron, target: OrderingClass) -> [f64; 3] {
    let m = tet.masses().masses();
    let mut x = [0.0; 4];
    for (k, &body) in target.perm().iter().enumerate() {
        x[body] = (3 - k) as f64;
    }
    let centre = (0..4).map(|i| m[i] * x[i]).sum::<f64>() / tet.masses().total();
    let x = x.map(|v| v - centre);
    let u: [f64; 3] = std::array::from_fn(|p| (0..4).map(|i| tet.rows()[p][i] * m[i] * x[i]).sum());
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.map(|v| v / n)
}

/// Pattern search maximizing the smallest consecutive gap of `target` over
/// directions near `dir`; never leaves the region.
fn push_to_interior(tet: &ShapeTetrahedron, dir: [f64; 3], target: OrderingClass) -> [f64; 3] {
    let score = |u: &[f64; 3]| {
        let r = tet.project_onto(*u);
        let p = target.perm();
        (0..3)
            .map(|k| r[p[k]] - r[p[k + 1]])
            .fold(f64::INFINITY, f64::min)
    };
    let normalize = |u: [f64; 3]| {
        let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        u.map(|x| x / n)
    };

    let mut best = dir;
    let mut best_score = score(&best);
    let mut step = 0.1;
    while step > 1e-4 {
        let mut improved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut trial = best;
                trial[axis] += sign * step;
                let trial = normalize(trial);
                let s = score(&trial);
                if s > best_score {
                    best = trial;
                    best_score = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Projection from the pole `θ = π` onto the equatorial plane:
/// `(tan(θ/2) cos φ, tan(θ/2) sin φ)`. The northern hemisphere maps into the
/// unit disk.
pub fn stereographic(angles: ShapeAngles) -> Result<(f64, f64)> {
    if angles.theta >= PI {
        return Err(Error::ProjectionAtInfinity);
    }
    let k = (angles.theta / 2.0).tan();
    let (sp, cp) = angles.phi.sin_cos();
    Ok((k * cp, k * sp))
}

/// One sample of a hemisphere grid, as written by the `project` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub angles: ShapeAngles,
    pub x: f64,
    pub y: f64,
    /// 1..=12 for strict points, 0 on a boundary circle.
    pub ordering_id: usize,
    pub is_boundary: bool,
}

/// `n × n` polar grid over the northern hemisphere; `theta` at cell centres
/// of `(0, π/2)` and `phi` over `[0, 2π)`.
pub fn hemisphere_grid(tet: &ShapeTetrahedron, n: usize, tol: f64) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let theta = (i as f64 + 0.5) / n as f64 * (PI / 2.0);
        for j in 0..n {
            let phi = j as f64 / n as f64 * TAU;
            let angles = ShapeAngles::new(theta, phi);
            let (x, y) = stereographic(angles).expect("theta < pi");
            let (ordering_id, is_boundary) = match classify_ordering(&project(tet, angles), tol) {
                Classification::Strict(c) => (c.class_id(), false),
                Classification::Boundary(..) => (0, true),
            };
            out.push(GridPoint {
                angles,
                x,
                y,
                ordering_id,
                is_boundary,
            });
        }
    }
    out
}
