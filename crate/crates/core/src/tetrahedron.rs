//! Mass-weighted orthocentric tetrahedron.
//!
//! The four masses sit at the vertices of a rigid tetrahedron whose mass
//! centroid is the origin and whose mass-weighted second moment is isotropic,
//! `E M Eᵀ = μ I₃`. Every collinear shape of the four bodies is a projection of
//! this tetrahedron onto a unit direction (see [`crate::chart`]).

use crate::error::{Error, Result};

/// Four strictly positive masses with their total and reduced mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassQuadruple {
    masses: [f64; 4],
    total: f64,
    mu: f64,
}

impl MassQuadruple {
    pub fn new(masses: [f64; 4]) -> Result<Self> {
        let mu = reduced_mass(masses)?;
        Ok(Self {
            masses,
            total: masses.iter().sum(),
            mu,
        })
    }

    pub fn masses(&self) -> [f64; 4] {
        self.masses
    }

    /// Mass of body `i` (0-based).
    pub fn get(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Reduced mass `cbrt(m1 m2 m3 m4 / m)`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `Σ_{i<j} m_i m_j`.
    pub fn pair_product_sum(&self) -> f64 {
        let m = &self.masses;
        let mut acc = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                acc += m[i] * m[j];
            }
        }
        acc
    }

    /// Masses with the body labels permuted: entry `k` of the result is
    /// `self.get(perm[k])`.
    pub fn permuted(&self, perm: [usize; 4]) -> Result<Self> {
        Self::new(perm.map(|i| self.masses[i]))
    }
}

/// Reduced mass `μ = cbrt(m1·m2·m3·m4 / (m1+m2+m3+m4))`.
pub fn reduced_mass(masses: [f64; 4]) -> Result<f64> {
    for (k, &value) in masses.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidMass {
                index: k + 1,
                value,
            });
        }
    }
    let total: f64 = masses.iter().sum();
    // Divide before multiplying out so large masses do not overflow.
    let ratio = masses[0] / total * masses[1] * masses[2] * masses[3];
    Ok(ratio.cbrt())
}

/// The 3×4 vertex matrix `E` (rows `a`, `b`, `c`; one column per body).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeTetrahedron {
    rows: [[f64; 4]; 3],
    masses: MassQuadruple,
}

impl ShapeTetrahedron {
    /// Closed-form placement: bodies 1, 2 in the `a = 0` plane joined by a
    /// segment parallel to `c`; bodies 3, 4 in the `c = 0` plane joined by a
    /// segment parallel to `a`; both pair centroids on the `b` axis.
    pub fn new(masses: &MassQuadruple) -> Self {
        let [m1, m2, m3, m4] = masses.masses();
        let mu = masses.mu();
        let m = masses.total();
        let m12 = m1 + m2;
        let m34 = m3 + m4;

        let b_12 = (mu * m34 / (m * m12)).sqrt();
        let b_34 = -(mu * m12 / (m * m34)).sqrt();
        let c1 = (mu * m2 / (m1 * m12)).sqrt();
        let c2 = -(mu * m1 / (m2 * m12)).sqrt();
        let a3 = (mu * m4 / (m3 * m34)).sqrt();
        let a4 = -(mu * m3 / (m4 * m34)).sqrt();

        Self {
            rows: [
                [0.0, 0.0, a3, a4],
                [b_12, b_12, b_34, b_34],
                [c1, c2, 0.0, 0.0],
            ],
            masses: *masses,
        }
    }

    /// Wraps an arbitrary matrix, e.g. to diagnose a perturbed tetrahedron.
    pub fn from_rows(rows: [[f64; 4]; 3], masses: MassQuadruple) -> Self {
        Self { rows, masses }
    }

    pub fn rows(&self) -> &[[f64; 4]; 3] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [[f64; 4]; 3] {
        &mut self.rows
    }

    pub fn masses(&self) -> &MassQuadruple {
        &self.masses
    }

    /// Coordinates `(a_i, b_i, c_i)` of vertex `i` (0-based).
    pub fn vertex(&self, i: usize) -> [f64; 3] {
        [self.rows[0][i], self.rows[1][i], self.rows[2][i]]
    }

    /// Projection of every vertex onto `dir`: `r_i = dir · e_i`.
    pub fn project_onto(&self, dir: [f64; 3]) -> [f64; 4] {
        let [a, b, c] = &self.rows;
        std::array::from_fn(|i| dir[0] * a[i] + dir[1] * b[i] + dir[2] * c[i])
    }

    /// `E M Eᵀ`.
    pub fn inertia_matrix(&self) -> [[f64; 3]; 3] {
        let m = self.masses.masses();
        std::array::from_fn(|p| {
            std::array::from_fn(|q| {
                (0..4)
                    .map(|i| self.rows[p][i] * m[i] * self.rows[q][i])
                    .sum()
            })
        })
    }

    /// Signed volume `det(e2 − e1, e3 − e1, e4 − e1) / 6`.
    pub fn signed_volume(&self) -> f64 {
        let e1 = self.vertex(0);
        let d: [[f64; 3]; 3] = std::array::from_fn(|k| {
            let v = self.vertex(k + 1);
            [v[0] - e1[0], v[1] - e1[1], v[2] - e1[2]]
        });
        let det = d[0][0] * (d[1][1] * d[2][2] - d[1][2] * d[2][1])
            - d[0][1] * (d[1][0] * d[2][2] - d[1][2] * d[2][0])
            + d[0][2] * (d[1][0] * d[2][1] - d[1][1] * d[2][0]);
        det / 6.0
    }
}

pub fn build_tetrahedron(masses: &MassQuadruple) -> ShapeTetrahedron {
    ShapeTetrahedron::new(masses)
}

/// Vertex pairs in the order used by [`TetrahedronReport::edges`].
pub const EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Deviation of one invariant, absolute and relative to its natural scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub absolute: f64,
    pub relative: f64,
}

impl Deviation {
    fn new(absolute: f64, scale: f64) -> Self {
        Self {
            absolute,
            relative: absolute / scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TetrahedronReport {
    /// `max_k |Σ_i m_i E[k][i]|`, relative to `m · max |E|`.
    pub centroid: Deviation,
    /// `max |E M Eᵀ − μ I|`, relative to `μ`.
    pub inertia: Deviation,
    /// `| |e_i − e_j|² − μ(1/m_i + 1/m_j) |` per edge, in [`EDGE_PAIRS`] order.
    pub edges: [Deviation; 6],
    /// `| |volume| − 1/6 |`, relative to `1/6`.
    pub volume: Deviation,
    pub tolerance: f64,
}

impl TetrahedronReport {
    pub fn max_edge(&self) -> Deviation {
        self.edges.iter().copied().fold(
            Deviation {
                absolute: 0.0,
                relative: 0.0,
            },
            |acc, d| Deviation {
                absolute: acc.absolute.max(d.absolute),
                relative: acc.relative.max(d.relative),
            },
        )
    }

    /// Largest relative deviation over every invariant.
    pub fn max_relative(&self) -> f64 {
        [self.centroid, self.inertia, self.max_edge(), self.volume]
            .iter()
            .map(|d| d.relative)
            .fold(0.0, f64::max)
    }

    pub fn max_absolute(&self) -> f64 {
        [self.centroid, self.inertia, self.max_edge(), self.volume]
            .iter()
            .map(|d| d.absolute)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_relative() <= self.tolerance
    }
}

/// Default relative tolerance for the closed-form construction.
pub const TETRAHEDRON_TOL: f64 = 1e-12;

/// Measures how far `tet` is from satisfying the centroid, isotropic-inertia,
/// edge-length and unit-volume invariants.
pub fn validate_tetrahedron(tet: &ShapeTetrahedron, tolerance: f64) -> TetrahedronReport {
    let masses = tet.masses();
    let m = masses.masses();
    let mu = masses.mu();
    let rows = tet.rows();

    let max_entry = rows.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    let centroid = rows
        .iter()
        .map(|row| (0..4).map(|i| m[i] * row[i]).sum::<f64>().abs())
        .fold(0.0, f64::max);

    let inertia_matrix = tet.inertia_matrix();
    let mut inertia = 0.0_f64;
    for (p, row) in inertia_matrix.iter().enumerate() {
        for (q, &value) in row.iter().enumerate() {
            let target = if p == q { mu } else { 0.0 };
            inertia = inertia.max((value - target).abs());
        }
    }

    let edges = EDGE_PAIRS.map(|(i, j)| {
        let (ei, ej) = (tet.vertex(i), tet.vertex(j));
        let sq: f64 = (0..3).map(|k| (ei[k] - ej[k]).powi(2)).sum();
        let target = mu * (1.0 / m[i] + 1.0 / m[j]);
        Deviation::new((sq - target).abs(), target)
    });

    let volume = (tet.signed_volume().abs() - 1.0 / 6.0).abs();

    TetrahedronReport {
        centroid: Deviation::new(centroid, masses.total() * max_entry),
        inertia: Deviation::new(inertia, mu),
        edges,
        volume: Deviation::new(volume, 1.0 / 6.0),
        tolerance,
    }
}
