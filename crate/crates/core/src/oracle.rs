//! Direct solver for collinear central configurations in line coordinates.
//!
//! Works with the three gaps between consecutive bodies of a fixed ordering
//! instead of the two-angle chart, and carries its own pair-force code. It is
//! used to cross-check [`crate::solver`].

use crate::chart::OrderingClass;
use crate::error::{Error, Result};
use crate::potential::PotentialLaw;
use crate::solver::CollinearConfiguration;
use crate::tetrahedron::MassQuadruple;

/// A collinear configuration solved directly on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineConfiguration {
    pub x: [f64; 4],
    pub ordering: OrderingClass,
    pub lambda: f64,
    pub iterations: usize,
    /// `max_i |∂V/∂x_i − λ m_i x_i| / max_i |∂V/∂x_i|`.
    pub residual: f64,
}

impl LineConfiguration {
    /// Views an angle-chart solution as a line configuration.
    pub fn from_configuration(config: &CollinearConfiguration) -> Self {
        Self {
            x: config.r,
            ordering: config.ordering,
            lambda: config.lambda,
            iterations: 0,
            residual: 0.0,
        }
    }
}

pub const ORACLE_MAX_ITER: usize = 200;
pub const ORACLE_TOL: f64 = 1e-12;
/// Residual accepted once Newton steps stop changing the iterate, which
/// happens above [`ORACLE_TOL`] for extreme mass ratios.
pub const ORACLE_FLOOR_TOL: f64 = 1e-9;

struct PairTerms {
    value: f64,
    grad: [f64; 4],
    hess: [[f64; 4]; 4],
}

fn pair_terms(m: &[f64; 4], x: &[f64; 4], a: f64) -> PairTerms {
    let mut out = PairTerms {
        value: 0.0,
        grad: [0.0; 4],
        hess: [[0.0; 4]; 4],
    };
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let d = x[i] - x[j];
            let dist = d.abs();
            let mm = m[i] * m[j];
            if i < j {
                out.value -= mm * dist.powf(-a);
            }
            out.grad[i] += a * mm * d.signum() * dist.powf(-a - 1.0);
            let k = a * (a + 1.0) * mm * dist.powf(-a - 2.0);
            out.hess[i][j] += k;
            out.hess[i][i] -= k;
        }
    }
    out
}

/// Positions from gaps `g` along ordering `perm`, with the centroid removed,
/// and `∂x/∂g`.
fn positions(
    m: &[f64; 4],
    total: f64,
    perm: &[usize; 4],
    g: &[f64; 3],
) -> ([f64; 4], [[f64; 3]; 4]) {
    let mut y = [0.0; 4];
    let mut dy = [[0.0; 3]; 4];
    let mut level = 0.0;
    for k in 1..4 {
        level -= g[k - 1];
        y[perm[k]] = level;
        for entry in &mut dy[perm[k]][..k] {
            *entry = -1.0;
        }
    }
    let centre: f64 = (0..4).map(|i| m[i] * y[i]).sum::<f64>() / total;
    let dcentre: [f64; 3] =
        std::array::from_fn(|k| (0..4).map(|i| m[i] * dy[i][k]).sum::<f64>() / total);
    let x = std::array::from_fn(|i| y[i] - centre);
    let dx = std::array::from_fn(|i| std::array::from_fn(|k| dy[i][k] - dcentre[k]));
    (x, dx)
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Solves `∂V/∂x_i = λ m_i x_i`, `Σ m_i x_i = 0`, `Σ m_i x_i² = μ` for the
/// ordering `ordering` (decreasing `x`).
///
/// The unknowns are the logarithms of the three consecutive gaps and `λ`;
/// damped Newton steps keep every gap positive.
pub fn moulton_direct_solve(
    masses: &MassQuadruple,
    ordering: OrderingClass,
    law: PotentialLaw,
) -> Result<LineConfiguration> {
    // Solve the canonical orientation; the mirror is the exact negation.
    if !ordering.is_canonical() {
        let mirrored = moulton_direct_solve(masses, ordering.reversed(), law)?;
        return Ok(LineConfiguration {
            x: mirrored.x.map(|v| -v),
            ordering,
            ..mirrored
        });
    }

    let m = masses.masses();
    let total = masses.total();
    let mu = masses.mu();
    let a = law.exponent();
    let perm = ordering.perm();

    let evaluate = |u: &[f64; 4]| {
        let g = [u[0].exp(), u[1].exp(), u[2].exp()];
        let lambda = u[3];
        let (x, dx) = positions(&m, total, &perm, &g);
        let terms = pair_terms(&m, &x, a);
        let mut f = [0.0; 4];
        let mut jac = [[0.0; 4]; 4];
        for row in 0..3 {
            let i = perm[row];
            f[row] = terms.grad[i] / m[i] - lambda * x[i];
            for k in 0..3 {
                let dxdu: Vec<f64> = (0..4).map(|p| dx[p][k] * g[k]).collect();
                let dgrad: f64 = (0..4).map(|p| terms.hess[i][p] * dxdu[p]).sum();
                jac[row][k] = dgrad / m[i] - lambda * dxdu[i];
            }
            jac[row][3] = -x[i];
        }
        let norm: f64 = (0..4).map(|i| m[i] * x[i] * x[i]).sum();
        f[3] = norm / mu - 1.0;
        for k in 0..3 {
            jac[3][k] = (0..4)
                .map(|p| 2.0 * m[p] * x[p] * dx[p][k] * g[k])
                .sum::<f64>()
                / mu;
        }
        (f, jac, x, terms)
    };
    let merit = |f: &[f64; 4], lambda: f64| {
        let accel_scale = lambda.abs().max(f64::MIN_POSITIVE);
        let w = [accel_scale, accel_scale, accel_scale, 1.0];
        (0..4).map(|k| (f[k] / w[k]).powi(2)).sum::<f64>().sqrt()
    };

    // Uniform gaps scaled onto the normalization sphere.
    let (x1, _) = positions(&m, total, &perm, &[1.0, 1.0, 1.0]);
    let norm1: f64 = (0..4).map(|i| m[i] * x1[i] * x1[i]).sum();
    let gap0 = (mu / norm1).sqrt();
    let (x0, _) = positions(&m, total, &perm, &[gap0; 3]);
    let lambda0 = -a * pair_terms(&m, &x0, a).value / mu;
    let mut u = [gap0.ln(), gap0.ln(), gap0.ln(), lambda0];

    let (mut f, mut jac, mut x, mut terms) = evaluate(&u);
    let mut fm = merit(&f, u[3]);
    let mut iterations = 0;
    for iteration in 1..=ORACLE_MAX_ITER {
        let residual = line_residual(&m, &x, &terms.grad, u[3]);
        if residual < ORACLE_TOL && f[3].abs() < 1e-14 {
            return Ok(LineConfiguration {
                x,
                ordering,
                lambda: u[3],
                iterations: iteration - 1,
                residual,
            });
        }
        let Some(step) = solve4(jac, f.map(|v| -v)) else {
            break;
        };
        // Cap the log-gap change so a single step cannot collapse a gap.
        let biggest = step[..3].iter().map(|s| s.abs()).fold(0.0, f64::max);
        let mut t = if biggest > 1.0 { 1.0 / biggest } else { 1.0 };
        let mut accepted = false;
        for _ in 0..40 {
            let trial: [f64; 4] = std::array::from_fn(|k| u[k] + t * step[k]);
            let out = evaluate(&trial);
            let tm = merit(&out.0, trial[3]);
            if tm.is_finite() && tm < fm * (1.0 - 1e-4 * t)
                || (tm.is_finite() && tm <= fm && t < 1e-6)
            {
                u = trial;
                (f, jac, x, terms) = out;
                fm = tm;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations = iteration;
        if !accepted {
            break;
        }
    }
    // Rounding floor: no step lowers the merit any further.
    let residual = line_residual(&m, &x, &terms.grad, u[3]);
    if residual < ORACLE_FLOOR_TOL && f[3].abs() < 1e-12 {
        return Ok(LineConfiguration {
            x,
            ordering,
            lambda: u[3],
            iterations,
            residual,
        });
    }
    Err(Error::OracleNoConvergence {
        ordering,
        iterations,
        residual,
    })
}

fn line_residual(m: &[f64; 4], x: &[f64; 4], grad: &[f64; 4], lambda: f64) -> f64 {
    let scale = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
    (0..4)
        .map(|i| (grad[i] - lambda * m[i] * x[i]).abs())
        .fold(0.0, f64::max)
        / scale
}

/// `max_i |r_i − x_i|` after flipping the oracle if its ordering is the
/// mirror of the configuration's.
pub fn cross_validate(config: &CollinearConfiguration, oracle: &LineConfiguration) -> Result<f64> {
    let sign = if config.ordering == oracle.ordering {
        1.0
    } else if config.ordering == oracle.ordering.reversed() {
        -1.0
    } else {
        return Err(Error::ClassMismatch {
            left: config.ordering,
            right: oracle.ordering,
        });
    };
    Ok((0..4)
        .map(|i| (config.r[i] - sign * oracle.x[i]).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_region, SolverOptions};
    use crate::tetrahedron::ShapeTetrahedron;

    const TABLE_FIRST_R: [f64; 4] = [
        0.366090733643358,
        -0.065366601796564,
        -0.373701028513627,
        -0.642690274986074,
    ];

    #[test]
    fn table_first_cell() {
        let masses = MassQuadruple::new([20.0, 13.0, 7.0, 6.0]).unwrap();
        let line = moulton_direct_solve(
            &masses,
            OrderingClass::new([0, 1, 2, 3]).unwrap(),
            PotentialLaw::NEWTONIAN,
        )
        .unwrap();
        for i in 0..4 {
            assert!((line.x[i] - TABLE_FIRST_R[i]).abs() < 1e-9, "{:?}", line.x);
        }
        assert!(line.residual < ORACLE_TOL);
    }

    /// Equal masses at (p, q, −q, −p): the central condition reduces to one
    /// equation in `ρ = q/p`, solved here by bisection.
    fn symmetric_ratio() -> f64 {
        // Accelerations of bodies 1 and 2 divided by their positions must match.
        let f = |rho: f64| {
            let (p, q) = (1.0, rho);
            let acc1 = 1.0 / (p - q).powi(2) + 1.0 / (p + q).powi(2) + 1.0 / (2.0 * p).powi(2);
            let acc2 = -1.0 / (p - q).powi(2) + 1.0 / (2.0 * q).powi(2) + 1.0 / (p + q).powi(2);
            acc1 / p - acc2 / q
        };
        let (mut lo, mut hi) = (1e-6, 1.0 - 1e-9);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn equal_masses_symmetric_ratio() {
        let masses = MassQuadruple::new([1.0; 4]).unwrap();
        let line = moulton_direct_solve(
            &masses,
            OrderingClass::new([0, 1, 2, 3]).unwrap(),
            PotentialLaw::NEWTONIAN,
        )
        .unwrap();
        let [p, q, mq, mp] = line.x;
        assert!((p + mp).abs() < 1e-13 && (q + mq).abs() < 1e-13);
        let rho = q / p;
        assert!((rho - symmetric_ratio()).abs() < 1e-12, "{rho}");
        // Frozen regression value of the gap ratio.
        assert!((rho - 0.31624349300710735).abs() < 1e-12, "{rho:.16}");
    }

    #[test]
    fn reversed_ordering_negates() {
        let masses = MassQuadruple::new([2.0, 9.0, 0.6, 4.0]).unwrap();
        let law = PotentialLaw::NEWTONIAN;
        for class in OrderingClass::canonical_classes() {
            let a = moulton_direct_solve(&masses, class, law).unwrap();
            let b = moulton_direct_solve(&masses, class.reversed(), law).unwrap();
            assert_eq!(b.x, a.x.map(|v| -v));
            assert_eq!(OrderingClass::from_coordinates(&a.x), class);
        }
    }

    #[test]
    fn agrees_with_angle_solver() {
        let masses = MassQuadruple::new([20.0, 13.0, 7.0, 6.0]).unwrap();
        let tet = ShapeTetrahedron::new(&masses);
        let class = OrderingClass::new([0, 1, 2, 3]).unwrap();
        let law = PotentialLaw::NEWTONIAN;
        let config = solve_region(&tet, class, law, &SolverOptions::default()).unwrap();
        let line = moulton_direct_solve(&masses, class, law).unwrap();
        assert!(cross_validate(&config, &line).unwrap() < 1e-9);
        let mirror = moulton_direct_solve(&masses, class.reversed(), law).unwrap();
        assert!(cross_validate(&config, &mirror).unwrap() < 1e-9);
        assert_eq!(
            cross_validate(&config, &LineConfiguration::from_configuration(&config)).unwrap(),
            0.0
        );
        let other =
            moulton_direct_solve(&masses, OrderingClass::new([1, 0, 2, 3]).unwrap(), law).unwrap();
        assert!(matches!(
            cross_validate(&config, &other),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn lambda_matches_homogeneity() {
        let masses = MassQuadruple::new([5.0, 0.5, 3.0, 12.0]).unwrap();
        for a in [0.5, 1.0, 2.0] {
            let law = PotentialLaw::new(a).unwrap();
            let line =
                moulton_direct_solve(&masses, OrderingClass::new([2, 0, 3, 1]).unwrap(), law)
                    .unwrap();
            let v = pair_terms(&masses.masses(), &line.x, a).value;
            let expected = -a * v / masses.mu();
            assert!((line.lambda - expected).abs() < 1e-10 * expected, "a = {a}");
        }
    }
}
