//! Power-law interaction potential on the line and the angular residuals
//! whose common zero is a central configuration.

use crate::chart::{project, tangents, ShapeAngles};
use crate::error::{Error, Result};
use crate::tetrahedron::{MassQuadruple, ShapeTetrahedron};

/// Attractive power law `V = −Σ m_i m_j |r_i − r_j|^(−a)`; `a = 1` is Newtonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialLaw {
    exponent: f64,
}

impl PotentialLaw {
    pub const NEWTONIAN: Self = Self { exponent: 1.0 };

    pub fn new(exponent: f64) -> Result<Self> {
        if exponent.is_finite() && exponent > 0.0 {
            Ok(Self { exponent })
        } else {
            Err(Error::InvalidExponent(exponent))
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `|d|^(−p)`, with the common integer powers special-cased.
    fn inv_pow(&self, d: f64, extra: i32) -> f64 {
        let a = self.exponent;
        if a == 1.0 {
            d.powi(-(1 + extra))
        } else if a == 2.0 {
            d.powi(-(2 + extra))
        } else {
            d.powf(-(a + extra as f64))
        }
    }
}

impl Default for PotentialLaw {
    fn default() -> Self {
        Self::NEWTONIAN
    }
}

fn check_pairs(r: &[f64; 4]) -> Result<()> {
    for i in 0..4 {
        for j in i + 1..4 {
            let d = r[i] - r[j];
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Collision { i: i + 1, j: j + 1 });
            }
        }
    }
    Ok(())
}

/// `V(r)` with the overall scale factor set to `R = 1`.
pub fn potential_value(masses: &MassQuadruple, r: &[f64; 4], law: PotentialLaw) -> Result<f64> {
    check_pairs(r)?;
    let m = masses.masses();
    let mut v = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            v -= m[i] * m[j] * law.inv_pow((r[i] - r[j]).abs(), 0);
        }
    }
    Ok(v)
}

/// `∂V/∂r_i = a Σ_{j≠i} m_i m_j sign(r_i − r_j) |r_i − r_j|^(−a−1)`.
pub fn potential_gradient(
    masses: &MassQuadruple,
    r: &[f64; 4],
    law: PotentialLaw,
) -> Result<[f64; 4]> {
    check_pairs(r)?;
    let m = masses.masses();
    let a = law.exponent();
    let mut g = [0.0; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let d = r[i] - r[j];
            let f = a * m[i] * m[j] * d.signum() * law.inv_pow(d.abs(), 1);
            g[i] += f;
            g[j] -= f;
        }
    }
    Ok(g)
}

/// Hessian `∂²V/∂r_i∂r_j`.
pub fn potential_hessian(
    masses: &MassQuadruple,
    r: &[f64; 4],
    law: PotentialLaw,
) -> Result<[[f64; 4]; 4]> {
    check_pairs(r)?;
    let m = masses.masses();
    let a = law.exponent();
    let mut h = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let k = a * (a + 1.0) * m[i] * m[j] * law.inv_pow((r[i] - r[j]).abs(), 2);
            h[i][j] += k;
            h[j][i] += k;
            h[i][i] -= k;
            h[j][j] -= k;
        }
    }
    Ok(h)
}

/// `λ = Σ r_i ∂V/∂r_i / μ = −a V / μ`, positive for the attractive law.
pub fn lambda_multiplier(masses: &MassQuadruple, r: &[f64; 4], law: PotentialLaw) -> Result<f64> {
    Ok(-law.exponent() * potential_value(masses, r, law)? / masses.mu())
}

/// Scale used to make angular residuals dimensionless: `Σ_{i<j} m_i m_j / μ`.
pub fn residual_scale(masses: &MassQuadruple) -> f64 {
    masses.pair_product_sum() / masses.mu()
}

/// `max_i |∂V/∂r_i − λ m_i r_i| / max_i |∂V/∂r_i|`.
pub fn central_residual(masses: &MassQuadruple, r: &[f64; 4], law: PotentialLaw) -> Result<f64> {
    let g = potential_gradient(masses, r, law)?;
    let lambda = lambda_multiplier(masses, r, law)?;
    let scale = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let worst = (0..4)
        .map(|i| (g[i] - lambda * masses.get(i) * r[i]).abs())
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// `(F_θ, F_φ) = (Σ s_i ∂V/∂r_i, Σ t_i ∂V/∂r_i)`.
pub fn angular_residuals(
    tet: &ShapeTetrahedron,
    angles: ShapeAngles,
    law: PotentialLaw,
) -> Result<(f64, f64)> {
    let r = project(tet, angles);
    let g = potential_gradient(tet.masses(), &r, law)?;
    let (s, t) = tangents(tet, angles);
    Ok((dot(&s, &g), dot(&t, &g)))
}

/// Jacobian of [`angular_residuals`] with respect to `(θ, φ)`.
pub fn angular_jacobian(
    tet: &ShapeTetrahedron,
    angles: ShapeAngles,
    law: PotentialLaw,
) -> Result<[[f64; 2]; 2]> {
    let r = project(tet, angles);
    let masses = tet.masses();
    let g = potential_gradient(masses, &r, law)?;
    let h = potential_hessian(masses, &r, law)?;
    let (s, t) = tangents(tet, angles);
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    // ∂s/∂θ = −r, ∂s/∂φ = cos θ · t, ∂t/∂θ = 0, ∂t/∂φ = −w.
    let w = tet.project_onto([0.0, cp, sp]);
    let quad = |x: &[f64; 4], y: &[f64; 4]| -> f64 {
        (0..4)
            .map(|i| x[i] * (0..4).map(|j| h[i][j] * y[j]).sum::<f64>())
            .sum()
    };
    Ok([
        [
            -dot(&r, &g) + quad(&s, &s),
            ct * dot(&t, &g) + st * quad(&s, &t),
        ],
        [quad(&t, &s), -dot(&w, &g) + st * quad(&t, &t)],
    ])
}

/// Potential along the chart, `V(r(θ, φ))`.
pub fn chart_potential(
    tet: &ShapeTetrahedron,
    angles: ShapeAngles,
    law: PotentialLaw,
) -> Result<f64> {
    potential_value(tet.masses(), &project(tet, angles), law)
}

pub(crate) fn dot(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tetrahedron::MassQuadruple;
    use approx::assert_relative_eq;

    fn masses(m: [f64; 4]) -> MassQuadruple {
        MassQuadruple::new(m).unwrap()
    }

    /// Brute-force pair enumeration over ordered pairs, halved.
    fn pair_sum_oracle(m: [f64; 4], r: [f64; 4], a: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    acc -= 0.5 * m[i] * m[j] / (r[i] - r[j]).abs().powf(a);
                }
            }
        }
        acc
    }

    #[test]
    fn newtonian_value_for_unit_spacing() {
        let r = [1.5, 0.5, -0.5, -1.5];
        let v = potential_value(&masses([1.0; 4]), &r, PotentialLaw::NEWTONIAN).unwrap();
        assert_relative_eq!(v, -13.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(v, pair_sum_oracle([1.0; 4], r, 1.0), max_relative = 1e-15);
    }

    #[test]
    fn homogeneity_in_masses_and_positions() {
        let m = [2.0, 0.3, 5.0, 1.1];
        let r = [0.9, -0.2, 0.4, -1.3];
        for a in [0.5, 1.0, 2.0, 3.3] {
            let law = PotentialLaw::new(a).unwrap();
            let v = potential_value(&masses(m), &r, law).unwrap();
            assert_relative_eq!(v, pair_sum_oracle(m, r, a), max_relative = 1e-14);
            let vk = potential_value(&masses(m.map(|x| 3.0 * x)), &r, law).unwrap();
            assert_relative_eq!(vk, 9.0 * v, max_relative = 1e-14);
            let vc = potential_value(&masses(m), &r.map(|x| 2.5 * x), law).unwrap();
            assert_relative_eq!(vc, 2.5_f64.powf(-a) * v, max_relative = 1e-14);
        }
    }

    #[test]
    fn collisions_are_errors() {
        let r = [0.1, 0.3, 0.1, -0.5];
        let m = masses([1.0; 4]);
        assert_eq!(
            potential_value(&m, &r, PotentialLaw::NEWTONIAN),
            Err(Error::Collision { i: 1, j: 3 })
        );
        assert!(potential_gradient(&m, &r, PotentialLaw::NEWTONIAN).is_err());
        assert!(lambda_multiplier(&m, &r, PotentialLaw::NEWTONIAN).is_err());
        assert!(PotentialLaw::new(0.0).is_err());
        assert!(PotentialLaw::new(f64::NAN).is_err());
    }

    #[test]
    fn gradient_identities() {
        let m = masses([7.0, 1.0, 2.5, 0.4]);
        let r = [-0.3, 0.8, 0.05, -1.1];
        for a in [0.5, 1.0, 2.0] {
            let law = PotentialLaw::new(a).unwrap();
            let g = potential_gradient(&m, &r, law).unwrap();
            let v = potential_value(&m, &r, law).unwrap();
            let scale = g.iter().map(|x| x.abs()).sum::<f64>();
            assert!(g.iter().sum::<f64>().abs() < 1e-12 * scale);
            assert_relative_eq!(dot(&r, &g), -a * v, max_relative = 1e-12);
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let m = masses([3.0, 9.0, 0.7, 1.6]);
        let r = [0.42, -0.11, 1.3, -0.77];
        let law = PotentialLaw::NEWTONIAN;
        let g = potential_gradient(&m, &r, law).unwrap();
        let h = potential_hessian(&m, &r, law).unwrap();
        let step = 1e-6;
        for i in 0..4 {
            let (mut up, mut dn) = (r, r);
            up[i] += step;
            dn[i] -= step;
            let fd = (potential_value(&m, &up, law).unwrap()
                - potential_value(&m, &dn, law).unwrap())
                / (2.0 * step);
            assert_relative_eq!(g[i], fd, max_relative = 1e-6);
            let gu = potential_gradient(&m, &up, law).unwrap();
            let gd = potential_gradient(&m, &dn, law).unwrap();
            for j in 0..4 {
                let fd = (gu[j] - gd[j]) / (2.0 * step);
                assert!((h[j][i] - fd).abs() < 1e-6 * h[i][i].abs(), "H[{j}][{i}]");
            }
        }
    }

    #[test]
    fn lambda_positive_and_consistent() {
        let m = masses([1.0; 4]);
        let mut r = [1.5, 0.5, -0.5, -1.5];
        let norm: f64 = r.iter().map(|x| x * x).sum::<f64>();
        let k = (m.mu() / norm).sqrt();
        r = r.map(|x| x * k);
        let law = PotentialLaw::NEWTONIAN;
        let lambda = lambda_multiplier(&m, &r, law).unwrap();
        assert!(lambda > 0.0);
        assert_relative_eq!(
            lambda,
            -potential_value(&m, &r, law).unwrap() / m.mu(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn table_configuration_is_central() {
        let m = masses([20.0, 13.0, 7.0, 6.0]);
        let tet = ShapeTetrahedron::new(&m);
        let a = ShapeAngles::new(1.37525057217299, 0.519159557815111);
        let r = project(&tet, a);
        let law = PotentialLaw::NEWTONIAN;
        let res = central_residual(&m, &r, law).unwrap();
        assert!(res < 1e-9, "{res}");
        let (ft, fp) = angular_residuals(&tet, a, law).unwrap();
        let scale = residual_scale(&m);
        assert!(
            ft.abs() < 1e-9 * scale && fp.abs() < 1e-9 * scale,
            "{ft} {fp}"
        );
    }

    #[test]
    fn residual_grows_linearly_off_solution() {
        let m = masses([20.0, 13.0, 7.0, 6.0]);
        let tet = ShapeTetrahedron::new(&m);
        let law = PotentialLaw::NEWTONIAN;
        let a = ShapeAngles::new(1.37525057217299, 0.519159557815111);
        let at = |d: f64| {
            let (ft, fp) =
                angular_residuals(&tet, ShapeAngles::new(a.theta + d, a.phi), law).unwrap();
            ft.hypot(fp)
        };
        let (r1, r2) = (at(1e-3), at(2e-3));
        assert!((r2 / r1 - 2.0).abs() < 0.02, "{r1} {r2}");
    }

    #[test]
    fn angular_jacobian_matches_finite_differences() {
        let tet = ShapeTetrahedron::new(&masses([2.0, 5.0, 1.0, 3.0]));
        let law = PotentialLaw::new(1.5).unwrap();
        let a = ShapeAngles::new(0.9, 1.1);
        let j = angular_jacobian(&tet, a, law).unwrap();
        let h = 1e-6;
        let f = |t: f64, p: f64| {
            angular_residuals(&tet, ShapeAngles { theta: t, phi: p }, law).unwrap()
        };
        let (tp, tm) = (f(a.theta + h, a.phi), f(a.theta - h, a.phi));
        let (pp, pm) = (f(a.theta, a.phi + h), f(a.theta, a.phi - h));
        let fd = [
            [(tp.0 - tm.0) / (2.0 * h), (pp.0 - pm.0) / (2.0 * h)],
            [(tp.1 - tm.1) / (2.0 * h), (pp.1 - pm.1) / (2.0 * h)],
        ];
        let scale = j.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        for p in 0..2 {
            for q in 0..2 {
                assert!(
                    (j[p][q] - fd[p][q]).abs() < 1e-6 * scale,
                    "J[{p}][{q}] {} vs {}",
                    j[p][q],
                    fd[p][q]
                );
            }
        }
    }
}
