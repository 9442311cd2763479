//! Reduced collinear dynamics in `(R, ψ, θ, φ)` and homographic conic orbits.
//!
//! Body `i` sits at `R · r_i(θ, φ) · (cos ψ, sin ψ)`. The kinetic energy is
//! `μ/2 [Ṙ² + R²(ψ̇² + φ̇² sin²θ + θ̇²)]` and the potential `R^(−a) · U(θ, φ)`
//! with `U` from [`potential_value`].

use std::f64::consts::TAU;

use crate::chart::{min_gap, project, ShapeAngles};
use crate::error::{Error, Result};
use crate::potential::{angular_residuals, potential_value, PotentialLaw};
use crate::solver::CollinearConfiguration;
use crate::tetrahedron::ShapeTetrahedron;

/// Initial states closer than this to `sin θ = 0` are rejected.
pub const CHART_MARGIN: f64 = 1e-6;
/// Integration stops once `R · min |r_i − r_j|` drops below this fraction of
/// the initial `R`.
pub const COLLISION_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub radius: f64,
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
    pub radius_dot: f64,
    pub psi_dot: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
}

impl ReducedState {
    pub fn angles(&self) -> ShapeAngles {
        ShapeAngles {
            theta: self.theta,
            phi: self.phi,
        }
    }

    fn to_array(self) -> [f64; 8] {
        [
            self.radius,
            self.psi,
            self.theta,
            self.phi,
            self.radius_dot,
            self.psi_dot,
            self.theta_dot,
            self.phi_dot,
        ]
    }

    fn from_array(v: [f64; 8]) -> Self {
        Self {
            radius: v[0],
            psi: v[1],
            theta: v[2],
            phi: v[3],
            radius_dot: v[4],
            psi_dot: v[5],
            theta_dot: v[6],
            phi_dot: v[7],
        }
    }

    fn check(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidState("non-finite entry"));
        }
        if self.radius <= 0.0 {
            return Err(Error::InvalidState("radius must be positive"));
        }
        if self.theta.sin().abs() < CHART_MARGIN {
            return Err(Error::ChartSingularity {
                margin: CHART_MARGIN,
            });
        }
        Ok(())
    }

    /// Planar positions of the four bodies.
    pub fn positions(&self, tet: &ShapeTetrahedron) -> [[f64; 2]; 4] {
        let r = project(tet, self.angles());
        let (s, c) = self.psi.sin_cos();
        r.map(|ri| [self.radius * ri * c, self.radius * ri * s])
    }
}

/// Kinetic energy with the `ψ̇` term written out.
pub fn kinetic_energy(state: &ReducedState, mu: f64) -> f64 {
    let s = state.theta.sin();
    0.5 * mu
        * (state.radius_dot.powi(2)
            + state.radius.powi(2)
                * (state.psi_dot.powi(2) + (state.phi_dot * s).powi(2) + state.theta_dot.powi(2)))
}

/// Kinetic energy with `ψ̇` eliminated in favour of `P_ψ`.
pub fn kinetic_energy_reduced(state: &ReducedState, mu: f64, p_psi: f64) -> f64 {
    let s = state.theta.sin();
    0.5 * mu
        * (state.radius_dot.powi(2)
            + state.radius.powi(2) * ((state.phi_dot * s).powi(2) + state.theta_dot.powi(2)))
        + p_psi.powi(2) / (2.0 * mu * state.radius.powi(2))
}

pub fn potential_energy(
    state: &ReducedState,
    tet: &ShapeTetrahedron,
    law: PotentialLaw,
) -> Result<f64> {
    let u = potential_value(tet.masses(), &project(tet, state.angles()), law)?;
    Ok(u * state.radius.powf(-law.exponent()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    /// `P_ψ = μ R² ψ̇`.
    pub angular_momentum: f64,
    pub energy: f64,
}

pub fn conserved_quantities(
    state: &ReducedState,
    tet: &ShapeTetrahedron,
    law: PotentialLaw,
) -> Result<Conserved> {
    let mu = tet.masses().mu();
    let p_psi = mu * state.radius.powi(2) * state.psi_dot;
    let energy = kinetic_energy_reduced(state, mu, p_psi) + potential_energy(state, tet, law)?;
    Ok(Conserved {
        angular_momentum: p_psi,
        energy,
    })
}

/// Time derivative of `state` under the reduced Lagrange equations.
pub fn derivatives(
    state: &ReducedState,
    tet: &ShapeTetrahedron,
    law: PotentialLaw,
) -> Result<ReducedState> {
    let mu = tet.masses().mu();
    let a = law.exponent();
    let ReducedState {
        radius,
        theta,
        radius_dot,
        psi_dot,
        theta_dot,
        phi_dot,
        ..
    } = *state;
    let (st, ct) = theta.sin_cos();
    if st.abs() < f64::EPSILON {
        return Err(Error::ChartSingularity { margin: 0.0 });
    }
    let angles = state.angles();
    let u = potential_value(tet.masses(), &project(tet, angles), law)?;
    let (f_theta, f_phi) = angular_residuals(tet, angles, law)?;
    let scale = radius.powf(-a);

    let dv_dr = -a * u * scale / radius;
    let dv_dtheta = scale * f_theta;
    let dv_dphi = scale * st * f_phi;

    let spin = psi_dot.powi(2) + (phi_dot * st).powi(2) + theta_dot.powi(2);
    let radius_acc = radius * spin - dv_dr / mu;
    let psi_acc = -2.0 * radius_dot * psi_dot / radius;
    let theta_acc = phi_dot.powi(2) * st * ct
        - dv_dtheta / (mu * radius * radius)
        - 2.0 * radius_dot * theta_dot / radius;
    let phi_acc = -dv_dphi / (mu * radius * radius * st * st)
        - 2.0 * radius_dot * phi_dot / radius
        - 2.0 * ct / st * theta_dot * phi_dot;

    Ok(ReducedState {
        radius: radius_dot,
        psi: psi_dot,
        theta: theta_dot,
        phi: phi_dot,
        radius_dot: radius_acc,
        psi_dot: psi_acc,
        theta_dot: theta_acc,
        phi_dot: phi_acc,
    })
}

/// Why an integration stopped before the requested number of steps.
#[derive(Debug, Clone, PartialEq)]
pub enum Truncation {
    Collision { step: usize },
    ChartSingularity { step: usize },
    Failure { step: usize, error: Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(time, state)` for the initial state and every accepted step.
    pub samples: Vec<(f64, ReducedState)>,
    /// `max_t |E(t) − E₀| / |E₀|`.
    pub energy_drift: f64,
    /// `max_t |P(t) − P₀| / |P₀|`, absolute when `P₀ = 0`.
    pub angular_momentum_drift: f64,
    pub truncated: Option<Truncation>,
}

impl Trajectory {
    pub fn last(&self) -> &ReducedState {
        &self
            .samples
            .last()
            .expect("trajectory holds the initial state")
            .1
    }

    /// Largest excursion of `(θ, φ)` from their initial values.
    pub fn max_angle_deviation(&self) -> f64 {
        let first = self.samples[0].1;
        self.samples
            .iter()
            .map(|(_, s)| (s.theta - first.theta).abs().max((s.phi - first.phi).abs()))
            .fold(0.0, f64::max)
    }
}

fn rk4_step(
    state: &ReducedState,
    tet: &ShapeTetrahedron,
    law: PotentialLaw,
    dt: f64,
) -> Result<ReducedState> {
    let y = state.to_array();
    let f = |v: [f64; 8]| {
        derivatives(&ReducedState::from_array(v), tet, law).map(ReducedState::to_array)
    };
    let shift = |k: &[f64; 8], h: f64| -> [f64; 8] { std::array::from_fn(|i| y[i] + h * k[i]) };
    let k1 = f(y)?;
    let k2 = f(shift(&k1, 0.5 * dt))?;
    let k3 = f(shift(&k2, 0.5 * dt))?;
    let k4 = f(shift(&k3, dt))?;
    Ok(ReducedState::from_array(std::array::from_fn(|i| {
        y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    })))
}

/// Fixed-step classical Runge-Kutta integration.
pub fn integrate(
    state0: &ReducedState,
    tet: &ShapeTetrahedron,
    law: PotentialLaw,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    state0.check()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidState("time step must be positive"));
    }
    let c0 = conserved_quantities(state0, tet, law)?;
    let threshold = COLLISION_FRACTION * state0.radius;
    let separation = |s: &ReducedState| s.radius * min_gap(&project(tet, s.angles())).0;

    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, *state0));
    let (mut energy_drift, mut momentum_drift) = (0.0_f64, 0.0_f64);
    let mut truncated = None;
    let mut state = *state0;

    for step in 1..=steps {
        let next = match rk4_step(&state, tet, law, dt) {
            Ok(next) => next,
            Err(Error::Collision { .. }) => {
                truncated = Some(Truncation::Collision { step });
                break;
            }
            Err(Error::ChartSingularity { .. }) => {
                truncated = Some(Truncation::ChartSingularity { step });
                break;
            }
            Err(error) => {
                truncated = Some(Truncation::Failure { step, error });
                break;
            }
        };
        if !next.to_array().iter().all(|x| x.is_finite())
            || next.radius <= 0.0
            || separation(&next) < threshold
        {
            truncated = Some(Truncation::Collision { step });
            break;
        }
        if next.theta.sin().abs() < CHART_MARGIN {
            truncated = Some(Truncation::ChartSingularity { step });
            break;
        }
        let c = conserved_quantities(&next, tet, law)?;
        energy_drift = energy_drift.max(relative_change(c.energy, c0.energy));
        momentum_drift =
            momentum_drift.max(relative_change(c.angular_momentum, c0.angular_momentum));
        samples.push((step as f64 * dt, next));
        state = next;
    }

    Ok(Trajectory {
        samples,
        energy_drift,
        angular_momentum_drift: momentum_drift,
        truncated,
    })
}

fn relative_change(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (value - reference).abs()
    } else {
        ((value - reference) / reference).abs()
    }
}

/// Rotation rate of the circular homographic motion at scale `radius`:
/// `ψ̇² = λ / R^(a+2)`.
pub fn circular_rate(config: &CollinearConfiguration, radius: f64, law: PotentialLaw) -> f64 {
    (config.lambda / radius.powf(law.exponent() + 2.0)).sqrt()
}

/// Rigid rotation of a central configuration at constant `R`.
pub fn circular_state(
    config: &CollinearConfiguration,
    radius: f64,
    law: PotentialLaw,
) -> ReducedState {
    ReducedState {
        radius,
        psi: 0.0,
        theta: config.angles.theta,
        phi: config.angles.phi,
        radius_dot: 0.0,
        psi_dot: circular_rate(config, radius, law),
        theta_dot: 0.0,
        phi_dot: 0.0,
    }
}

/// Parameters of a homographic Kepler conic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicOrbit {
    pub semi_major: f64,
    pub eccentricity: f64,
    pub psi0: f64,
    pub config: CollinearConfiguration,
}

impl ConicOrbit {
    pub fn new(
        semi_major: f64,
        eccentricity: f64,
        psi0: f64,
        config: CollinearConfiguration,
    ) -> Result<Self> {
        if !(semi_major.is_finite() && semi_major > 0.0) {
            return Err(Error::InvalidOrbit("semi-major axis must be positive"));
        }
        if !(0.0..1.0).contains(&eccentricity) {
            return Err(Error::InvalidOrbit("eccentricity must lie in [0, 1)"));
        }
        if !psi0.is_finite() {
            return Err(Error::InvalidOrbit("psi0 must be finite"));
        }
        Ok(Self {
            semi_major,
            eccentricity,
            psi0,
            config,
        })
    }

    /// Radial period `2π sqrt(a³ / λ)` of the Newtonian conic.
    pub fn period(&self) -> f64 {
        TAU * (self.semi_major.powi(3) / self.config.lambda).sqrt()
    }

    /// Reduced state at closest approach, where `ψ = ψ₀ + π` under the
    /// `1 − ε cos(ψ − ψ₀)` convention. Newtonian law only.
    pub fn pericentre_state(&self) -> ReducedState {
        let e = self.eccentricity;
        let radius = self.semi_major * (1.0 - e);
        // Specific angular momentum h² = λ · a(1 − ε²).
        let h = (self.config.lambda * self.semi_major * (1.0 - e * e)).sqrt();
        ReducedState {
            radius,
            psi: self.psi0 + std::f64::consts::PI,
            theta: self.config.angles.theta,
            phi: self.config.angles.phi,
            radius_dot: 0.0,
            psi_dot: h / (radius * radius),
            theta_dot: 0.0,
            phi_dot: 0.0,
        }
    }
}

/// `R(ψ) = a(1 − ε²) / (1 − ε cos(ψ − ψ₀))`.
pub fn conic_radius(orbit: &ConicOrbit, psi: f64) -> Result<f64> {
    let e = orbit.eccentricity;
    let denom = 1.0 - e * (psi - orbit.psi0).cos();
    if e >= 1.0 || denom <= 0.0 {
        return Err(Error::InvalidOrbit("conic denominator must be positive"));
    }
    Ok(orbit.semi_major * (1.0 - e * e) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSample {
    pub psi: f64,
    pub radius: f64,
    /// `(x_i, y_i) = R(ψ) (cos ψ, sin ψ) r_i`.
    pub positions: [[f64; 2]; 4],
}

/// `samples` evenly spaced values of `ψ` over `[0, 2π]`, endpoints included.
pub fn homographic_orbit(orbit: &ConicOrbit, samples: usize) -> Result<Vec<OrbitSample>> {
    if samples < 2 {
        return Err(Error::InvalidOrbit("need at least two samples"));
    }
    let r = orbit.config.r;
    (0..samples)
        .map(|k| {
            let psi = TAU * k as f64 / (samples - 1) as f64;
            let radius = conic_radius(orbit, psi)?;
            let (s, c) = psi.sin_cos();
            Ok(OrbitSample {
                psi,
                radius,
                positions: r.map(|ri| [radius * c * ri, radius * s * ri]),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::OrderingClass;
    use crate::solver::{canonicalize, solve_region, SolverOptions};
    use crate::tetrahedron::MassQuadruple;
    use std::f64::consts::PI;

    fn table_setup() -> (ShapeTetrahedron, CollinearConfiguration) {
        let masses = MassQuadruple::new([20.0, 13.0, 7.0, 6.0]).unwrap();
        let tet = ShapeTetrahedron::new(&masses);
        let class = OrderingClass::from_labels(&[2, 3, 1, 4]).unwrap();
        let config = solve_region(
            &tet,
            class,
            PotentialLaw::NEWTONIAN,
            &SolverOptions::default(),
        )
        .unwrap();
        (tet, canonicalize(&config))
    }

    fn generic_state() -> ReducedState {
        ReducedState {
            radius: 1.3,
            psi: 0.2,
            theta: 1.2,
            phi: 0.6,
            radius_dot: -0.4,
            psi_dot: 3.0,
            theta_dot: 0.05,
            phi_dot: -0.08,
        }
    }

    #[test]
    fn conserved_special_cases() {
        let (tet, _) = table_setup();
        let law = PotentialLaw::NEWTONIAN;
        let mut s = generic_state();
        s.psi_dot = 0.0;
        assert_eq!(
            conserved_quantities(&s, &tet, law)
                .unwrap()
                .angular_momentum,
            0.0
        );

        let rest = ReducedState {
            radius_dot: 0.0,
            psi_dot: 0.0,
            theta_dot: 0.0,
            phi_dot: 0.0,
            ..generic_state()
        };
        let c = conserved_quantities(&rest, &tet, law).unwrap();
        assert_eq!(c.energy, potential_energy(&rest, &tet, law).unwrap());

        let s = generic_state();
        let doubled = ReducedState {
            radius: 2.0 * s.radius,
            ..s
        };
        let p1 = conserved_quantities(&s, &tet, law)
            .unwrap()
            .angular_momentum;
        let p2 = conserved_quantities(&doubled, &tet, law)
            .unwrap()
            .angular_momentum;
        assert!((p2 / p1 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn kinetic_forms_agree() {
        let mu = 6.19;
        let s = generic_state();
        let p = mu * s.radius.powi(2) * s.psi_dot;
        let (t1, t2) = (kinetic_energy(&s, mu), kinetic_energy_reduced(&s, mu, p));
        assert!((t1 - t2).abs() < 1e-12 * t1);
    }

    #[test]
    fn central_configuration_angles_stay_put() {
        let (tet, config) = table_setup();
        let law = PotentialLaw::NEWTONIAN;
        let d = derivatives(&circular_state(&config, 1.0, law), &tet, law).unwrap();
        let scale = config.lambda;
        assert!(
            d.theta_dot.abs() < 1e-10 * scale && d.phi_dot.abs() < 1e-10 * scale,
            "{d:?}"
        );
        // Circular balance: R̈ = 0.
        assert!(d.radius_dot.abs() < 1e-12 * scale, "{d:?}");
    }

    #[test]
    fn energy_is_stationary_along_flow() {
        let (tet, _) = table_setup();
        let law = PotentialLaw::NEWTONIAN;
        let s = generic_state();
        let d = derivatives(&s, &tet, law).unwrap();
        let (y, k) = (s.to_array(), d.to_array());
        let h = 1e-6;
        let e = |sign: f64| {
            let v = std::array::from_fn(|i| y[i] + sign * h * k[i]);
            conserved_quantities(&ReducedState::from_array(v), &tet, law).unwrap()
        };
        let (up, dn) = (e(1.0), e(-1.0));
        let de = (up.energy - dn.energy) / (2.0 * h);
        let dp = (up.angular_momentum - dn.angular_momentum) / (2.0 * h);
        let t = kinetic_energy(&s, tet.masses().mu());
        assert!(de.abs() < 1e-6 * t, "dE/dt = {de}");
        assert!(dp.abs() < 1e-6 * up.angular_momentum.abs(), "dP/dt = {dp}");
    }

    #[test]
    fn homothetic_collapse_truncates() {
        let (tet, config) = table_setup();
        let law = PotentialLaw::NEWTONIAN;
        let start = ReducedState {
            psi_dot: 0.0,
            ..circular_state(&config, 1.0, law)
        };
        let period = TAU / circular_rate(&config, 1.0, law);
        let traj = integrate(&start, &tet, law, period / 1e4, 200_000).unwrap();
        assert!(matches!(traj.truncated, Some(Truncation::Collision { .. })));
        let radii: Vec<f64> = traj.samples.iter().map(|(_, s)| s.radius).collect();
        assert!(radii.windows(2).skip(1).all(|w| w[1] < w[0]));
        assert!(*radii.last().unwrap() < 0.1);
    }

    #[test]
    fn rejects_singular_initial_state() {
        let (tet, _) = table_setup();
        let s = ReducedState {
            theta: 1e-8,
            ..generic_state()
        };
        assert!(matches!(
            integrate(&s, &tet, PotentialLaw::NEWTONIAN, 1e-3, 10),
            Err(Error::ChartSingularity { .. })
        ));
        let s = ReducedState {
            radius: -1.0,
            ..generic_state()
        };
        assert!(integrate(&s, &tet, PotentialLaw::NEWTONIAN, 1e-3, 10).is_err());
    }

    #[test]
    fn conic_radius_cases() {
        let (_, config) = table_setup();
        let circle = ConicOrbit::new(2.0, 0.0, 0.3, config).unwrap();
        for psi in [0.0, 1.0, 4.0] {
            assert_eq!(conic_radius(&circle, psi).unwrap(), 2.0);
        }
        let orbit = ConicOrbit::new(1.5, 0.7, 2.0 * PI / 5.0, config).unwrap();
        let r = conic_radius(&orbit, orbit.psi0 + PI / 2.0).unwrap();
        assert!((r - 1.5 * (1.0 - 0.49)).abs() < 1e-15);
        assert!(ConicOrbit::new(1.0, 1.0, 0.0, config).is_err());
        assert!(ConicOrbit::new(-1.0, 0.5, 0.0, config).is_err());
    }

    #[test]
    fn orbit_samples_are_similar_conics() {
        let (_, config) = table_setup();
        let orbit = ConicOrbit::new(1.0, 0.7, 2.0 * PI / 5.0, config).unwrap();
        let samples = homographic_orbit(&orbit, 361).unwrap();
        assert_eq!(samples.len(), 361);
        for s in &samples {
            for i in 0..4 {
                let [x, y] = s.positions[i];
                let ratio = x.hypot(y) / s.radius;
                assert!((ratio - config.r[i].abs()).abs() < 1e-12);
            }
        }
        assert!(homographic_orbit(&orbit, 1).is_err());

        let mut zeroed = config;
        zeroed.r[1] = 0.0;
        let orbit = ConicOrbit::new(1.0, 0.3, 0.0, zeroed).unwrap();
        assert!(homographic_orbit(&orbit, 10)
            .unwrap()
            .iter()
            .all(|s| s.positions[1] == [0.0, 0.0]));
    }
}
