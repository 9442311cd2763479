//! Central configurations by alternating one-angle root finding.
//!
//! Inside an ordering region `V(θ, φ)` tends to `−∞` at every boundary
//! circle, so along any coordinate line clipped to the region the derivative
//! changes sign from `+` to `−` exactly once at the line maximum. Each sweep
//! solves `F_θ = 0` in `θ` with `φ` frozen, then `F_φ = 0` in `φ` with `θ`
//! frozen. Once sweeps settle, a two-dimensional Newton step on
//! `(F_θ, F_φ)` finishes the job.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::chart::{min_gap, project, seed_for_ordering, tangents, OrderingClass, ShapeAngles};
use crate::error::{Error, Result};
use crate::potential::{
    angular_jacobian, angular_residuals, chart_potential, lambda_multiplier, residual_scale,
    PotentialLaw,
};
use crate::tetrahedron::{MassQuadruple, ShapeTetrahedron};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on successive angle changes (radians).
    pub angle_tol: f64,
    /// Threshold on `max(|F_θ|, |F_φ|) / (Σ m_i m_j / μ)`.
    pub residual_tol: f64,
    pub max_sweeps: usize,
    pub newton_polish: bool,
    pub rng_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            angle_tol: 1e-13,
            residual_tol: 1e-11,
            max_sweeps: 200,
            newton_polish: true,
            rng_seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_tol > 0.0 && self.angle_tol.is_finite()) {
            return Err(Error::InvalidOptions("angle_tol must be positive"));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidOptions("residual_tol must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidOptions("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// Sweeps hand over to Newton once successive changes fall below this.
const POLISH_HANDOFF: f64 = 1e-6;
/// Sign-scan resolution of each line search.
const SCAN_CELLS: usize = 64;
/// Rounding error of `F_θ`, `F_φ` in units of `ε` times the summed pair-term
/// magnitudes, including the error propagated from the coordinates.
const FLOOR_ULPS: f64 = 8.0;

/// A solved collinear central configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollinearConfiguration {
    pub angles: ShapeAngles,
    pub r: [f64; 4],
    pub ordering: OrderingClass,
    pub lambda: f64,
    /// `|F_θ|` at the solution.
    pub residual_theta: f64,
    /// `|F_φ|` at the solution.
    pub residual_phi: f64,
    /// Sweeps plus Newton steps.
    pub iterations: usize,
}

impl CollinearConfiguration {
    /// `max(|F_θ|, |F_φ|)` relative to `Σ m_i m_j / μ`.
    pub fn relative_residual(&self, masses: &MassQuadruple) -> f64 {
        self.residual_theta.max(self.residual_phi) / residual_scale(masses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Theta,
    Phi,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Theta => "theta",
            Axis::Phi => "phi",
        }
    }
}

struct Problem<'a> {
    tet: &'a ShapeTetrahedron,
    law: PotentialLaw,
    region: OrderingClass,
}

impl Problem<'_> {
    fn inside(&self, angles: ShapeAngles) -> bool {
        let r = project(self.tet, angles);
        let p = self.region.perm();
        (0..3).all(|k| r[p[k]] > r[p[k + 1]])
    }

    fn at(axis: Axis, base: ShapeAngles, x: f64) -> ShapeAngles {
        match axis {
            Axis::Theta => ShapeAngles {
                theta: x,
                phi: base.phi,
            },
            Axis::Phi => ShapeAngles {
                theta: base.theta,
                phi: x,
            },
        }
    }

    /// Derivative of `V` along the line, up to a positive factor.
    fn slope(&self, axis: Axis, base: ShapeAngles, x: f64) -> Result<f64> {
        let (ft, fp) = angular_residuals(self.tet, Self::at(axis, base, x), self.law)?;
        Ok(match axis {
            Axis::Theta => ft,
            Axis::Phi => fp,
        })
    }

    /// Interval of `x` around the current coordinate that stays in the region.
    fn clip(&self, axis: Axis, base: ShapeAngles) -> (f64, f64) {
        let x0 = match axis {
            Axis::Theta => base.theta,
            Axis::Phi => base.phi,
        };
        let (lo_limit, hi_limit) = match axis {
            Axis::Theta => (0.0, PI),
            Axis::Phi => (x0 - PI, x0 + PI),
        };
        let edge = |limit: f64| {
            let step = 1e-2 * (limit - x0).signum();
            let mut inner = x0;
            loop {
                let next = inner + step;
                if (next - limit) * step.signum() >= 0.0 {
                    break self.bisect_edge(axis, base, inner, limit);
                }
                if !self.inside(Self::at(axis, base, next)) {
                    break self.bisect_edge(axis, base, inner, next);
                }
                inner = next;
            }
        };
        (edge(lo_limit), edge(hi_limit))
    }

    fn bisect_edge(&self, axis: Axis, base: ShapeAngles, mut inner: f64, mut outer: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if mid == inner || mid == outer {
                break;
            }
            if self.inside(Self::at(axis, base, mid)) {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        inner
    }

    /// Local maximum of `V` along the line through `base`, reached by going
    /// uphill from the current coordinate so that `V` never decreases.
    fn line_solve(&self, axis: Axis, base: ShapeAngles) -> Result<f64> {
        let x0 = match axis {
            Axis::Theta => base.theta,
            Axis::Phi => base.phi,
        };
        let slope = |x: f64| self.slope(axis, base, x);
        let f0 = slope(x0)?;
        if f0 == 0.0 {
            return Ok(x0);
        }
        let (lo, hi) = self.clip(axis, base);
        // Slope is +inf at `lo` and -inf at `hi`; walk towards the edge the
        // slope points at until it changes sign.
        let uphill = f0 > 0.0;
        let edge = if uphill { hi } else { lo };
        let mut prev = (x0, f0);
        let mut bracket = None;
        for k in 1..SCAN_CELLS {
            let x = x0 + (edge - x0) * k as f64 / SCAN_CELLS as f64;
            let fx = slope(x)?;
            if (fx > 0.0) != uphill || fx == 0.0 {
                bracket = Some(Ok((prev, (x, fx))));
                break;
            }
            prev = (x, fx);
        }
        let bracket = bracket
            .unwrap_or_else(|| approach_edge(&slope, edge, prev.0, !uphill).map(|far| (prev, far)));

        let x = match bracket {
            Ok(((a, fa), (b, fb))) => {
                if fb == 0.0 {
                    b
                } else {
                    brent(&slope, a, fa, b, fb)?
                }
            }
            // Flat numerics near the edge: fall back to maximizing V itself.
            Err(()) => {
                let (a, b) = if uphill { (x0, hi) } else { (lo, x0) };
                let width = b - a;
                golden_max(
                    |x| {
                        chart_potential(self.tet, Self::at(axis, base, x), self.law)
                            .unwrap_or(f64::NEG_INFINITY)
                    },
                    a + 1e-12 * width,
                    b - 1e-12 * width,
                )
            }
        };
        if !self.inside(Self::at(axis, base, x)) {
            return Err(Error::RegionExit {
                region: self.region,
                axis: axis.name(),
            });
        }
        Ok(x)
    }

    fn relative_residual(&self, angles: ShapeAngles) -> Result<f64> {
        let (ft, fp) = angular_residuals(self.tet, angles, self.law)?;
        Ok(ft.abs().max(fp.abs()) / residual_scale(self.tet.masses()))
    }

    /// Relative residual that rounding alone can produce at `angles`. Only
    /// exceeds the default tolerance for extreme mass ratios.
    fn residual_floor(&self, angles: ShapeAngles) -> f64 {
        let m = self.tet.masses().masses();
        let a = self.law.exponent();
        let r = project(self.tet, angles);
        let (s, t) = tangents(self.tet, angles);
        let extent = r.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let (mut sum_s, mut sum_t) = (0.0_f64, 0.0_f64);
        for i in 0..4 {
            for j in i + 1..4 {
                let d = (r[i] - r[j]).abs();
                // Rounding of `r` itself is amplified by `(a + 1) / d`.
                let w = a * m[i] * m[j] * d.powf(-a - 1.0) * (1.0 + (a + 1.0) * extent / d);
                sum_s += w * (s[i] - s[j]).abs();
                sum_t += w * (t[i] - t[j]).abs();
            }
        }
        // Angles are only representable to an ulp, so `F` cannot be resolved
        // below `|J| ulp` either.
        let quantized = angular_jacobian(self.tet, angles, self.law).map_or(0.0, |j| {
            let ulp = [angles.theta.abs(), angles.phi.abs()].map(|x| f64::EPSILON * x.max(1.0));
            (0..2)
                .map(|row| j[row][0].abs() * ulp[0] + j[row][1].abs() * ulp[1])
                .fold(0.0, f64::max)
        });
        (FLOOR_ULPS * f64::EPSILON * sum_s.max(sum_t)).max(2.0 * quantized)
            / residual_scale(self.tet.masses())
    }

    fn accepts(&self, angles: ShapeAngles, residual_tol: f64) -> Result<bool> {
        let tol = residual_tol.max(self.residual_floor(angles));
        Ok(self.relative_residual(angles)? < tol)
    }

    /// Newton iteration on `(F_θ, F_φ)`. Returns the final point, the number
    /// of accepted steps and whether the last step was below `angle_tol`.
    fn newton(&self, start: ShapeAngles, angle_tol: f64) -> Result<(ShapeAngles, usize, bool)> {
        let norm = |a: ShapeAngles| -> Result<f64> {
            let (ft, fp) = angular_residuals(self.tet, a, self.law)?;
            Ok(ft.hypot(fp))
        };
        let mut x = start;
        let mut fx = norm(x)?;
        for step_count in 0..30 {
            let (ft, fp) = angular_residuals(self.tet, x, self.law)?;
            let j = angular_jacobian(self.tet, x, self.law)?;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return Ok((x, step_count, false));
            }
            let dt = -(j[1][1] * ft - j[0][1] * fp) / det;
            let dp = -(-j[1][0] * ft + j[0][0] * fp) / det;
            let size = dt.abs().max(dp.abs());
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..8 {
                let trial = ShapeAngles {
                    theta: x.theta + scale * dt,
                    phi: x.phi + scale * dp,
                };
                if self.inside(trial) {
                    let ftrial = norm(trial)?;
                    if ftrial <= fx {
                        accepted = Some((trial, ftrial));
                        break;
                    }
                }
                scale *= 0.5;
            }
            match accepted {
                Some((trial, ftrial)) => {
                    x = trial;
                    fx = ftrial;
                    if size * scale < angle_tol {
                        return Ok((x, step_count + 1, true));
                    }
                }
                // At the rounding floor no step lowers the residual.
                None => return Ok((x, step_count, size < 1e3 * angle_tol)),
            }
        }
        Ok((x, 30, false))
    }
}

/// Values at `edge − (edge − inner)·2^-k` until the slope has the sign
/// expected next to that edge (`positive` at the lower edge).
fn approach_edge<F>(
    slope: &F,
    edge: f64,
    inner: f64,
    positive: bool,
) -> std::result::Result<(f64, f64), ()>
where
    F: Fn(f64) -> Result<f64>,
{
    let d = edge - inner;
    let mut frac = 0.5;
    for _ in 0..60 {
        let x = inner + d * (1.0 - frac);
        if x == edge {
            break;
        }
        match slope(x) {
            Ok(fx) if (fx > 0.0) == positive && fx != 0.0 => return Ok((x, fx)),
            Ok(_) => {}
            Err(_) => break,
        }
        frac *= 0.5;
    }
    Err(())
}

/// Brent's method: inverse quadratic / secant steps safeguarded by bisection.
fn brent<F>(f: &F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb == 0.0 {
            return Ok(b);
        }
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Solves the central configuration in the region containing `seed`.
pub fn solve_from_seed(
    tet: &ShapeTetrahedron,
    seed: ShapeAngles,
    law: PotentialLaw,
    opts: &SolverOptions,
) -> Result<CollinearConfiguration> {
    opts.validate()?;
    let r0 = project(tet, seed);
    let region = OrderingClass::from_coordinates(&r0);
    if min_gap(&r0).0 <= 0.0 {
        return Err(Error::RegionExit {
            region,
            axis: "seed",
        });
    }
    let problem = Problem { tet, law, region };

    let mut angles = seed;
    let mut iterations = 0;
    for _ in 0..opts.max_sweeps {
        iterations += 1;
        let theta = problem.line_solve(Axis::Theta, angles)?;
        let moved = ShapeAngles { theta, ..angles };
        let phi = problem.line_solve(Axis::Phi, moved)?;
        let next = ShapeAngles { theta, phi };
        let delta = (next.theta - angles.theta)
            .abs()
            .max((next.phi - angles.phi).abs());
        angles = next;

        if opts.newton_polish && delta < POLISH_HANDOFF {
            let (polished, steps, settled) = problem.newton(angles, opts.angle_tol)?;
            iterations += steps;
            angles = polished;
            if settled && problem.accepts(angles, opts.residual_tol)? {
                return finish(tet, angles, law, iterations);
            }
        }
        if delta < opts.angle_tol && problem.accepts(angles, opts.residual_tol)? {
            return finish(tet, angles, law, iterations);
        }
    }
    Err(Error::NoConvergence {
        region,
        sweeps: opts.max_sweeps,
        residual: problem.relative_residual(angles)?,
    })
}

fn finish(
    tet: &ShapeTetrahedron,
    angles: ShapeAngles,
    law: PotentialLaw,
    iterations: usize,
) -> Result<CollinearConfiguration> {
    let angles = ShapeAngles::new(angles.theta, angles.phi);
    let r = project(tet, angles);
    let (ft, fp) = angular_residuals(tet, angles, law)?;
    Ok(CollinearConfiguration {
        angles,
        r,
        ordering: OrderingClass::from_coordinates(&r),
        lambda: lambda_multiplier(tet.masses(), &r, law)?,
        residual_theta: ft.abs(),
        residual_phi: fp.abs(),
        iterations,
    })
}

/// Seeds and solves the region of `class` (in that orientation).
pub fn solve_region(
    tet: &ShapeTetrahedron,
    class: OrderingClass,
    law: PotentialLaw,
    opts: &SolverOptions,
) -> Result<CollinearConfiguration> {
    let seed = seed_for_ordering(tet, class, region_seed(opts.rng_seed, class))?;
    solve_from_seed(tet, seed, law, opts)
}

fn region_seed(base: u64, class: OrderingClass) -> u64 {
    let p = class.perm();
    let code = p.iter().fold(0u64, |acc, &x| acc * 4 + x as u64);
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(code)
}

/// Mirrors a configuration to the northern-hemisphere representative of its
/// class. Idempotent.
pub fn canonicalize(config: &CollinearConfiguration) -> CollinearConfiguration {
    if config.ordering.is_canonical() {
        return *config;
    }
    CollinearConfiguration {
        angles: config.angles.antipode(),
        r: config.r.map(|x| -x),
        ordering: config.ordering.reversed(),
        ..*config
    }
}

/// All twelve collinear central configurations, in canonical class order.
pub fn enumerate_all(
    masses: &MassQuadruple,
    law: PotentialLaw,
    opts: &SolverOptions,
) -> Result<Vec<CollinearConfiguration>> {
    opts.validate()?;
    let tet = ShapeTetrahedron::new(masses);
    let outcomes: Vec<_> = OrderingClass::canonical_classes()
        .into_par_iter()
        .map(|class| {
            (
                class,
                solve_region(&tet, class, law, opts).map(|c| canonicalize(&c)),
            )
        })
        .collect();

    let mut configs = Vec::with_capacity(12);
    let mut failures = Vec::new();
    for (class, outcome) in outcomes {
        match outcome {
            Ok(c) if c.ordering == class => configs.push(c),
            Ok(c) => failures.push((
                class,
                Error::RegionExit {
                    region: c.ordering,
                    axis: "solve",
                },
            )),
            Err(e) => failures.push((class, e)),
        }
    }
    if failures.is_empty() {
        Ok(configs)
    } else {
        Err(Error::Enumeration(failures))
    }
}
