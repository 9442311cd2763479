//! JSON and CSV serialization of command results.
//!
//! Every number is written with 17 significant digits (C's `%.17g`), so
//! parsing the output recovers the exact `f64` values.

use std::io::{self, Write};

use collinear4::chart::GridPoint;
use collinear4::dynamics::{OrbitSample, Trajectory, Truncation};
use collinear4::tetrahedron::{Deviation, TetrahedronReport, EDGE_PAIRS};
use collinear4::{
    CollinearConfiguration, ConicOrbit, MassQuadruple, PotentialLaw, ReducedState, ShapeTetrahedron,
};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::args::Format;

/// Formats `x` like C's `%.17g`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A JSON number in `%.17g` form; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(g17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn nums<const N: usize>(v: [f64; N]) -> [Num; N] {
    v.map(Num)
}

/// Outcome of one command, ready for [`emit_results`].
#[derive(Debug, Clone)]
pub enum Results {
    Solve {
        masses: MassQuadruple,
        law: PotentialLaw,
        config: CollinearConfiguration,
    },
    Enumerate {
        masses: MassQuadruple,
        law: PotentialLaw,
        configs: Vec<CollinearConfiguration>,
        /// Oracle deviation per configuration, when verified.
        deviations: Option<Vec<f64>>,
    },
    Validate {
        masses: MassQuadruple,
        tet: ShapeTetrahedron,
        report: TetrahedronReport,
    },
    Project {
        points: Vec<GridPoint>,
    },
    Orbit {
        masses: MassQuadruple,
        orbit: ConicOrbit,
        samples: Vec<OrbitSample>,
    },
    Simulate {
        masses: MassQuadruple,
        law: PotentialLaw,
        config: CollinearConfiguration,
        dt: f64,
        sample_every: usize,
        trajectory: Trajectory,
    },
}

#[derive(Serialize)]
struct ConfigJson {
    theta: Num,
    phi: Num,
    r: [Num; 4],
    ordering: [usize; 4],
    lambda: Num,
    residual_theta: Num,
    residual_phi: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_deviation: Option<Num>,
}

impl ConfigJson {
    fn new(c: &CollinearConfiguration, deviation: Option<f64>) -> Self {
        Self {
            theta: Num(c.angles.theta),
            phi: Num(c.angles.phi),
            r: nums(c.r),
            ordering: c.ordering.labels(),
            lambda: Num(c.lambda),
            residual_theta: Num(c.residual_theta),
            residual_phi: Num(c.residual_phi),
            oracle_deviation: deviation.map(Num),
        }
    }
}

#[derive(Serialize)]
struct EnumerateJson {
    masses: [Num; 4],
    mu: Num,
    law_exponent: Num,
    configurations: Vec<ConfigJson>,
}

#[derive(Serialize)]
struct SolveJson {
    masses: [Num; 4],
    mu: Num,
    law_exponent: Num,
    configuration: ConfigJson,
    iterations: usize,
}

#[derive(Serialize)]
struct DeviationJson {
    absolute: Num,
    relative: Num,
}

impl From<Deviation> for DeviationJson {
    fn from(d: Deviation) -> Self {
        Self {
            absolute: Num(d.absolute),
            relative: Num(d.relative),
        }
    }
}

#[derive(Serialize)]
struct EdgeJson {
    pair: [usize; 2],
    absolute: Num,
    relative: Num,
}

#[derive(Serialize)]
struct ValidateJson {
    masses: [Num; 4],
    mu: Num,
    tolerance: Num,
    passed: bool,
    vertices: Vec<[Num; 3]>,
    centroid: DeviationJson,
    inertia: DeviationJson,
    edges: Vec<EdgeJson>,
    volume: DeviationJson,
}

#[derive(Serialize)]
struct GridJson {
    theta: Num,
    phi: Num,
    x: Num,
    y: Num,
    ordering_id: usize,
    is_boundary: bool,
}

#[derive(Serialize)]
struct OrbitSampleJson {
    psi: Num,
    radius: Num,
    x: [Num; 4],
    y: [Num; 4],
}

#[derive(Serialize)]
struct OrbitJson {
    masses: [Num; 4],
    mu: Num,
    semi_major: Num,
    eccentricity: Num,
    psi0: Num,
    period: Num,
    configuration: ConfigJson,
    samples: Vec<OrbitSampleJson>,
}

#[derive(Serialize)]
struct StateJson {
    t: Num,
    radius: Num,
    psi: Num,
    theta: Num,
    phi: Num,
    radius_dot: Num,
    psi_dot: Num,
    theta_dot: Num,
    phi_dot: Num,
}

impl StateJson {
    fn new(t: f64, s: &ReducedState) -> Self {
        Self {
            t: Num(t),
            radius: Num(s.radius),
            psi: Num(s.psi),
            theta: Num(s.theta),
            phi: Num(s.phi),
            radius_dot: Num(s.radius_dot),
            psi_dot: Num(s.psi_dot),
            theta_dot: Num(s.theta_dot),
            phi_dot: Num(s.phi_dot),
        }
    }
}

#[derive(Serialize)]
struct SimulateJson {
    masses: [Num; 4],
    mu: Num,
    law_exponent: Num,
    configuration: ConfigJson,
    dt: Num,
    steps_taken: usize,
    energy_drift: Num,
    angular_momentum_drift: Num,
    max_angle_deviation: Num,
    truncated: Option<String>,
    samples: Vec<StateJson>,
}

fn truncation_text(t: &Truncation) -> String {
    match t {
        Truncation::Collision { step } => format!("collision at step {step}"),
        Truncation::ChartSingularity { step } => format!("chart singularity at step {step}"),
        Truncation::Failure { step, error } => format!("failure at step {step}: {error}"),
    }
}

/// Rows kept from a trajectory: every `every`-th step plus the last one.
fn thinned(trajectory: &Trajectory, every: usize) -> impl Iterator<Item = &(f64, ReducedState)> {
    let last = trajectory.samples.len() - 1;
    trajectory
        .samples
        .iter()
        .enumerate()
        .filter(move |(k, _)| k % every == 0 || *k == last)
        .map(|(_, s)| s)
}

fn write_json<T: Serialize>(value: &T, w: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)
}

fn write_csv(
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
    w: &mut dyn Write,
) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()
}

fn to_json(results: &Results) -> serde_json::Result<Box<RawValue>> {
    fn raw<T: Serialize>(v: &T) -> serde_json::Result<Box<RawValue>> {
        serde_json::value::to_raw_value(v)
    }
    match results {
        Results::Solve {
            masses,
            law,
            config,
        } => raw(&SolveJson {
            masses: nums(masses.masses()),
            mu: Num(masses.mu()),
            law_exponent: Num(law.exponent()),
            configuration: ConfigJson::new(config, None),
            iterations: config.iterations,
        }),
        Results::Enumerate {
            masses,
            law,
            configs,
            deviations,
        } => raw(&EnumerateJson {
            masses: nums(masses.masses()),
            mu: Num(masses.mu()),
            law_exponent: Num(law.exponent()),
            configurations: configs
                .iter()
                .enumerate()
                .map(|(k, c)| ConfigJson::new(c, deviations.as_ref().map(|d| d[k])))
                .collect(),
        }),
        Results::Validate {
            masses,
            tet,
            report,
        } => raw(&ValidateJson {
            masses: nums(masses.masses()),
            mu: Num(masses.mu()),
            tolerance: Num(report.tolerance),
            passed: report.passed(),
            vertices: (0..4).map(|i| nums(tet.vertex(i))).collect(),
            centroid: report.centroid.into(),
            inertia: report.inertia.into(),
            edges: EDGE_PAIRS
                .iter()
                .zip(&report.edges)
                .map(|(&(i, j), d)| EdgeJson {
                    pair: [i + 1, j + 1],
                    absolute: Num(d.absolute),
                    relative: Num(d.relative),
                })
                .collect(),
            volume: report.volume.into(),
        }),
        Results::Project { points } => raw(&points
            .iter()
            .map(|p| GridJson {
                theta: Num(p.angles.theta),
                phi: Num(p.angles.phi),
                x: Num(p.x),
                y: Num(p.y),
                ordering_id: p.ordering_id,
                is_boundary: p.is_boundary,
            })
            .collect::<Vec<_>>()),
        Results::Orbit {
            masses,
            orbit,
            samples,
        } => raw(&OrbitJson {
            masses: nums(masses.masses()),
            mu: Num(masses.mu()),
            semi_major: Num(orbit.semi_major),
            eccentricity: Num(orbit.eccentricity),
            psi0: Num(orbit.psi0),
            period: Num(orbit.period()),
            configuration: ConfigJson::new(&orbit.config, None),
            samples: samples
                .iter()
                .map(|s| OrbitSampleJson {
                    psi: Num(s.psi),
                    radius: Num(s.radius),
                    x: nums(s.positions.map(|p| p[0])),
                    y: nums(s.positions.map(|p| p[1])),
                })
                .collect(),
        }),
        Results::Simulate {
            masses,
            law,
            config,
            dt,
            sample_every,
            trajectory,
        } => raw(&SimulateJson {
            masses: nums(masses.masses()),
            mu: Num(masses.mu()),
            law_exponent: Num(law.exponent()),
            configuration: ConfigJson::new(config, None),
            dt: Num(*dt),
            steps_taken: trajectory.samples.len() - 1,
            energy_drift: Num(trajectory.energy_drift),
            angular_momentum_drift: Num(trajectory.angular_momentum_drift),
            max_angle_deviation: Num(trajectory.max_angle_deviation()),
            truncated: trajectory.truncated.as_ref().map(truncation_text),
            samples: thinned(trajectory, *sample_every)
                .map(|(t, s)| StateJson::new(*t, s))
                .collect(),
        }),
    }
}

const PROJECT_HEADER: [&str; 6] = ["theta", "phi", "X", "Y", "ordering_id", "is_boundary"];
const ORBIT_HEADER: [&str; 9] = ["psi", "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4"];
const SIMULATE_HEADER: [&str; 9] = [
    "t",
    "radius",
    "psi",
    "theta",
    "phi",
    "radius_dot",
    "psi_dot",
    "theta_dot",
    "phi_dot",
];

fn to_csv(results: &Results, w: &mut dyn Write) -> io::Result<()> {
    match results {
        Results::Project { points } => write_csv(
            &PROJECT_HEADER,
            points.iter().map(|p| {
                vec![
                    g17(p.angles.theta),
                    g17(p.angles.phi),
                    g17(p.x),
                    g17(p.y),
                    p.ordering_id.to_string(),
                    u8::from(p.is_boundary).to_string(),
                ]
            }),
            w,
        ),
        Results::Orbit { samples, .. } => write_csv(
            &ORBIT_HEADER,
            samples.iter().map(|s| {
                let mut row = vec![g17(s.psi)];
                row.extend(s.positions.iter().flat_map(|p| [g17(p[0]), g17(p[1])]));
                row
            }),
            w,
        ),
        Results::Simulate {
            trajectory,
            sample_every,
            ..
        } => write_csv(
            &SIMULATE_HEADER,
            thinned(trajectory, *sample_every).map(|(t, s)| {
                [
                    *t,
                    s.radius,
                    s.psi,
                    s.theta,
                    s.phi,
                    s.radius_dot,
                    s.psi_dot,
                    s.theta_dot,
                    s.phi_dot,
                ]
                .map(g17)
                .to_vec()
            }),
            w,
        ),
        _ => Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "result has no CSV form",
        )),
    }
}

/// Writes `results` in `format`. Identical inputs give identical bytes.
pub fn emit_results(results: &Results, format: Format, w: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => write_json(&to_json(results)?, w),
        Format::Csv => to_csv(results, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        // Reference strings from C printf("%.17g").
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789012345680.0, "1.2345678901234568e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (5e-324, "4.9406564584124654e-324"),
            (-0.0, "-0"),
        ];
        for (x, s) in cases {
            assert_eq!(g17(x), s, "{x:e}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -1.7976931348623157e308,
            2.2250738585072014e-308,
        ] {
            assert_eq!(g17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
