//! Command-line parsing into a validated [`RunConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collinear4::{MassQuadruple, OrderingClass, PotentialLaw, ShapeAngles, SolverOptions};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// How the entries of `--class` name the bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassBy {
    /// Body indices 1..4.
    Index,
    /// Mass values, matched against `--masses`.
    Mass,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Solve {
        target: SolveTarget,
    },
    Enumerate {
        verify: bool,
    },
    Validate {
        tolerance: f64,
    },
    Project {
        grid: usize,
        boundary_tol: Option<f64>,
    },
    Orbit {
        class: OrderingClass,
        eccentricity: f64,
        psi0: f64,
        semi_major: f64,
        samples: usize,
    },
    Simulate {
        class: OrderingClass,
        eccentricity: f64,
        psi0: f64,
        semi_major: f64,
        periods: f64,
        steps: usize,
        sample_every: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveTarget {
    Region(OrderingClass),
    Seed(ShapeAngles),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub masses: MassQuadruple,
    pub law: PotentialLaw,
    pub solver: SolverOptions,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Parser)]
#[command(
    name = "collinear4",
    version,
    about = "Collinear central configurations of four bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve one ordering region, or from a starting point on the shape sphere.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        class: ClassArgs,
        /// Starting angles THETA,PHI instead of a region.
        #[arg(long, value_name = "THETA,PHI", conflicts_with = "class")]
        start: Option<String>,
    },
    /// Find all twelve collinear central configurations.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        /// Cross-check every configuration against the direct line solver.
        #[arg(long)]
        verify: bool,
    },
    /// Check the shape tetrahedron invariants.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = collinear4::tetrahedron::TETRAHEDRON_TOL)]
        tol: f64,
    },
    /// Sample the ordering regions on a stereographic hemisphere grid.
    Project {
        #[command(flatten)]
        common: Common,
        /// Grid resolution; the output has GRID x GRID rows.
        #[arg(long, default_value_t = 500)]
        grid: usize,
        /// Gap below which a point counts as a boundary point.
        #[arg(long)]
        boundary_tol: Option<f64>,
    },
    /// Sample a homographic Kepler orbit of one configuration.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, default_value_t = 0.7)]
        ecc: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU / 5.0)]
        psi0: f64,
        /// Semi-major axis.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 361)]
        samples: usize,
    },
    /// Integrate the reduced equations from circular or pericentre data.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        class: ClassArgs,
        /// 0 gives circular motion; otherwise start at the conic pericentre.
        #[arg(long, default_value_t = 0.0)]
        ecc: f64,
        #[arg(long, default_value_t = 0.0)]
        psi0: f64,
        /// Radius (circular) or semi-major axis (conic).
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Keep every Nth step in the output.
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Four positive masses, comma separated.
    #[arg(long, value_name = "M1,M2,M3,M4", value_parser = parse_masses)]
    masses: [f64; 4],
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SolverArgs {
    /// Potential exponent a in V = -sum m_i m_j / |r_i - r_j|^a.
    #[arg(long, default_value_t = 1.0)]
    law: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    angle_tol: Option<f64>,
    #[arg(long)]
    residual_tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Disable the final Newton refinement.
    #[arg(long)]
    no_polish: bool,
}

#[derive(Args)]
struct ClassArgs {
    /// Ordering from largest to smallest coordinate, e.g. 2,3,1,4 or 13,7,20,6.
    #[arg(long, value_name = "B1,B2,B3,B4")]
    class: Option<String>,
    #[arg(long, value_enum, requires = "class")]
    class_by: Option<ClassBy>,
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{t}' is not a number"))
        })
        .collect()
}

fn parse_masses(s: &str) -> Result<[f64; 4], String> {
    let values = parse_list(s)?;
    let masses: [f64; 4] = values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected four masses, got {}", v.len()))?;
    MassQuadruple::new(masses).map_err(|e| e.to_string())?;
    Ok(masses)
}

/// Resolves `--class` as body indices when it is a permutation of 1..4 and as
/// mass values otherwise. Inputs that read both ways with different meanings
/// need `--class-by`.
fn resolve_class(
    raw: &str,
    by: Option<ClassBy>,
    masses: &[f64; 4],
) -> Result<OrderingClass, String> {
    let values = parse_list(raw)?;
    if values.len() != 4 {
        return Err(format!("--class needs four entries, got {}", values.len()));
    }
    let by_index = || -> Option<OrderingClass> {
        let labels: Vec<usize> = values
            .iter()
            .map(|&v| (v.fract() == 0.0 && (1.0..=4.0).contains(&v)).then_some(v as usize))
            .collect::<Option<_>>()?;
        OrderingClass::from_labels(&labels).ok()
    };
    let by_mass = || -> Option<OrderingClass> {
        let mut perm = [0; 4];
        for (slot, &v) in perm.iter_mut().zip(&values) {
            let mut hits = (0..4).filter(|&i| masses[i] == v);
            *slot = hits.next()?;
            if hits.next().is_some() {
                return None;
            }
        }
        OrderingClass::new(perm).ok()
    };
    match by {
        Some(ClassBy::Index) => {
            by_index().ok_or_else(|| format!("--class {raw} is not a permutation of 1,2,3,4"))
        }
        Some(ClassBy::Mass) => by_mass().ok_or_else(|| {
            format!("--class {raw} does not name each of the four distinct masses once")
        }),
        None => match (by_index(), by_mass()) {
            (Some(a), Some(b)) if a != b => Err(format!(
                "--class {raw} reads as bodies {a} or as masses {b}; pass --class-by index|mass"
            )),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(format!(
                "--class {raw} is neither a permutation of 1,2,3,4 nor of the distinct mass values"
            )),
        },
    }
}

fn parse_start(s: &str) -> Result<ShapeAngles, String> {
    match parse_list(s)?.as_slice() {
        &[theta, phi] if theta.is_finite() && phi.is_finite() => Ok(ShapeAngles::new(theta, phi)),
        _ => Err(format!("--start {s} must be two finite numbers THETA,PHI")),
    }
}

fn solver_options(args: &SolverArgs) -> Result<(PotentialLaw, SolverOptions), String> {
    let law = PotentialLaw::new(args.law).map_err(|e| e.to_string())?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        angle_tol: args.angle_tol.unwrap_or(defaults.angle_tol),
        residual_tol: args.residual_tol.unwrap_or(defaults.residual_tol),
        max_sweeps: args.max_sweeps.unwrap_or(defaults.max_sweeps),
        newton_polish: !args.no_polish,
        rng_seed: args.seed,
    };
    opts.validate().map_err(|e| e.to_string())?;
    Ok((law, opts))
}

fn required_class(args: &ClassArgs, masses: &[f64; 4]) -> Result<OrderingClass, String> {
    match &args.class {
        Some(raw) => resolve_class(raw, args.class_by, masses),
        None => Err("--class is required".into()),
    }
}

fn pick_format(
    requested: Option<Format>,
    allowed: &[Format],
    command: &str,
) -> Result<Format, String> {
    match requested {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(format!("{command} does not support --format {f:?}").to_lowercase()),
    }
}

fn check_positive(value: f64, flag: &str) -> Result<(), String> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(format!("{flag} must be positive and finite"))
    }
}

fn check_eccentricity(ecc: f64) -> Result<(), String> {
    if (0.0..1.0).contains(&ecc) {
        Ok(())
    } else {
        Err("--ecc must lie in [0, 1)".into())
    }
}

/// Parses `argv` (program name first). Help and version requests come back as
/// [`CliError::Info`].
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let text = e.render().to_string();
        if e.exit_code() == 0 {
            CliError::Info(text)
        } else {
            CliError::Usage(text)
        }
    })?;
    build(cli).map_err(|msg| CliError::Usage(format!("error: {msg}\n")))
}

fn build(cli: Cli) -> Result<RunConfig, String> {
    use Format::{Csv, Json};
    let base = |common: Common, law, solver, format, command| -> Result<RunConfig, String> {
        Ok(RunConfig {
            command,
            masses: MassQuadruple::new(common.masses).map_err(|e| e.to_string())?,
            law,
            solver,
            output: common.output,
            format,
        })
    };
    let plain = (PotentialLaw::NEWTONIAN, SolverOptions::default());

    match cli.command {
        Sub::Solve {
            common,
            solver,
            class,
            start,
        } => {
            let (law, opts) = solver_options(&solver)?;
            let format = pick_format(common.format, &[Json], "solve")?;
            let target = match start {
                Some(s) => SolveTarget::Seed(parse_start(&s)?),
                None => SolveTarget::Region(
                    required_class(&class, &common.masses)
                        .map_err(|_| "solve needs --class or --start".to_string())?,
                ),
            };
            base(common, law, opts, format, Command::Solve { target })
        }
        Sub::Enumerate {
            common,
            solver,
            verify,
        } => {
            let (law, opts) = solver_options(&solver)?;
            let format = pick_format(common.format, &[Json], "enumerate")?;
            base(common, law, opts, format, Command::Enumerate { verify })
        }
        Sub::Validate { common, tol } => {
            check_positive(tol, "--tol")?;
            let format = pick_format(common.format, &[Json], "validate")?;
            base(
                common,
                plain.0,
                plain.1,
                format,
                Command::Validate { tolerance: tol },
            )
        }
        Sub::Project {
            common,
            grid,
            boundary_tol,
        } => {
            if grid == 0 {
                return Err("--grid must be at least 1".into());
            }
            if let Some(t) = boundary_tol {
                check_positive(t, "--boundary-tol")?;
            }
            let format = pick_format(common.format, &[Csv, Json], "project")?;
            base(
                common,
                plain.0,
                plain.1,
                format,
                Command::Project { grid, boundary_tol },
            )
        }
        Sub::Orbit {
            common,
            solver,
            class,
            ecc,
            psi0,
            a,
            samples,
        } => {
            let (law, opts) = solver_options(&solver)?;
            if law != PotentialLaw::NEWTONIAN {
                return Err("orbit needs the Newtonian law (--law 1)".into());
            }
            check_eccentricity(ecc)?;
            check_positive(a, "--a")?;
            if !psi0.is_finite() {
                return Err("--psi0 must be finite".into());
            }
            if samples < 2 {
                return Err("--samples must be at least 2".into());
            }
            let class = required_class(&class, &common.masses)?;
            let format = pick_format(common.format, &[Csv, Json], "orbit")?;
            let command = Command::Orbit {
                class,
                eccentricity: ecc,
                psi0,
                semi_major: a,
                samples,
            };
            base(common, law, opts, format, command)
        }
        Sub::Simulate {
            common,
            solver,
            class,
            ecc,
            psi0,
            a,
            periods,
            steps,
            sample_every,
        } => {
            let (law, opts) = solver_options(&solver)?;
            check_eccentricity(ecc)?;
            if ecc > 0.0 && law != PotentialLaw::NEWTONIAN {
                return Err("eccentric initial data needs the Newtonian law (--law 1)".into());
            }
            check_positive(a, "--a")?;
            check_positive(periods, "--periods")?;
            if !psi0.is_finite() {
                return Err("--psi0 must be finite".into());
            }
            if steps == 0 || sample_every == 0 {
                return Err("--steps and --sample-every must be at least 1".into());
            }
            let class = required_class(&class, &common.masses)?;
            let format = pick_format(common.format, &[Json, Csv], "simulate")?;
            let command = Command::Simulate {
                class,
                eccentricity: ecc,
                psi0,
                semi_major: a,
                periods,
                steps,
                sample_every,
            };
            base(common, law, opts, format, command)
        }
    }
}
