//! Command-line front end: argument parsing, command execution and output.

pub mod args;
pub mod emit;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};

use collinear4::chart::{default_boundary_tol, hemisphere_grid};
use collinear4::dynamics::{circular_rate, circular_state, homographic_orbit, integrate};
use collinear4::solver::solve_region;
use collinear4::tetrahedron::validate_tetrahedron;
use collinear4::{
    cross_validate, enumerate_all, moulton_direct_solve, solve_from_seed, ConicOrbit,
    ShapeTetrahedron,
};

pub use args::{parse_args, ClassBy, Command, Format, RunConfig, SolveTarget};
pub use emit::{emit_results, g17, Results};

/// Largest oracle deviation accepted by `enumerate --verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Help or version text; exit code 0.
    Info(String),
    /// Bad arguments; exit code 2.
    Usage(String),
    /// Computation or I/O failure; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<collinear4::Error> for CliError {
    fn from(e: collinear4::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Runs the command described by `config` and returns its results.
pub fn execute(config: &RunConfig) -> Result<Results, CliError> {
    let masses = config.masses;
    let law = config.law;
    let opts = &config.solver;
    let tet = ShapeTetrahedron::new(&masses);

    let results = match &config.command {
        Command::Solve { target } => {
            let config = match *target {
                SolveTarget::Region(class) => solve_region(&tet, class, law, opts)?,
                SolveTarget::Seed(angles) => solve_from_seed(&tet, angles, law, opts)?,
            };
            Results::Solve {
                masses,
                law,
                config,
            }
        }
        Command::Enumerate { verify } => {
            let configs = enumerate_all(&masses, law, opts)?;
            let deviations = if *verify {
                let d = configs
                    .iter()
                    .map(|c| cross_validate(c, &moulton_direct_solve(&masses, c.ordering, law)?))
                    .collect::<collinear4::Result<Vec<f64>>>()?;
                Some(d)
            } else {
                None
            };
            Results::Enumerate {
                masses,
                law,
                configs,
                deviations,
            }
        }
        Command::Validate { tolerance } => Results::Validate {
            masses,
            report: validate_tetrahedron(&tet, *tolerance),
            tet,
        },
        Command::Project { grid, boundary_tol } => {
            let tol = boundary_tol.unwrap_or_else(|| default_boundary_tol(masses.mu()));
            Results::Project {
                points: hemisphere_grid(&tet, *grid, tol),
            }
        }
        Command::Orbit {
            class,
            eccentricity,
            psi0,
            semi_major,
            samples,
        } => {
            let config = solve_region(&tet, *class, law, opts)?;
            let orbit = ConicOrbit::new(*semi_major, *eccentricity, *psi0, config)?;
            Results::Orbit {
                masses,
                samples: homographic_orbit(&orbit, *samples)?,
                orbit,
            }
        }
        Command::Simulate {
            class,
            eccentricity,
            psi0,
            semi_major,
            periods,
            steps,
            sample_every,
        } => {
            let config = solve_region(&tet, *class, law, opts)?;
            let (state, period) = if *eccentricity == 0.0 {
                let state = collinear4::ReducedState {
                    psi: *psi0,
                    ..circular_state(&config, *semi_major, law)
                };
                (
                    state,
                    std::f64::consts::TAU / circular_rate(&config, *semi_major, law),
                )
            } else {
                let orbit = ConicOrbit::new(*semi_major, *eccentricity, *psi0, config)?;
                (orbit.pericentre_state(), orbit.period())
            };
            let dt = periods * period / *steps as f64;
            Results::Simulate {
                masses,
                law,
                config,
                dt,
                sample_every: *sample_every,
                trajectory: integrate(&state, &tet, law, dt, *steps)?,
            }
        }
    };
    Ok(results)
}

/// Per-class oracle deviations as a plain-text table.
pub fn deviation_table(results: &Results) -> Option<String> {
    let Results::Enumerate {
        configs,
        deviations: Some(d),
        ..
    } = results
    else {
        return None;
    };
    let mut out = String::from("class  ordering  oracle_deviation\n");
    for (c, dev) in configs.iter().zip(d) {
        out.push_str(&format!(
            "{:>5}  {:<8}  {:.3e}\n",
            c.ordering.class_id(),
            c.ordering.to_string(),
            dev
        ));
    }
    Some(out)
}

/// Full program: parse, execute, write. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_inner(argv, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let _ = match &e {
                CliError::Info(text) => write!(stdout, "{text}"),
                CliError::Usage(text) => write!(stderr, "{text}"),
                CliError::Runtime(msg) => writeln!(stderr, "error: {msg}"),
            };
            code
        }
    }
}

fn run_inner<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = parse_args(argv)?;
    let results = execute(&config)?;
    let io_err = |e: std::io::Error| CliError::Runtime(e.to_string());

    match &config.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            emit_results(&results, config.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        None => emit_results(&results, config.format, stdout).map_err(io_err)?,
    }

    if let Some(table) = deviation_table(&results) {
        write!(stderr, "{table}").map_err(io_err)?;
        if let Results::Enumerate {
            deviations: Some(d),
            ..
        } = &results
        {
            let worst = d.iter().copied().fold(0.0, f64::max);
            if worst.is_nan() || worst >= VERIFY_TOL {
                return Err(CliError::Runtime(format!(
                    "oracle deviation {worst:e} exceeds {VERIFY_TOL:e}"
                )));
            }
        }
    }
    Ok(())
}
