//! Collinear central configurations of the four-body problem.
//!
//! The four masses are placed on a rigid orthocentric tetrahedron
//! ([`tetrahedron`]). Projecting it onto a unit direction `u(θ, φ)` gives
//! every normalized collinear shape ([`chart`]). Central configurations are
//! the critical points of the potential on that sphere ([`potential`]), one
//! per ordering class, found by [`solver`] and cross-checked against a direct
//! line-coordinate solver in [`oracle`]. [`dynamics`] integrates the reduced
//! equations of motion and samples homographic conic orbits.

pub mod chart;
pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod potential;
pub mod solver;
pub mod tetrahedron;

pub use chart::{
    classify_ordering, project, seed_for_ordering, stereographic, tangents, Classification,
    OrderingClass, ShapeAngles,
};
pub use dynamics::{ConicOrbit, ReducedState};
pub use error::{Error, Result};
pub use oracle::{cross_validate, moulton_direct_solve, LineConfiguration};
pub use potential::{
    angular_residuals, lambda_multiplier, potential_gradient, potential_value, PotentialLaw,
};
pub use solver::{
    canonicalize, enumerate_all, solve_from_seed, CollinearConfiguration, SolverOptions,
};
pub use tetrahedron::{
    build_tetrahedron, reduced_mass, validate_tetrahedron, MassQuadruple, ShapeTetrahedron,
};
