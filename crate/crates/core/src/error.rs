use thiserror::Error;

use crate::chart::OrderingClass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A mass entry was zero, negative, NaN or infinite. `index` is 1-based.
    #[error("mass m{index} = {value} must be positive and finite")]
    InvalidMass { index: usize, value: f64 },

    #[error("potential exponent {0} must be positive and finite")]
    InvalidExponent(f64),

    /// Bodies `i` and `j` (1-based) coincide, so the potential is singular.
    #[error("collision singularity between bodies {i} and {j}")]
    Collision { i: usize, j: usize },

    #[error("stereographic projection of the pole theta = pi is at infinity")]
    ProjectionAtInfinity,

    #[error("no interior point of region {target} found after {budget} samples")]
    SeedExhausted {
        target: OrderingClass,
        budget: usize,
    },

    #[error("iterate left region {region} during the {axis} line search")]
    RegionExit {
        region: OrderingClass,
        axis: &'static str,
    },

    #[error("no convergence for region {region} after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence {
        region: OrderingClass,
        sweeps: usize,
        residual: f64,
    },

    #[error("direct line solve for ordering {ordering} did not converge in {iterations} iterations (residual {residual:e})")]
    OracleNoConvergence {
        ordering: OrderingClass,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid ordering {0:?}: must be a permutation of 1..=4")]
    InvalidOrdering(Vec<usize>),

    #[error("configuration class {left} does not match oracle class {right}")]
    ClassMismatch {
        left: OrderingClass,
        right: OrderingClass,
    },

    /// Failures of individual regions during enumeration, keyed by class.
    #[error("enumeration failed for {} region(s): {}", .0.len(), summarize(.0))]
    Enumeration(Vec<(OrderingClass, Error)>),

    #[error("invalid solver options: {0}")]
    InvalidOptions(&'static str),

    #[error("invalid orbit: {0}")]
    InvalidOrbit(&'static str),

    #[error("state is within {margin:e} of the chart singularity sin(theta) = 0")]
    ChartSingularity { margin: f64 },

    #[error("invalid state: {0}")]
    InvalidState(&'static str),
}

fn summarize(failures: &[(OrderingClass, Error)]) -> String {
    failures
        .iter()
        .map(|(class, err)| format!("[{class}] {err}"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
