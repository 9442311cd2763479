//! Browser demo bindings. The plain functions here do the work and are
//! testable natively; the `wasm_bindgen` wrappers only convert types.

use collinear4::chart::{default_boundary_tol, min_gap};
use collinear4::dynamics::homographic_orbit;
use collinear4::solver::solve_region;
use collinear4::{
    classify_ordering, enumerate_all, project, stereographic, Classification, ConicOrbit, Error,
    MassQuadruple, OrderingClass, PotentialLaw, ShapeAngles, ShapeTetrahedron, SolverOptions,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Raster value for pixels outside the unit disk.
pub const OUTSIDE: u8 = 255;

fn quadruple(masses: &[f64]) -> Result<MassQuadruple, String> {
    let m: [f64; 4] = masses
        .try_into()
        .map_err(|_| format!("expected four masses, got {}", masses.len()))?;
    MassQuadruple::new(m).map_err(|e| e.to_string())
}

fn class_by_id(id: usize) -> Result<OrderingClass, String> {
    OrderingClass::canonical_classes()
        .get(id.wrapping_sub(1))
        .copied()
        .ok_or_else(|| format!("class id {id} is not in 1..=12"))
}

/// Ordering class ids on a `size × size` raster of the stereographic unit
/// disk, row-major with `y` pointing up. Boundary pixels are 0.
pub fn region_raster(masses: &[f64], size: usize) -> Result<Vec<u8>, String> {
    let masses = quadruple(masses)?;
    let tet = ShapeTetrahedron::new(&masses);
    let tol = default_boundary_tol(masses.mu());
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        let y = 1.0 - 2.0 * (row as f64 + 0.5) / size as f64;
        for col in 0..size {
            let x = 2.0 * (col as f64 + 0.5) / size as f64 - 1.0;
            let rho = x.hypot(y);
            if rho >= 1.0 {
                out.push(OUTSIDE);
                continue;
            }
            let angles = ShapeAngles::new(2.0 * rho.atan(), y.atan2(x));
            out.push(match classify_ordering(&project(&tet, angles), tol) {
                Classification::Strict(c) => c.class_id() as u8,
                Classification::Boundary(..) => 0,
            });
        }
    }
    Ok(out)
}

/// The twelve configurations as a JSON array with disk coordinates.
pub fn enumerate_json(masses: &[f64], exponent: f64) -> Result<String, String> {
    let masses = quadruple(masses)?;
    let law = PotentialLaw::new(exponent).map_err(|e| e.to_string())?;
    let configs =
        enumerate_all(&masses, law, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let items: Vec<_> = configs
        .iter()
        .map(|c| {
            let (x, y) = stereographic(c.angles).map_err(|e: Error| e.to_string())?;
            Ok(json!({
                "class_id": c.ordering.class_id(),
                "ordering": c.ordering.to_string(),
                "theta": c.angles.theta,
                "phi": c.angles.phi,
                "x": x,
                "y": y,
                "r": c.r,
                "lambda": c.lambda,
                "min_gap": min_gap(&c.r).0,
            }))
        })
        .collect::<Result<_, String>>()?;
    Ok(serde_json::Value::Array(items).to_string())
}

/// Body positions along a homographic Kepler orbit of class `class_id`,
/// flattened as `[x1, y1, ..., x4, y4]` per sample.
pub fn orbit_positions(
    masses: &[f64],
    class_id: usize,
    ecc: f64,
    psi0: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let masses = quadruple(masses)?;
    let tet = ShapeTetrahedron::new(&masses);
    let law = PotentialLaw::NEWTONIAN;
    let config = solve_region(&tet, class_by_id(class_id)?, law, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let orbit = ConicOrbit::new(1.0, ecc, psi0, config).map_err(|e| e.to_string())?;
    let points = homographic_orbit(&orbit, samples).map_err(|e| e.to_string())?;
    Ok(points
        .iter()
        .flat_map(|s| s.positions.iter().flatten().copied())
        .collect())
}

#[wasm_bindgen(js_name = regionRaster)]
pub fn region_raster_js(masses: &[f64], size: usize) -> Result<Vec<u8>, JsError> {
    region_raster(masses, size).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = enumerateConfigurations)]
pub fn enumerate_js(masses: &[f64], exponent: f64) -> Result<String, JsError> {
    enumerate_json(masses, exponent).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = orbitPositions)]
pub fn orbit_js(
    masses: &[f64],
    class_id: usize,
    ecc: f64,
    psi0: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    orbit_positions(masses, class_id, ecc, psi0, samples).map_err(|e| JsError::new(&e))
}
