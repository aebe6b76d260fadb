//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function runs on a reduced grid so that it answers within
//! a few seconds in a browser tab, and returns its result as a JSON string.
//! The same computations are available natively through [`demo`] for tests.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js<T: serde::Serialize>(result: Result<T, String>) -> Result<String, JsError> {
    let value = result.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Momentum distributions of the |±2⟩ clouds right after the first pulse.
#[wasm_bindgen]
pub fn first_pulse_spectrum(delta: f64, e0: f64) -> Result<String, JsError> {
    to_js(demo::first_pulse_spectrum(delta, e0))
}

/// S₀ after the second pulse over `points` delays, with a cosine fit.
#[wasm_bindgen]
pub fn fringe_scan(delta: f64, drop_spatial_derivatives: bool, points: usize) -> Result<String, JsError> {
    to_js(demo::fringe_scan(delta, drop_spatial_derivatives, points))
}

/// Mean recoil shift of the |+2⟩ cloud after the first pulse over a
/// detuning grid.
#[wasm_bindgen]
pub fn dispersion_curve(delta_max: f64, points: usize) -> Result<String, JsError> {
    to_js(demo::dispersion_curve(delta_max, points))
}
