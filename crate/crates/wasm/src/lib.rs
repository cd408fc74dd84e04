//! Browser bindings: level diagram, emission spectrum and g²(t) for the
//! static demo page in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: demo::DemoError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = energyLevels)]
pub fn energy_levels(
    n_emitters: usize,
    g_prime_ratio: f64,
    g_max: f64,
    g_steps: usize,
    levels: usize,
    n_max: usize,
) -> Result<Vec<f64>, JsError> {
    demo::energy_levels(n_emitters, g_prime_ratio, g_max, g_steps, levels, n_max).map_err(js)
}

#[wasm_bindgen(js_name = emissionSpectrum)]
pub fn emission_spectrum(
    n_emitters: usize,
    g: f64,
    g_prime: f64,
    temperature: f64,
    n_max: usize,
    omega_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    demo::emission_spectrum(n_emitters, g, g_prime, temperature, n_max, omega_max, points).map_err(js)
}

#[wasm_bindgen(js_name = g2Time)]
pub fn g2_time(
    n_emitters: usize,
    g: f64,
    g_prime: f64,
    temperature: f64,
    n_max: usize,
    times: &[f64],
) -> Result<Vec<f64>, JsError> {
    demo::g2_time(n_emitters, g, g_prime, temperature, n_max, times).map_err(js)
}
