//! Plain-Rust entry points behind the browser bindings.

use dicke_core::model::{build_hamiltonian, build_operators_with_limit};
use dicke_core::spectral::{diagonalize, DEFAULT_TOLERANCE};
use dicke_core::{DressedModel, DressedOptions, ModelParams};
use thiserror::Error;

/// Hilbert-space size the page will diagonalize on the main thread.
pub const MAX_DEMO_DIMENSION: usize = 256;
pub const MAX_GRID_POINTS: usize = 20_000;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("{name} must be {rule}, got {value}")]
    Input { name: &'static str, rule: &'static str, value: f64 },
    #[error(transparent)]
    Model(#[from] dicke_core::Error),
}

fn check(name: &'static str, value: f64, ok: bool, rule: &'static str) -> Result<(), DemoError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(DemoError::Input { name, rule, value })
    }
}

fn check_points(points: usize) -> Result<(), DemoError> {
    check("points", points as f64, (2..=MAX_GRID_POINTS).contains(&points), "between 2 and 20000")
}

fn params(n_emitters: usize, g: f64, g_prime: f64, temperature: f64, n_max: usize) -> Result<ModelParams, DemoError> {
    let p = ModelParams::new(n_emitters, g, g_prime, temperature).with_n_max(n_max);
    p.validate()?;
    Ok(p)
}

fn options() -> DressedOptions {
    DressedOptions {
        max_dimension: MAX_DEMO_DIMENSION,
        ..DressedOptions::default()
    }
}

fn linspace(max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect()
}

/// Lowest `levels` energies at `g_steps` couplings from 0 to `g_max`, with
/// g′ = `g_prime_ratio`·g. Row-major: one row of `levels` values per coupling.
pub fn energy_levels(
    n_emitters: usize,
    g_prime_ratio: f64,
    g_max: f64,
    g_steps: usize,
    levels: usize,
    n_max: usize,
) -> Result<Vec<f64>, DemoError> {
    check("g_max", g_max, g_max > 0.0, "positive")?;
    check("g_prime_ratio", g_prime_ratio, (0.0..=1.0).contains(&g_prime_ratio), "in [0, 1]")?;
    check("g_steps", g_steps as f64, (2..=400).contains(&g_steps), "between 2 and 400")?;
    check("levels", levels as f64, levels >= 1, "at least 1")?;
    let mut out = Vec::with_capacity(g_steps * levels);
    for g in linspace(g_max, g_steps) {
        let p = params(n_emitters, g, g_prime_ratio * g, 1.0, n_max)?;
        let ops = build_operators_with_limit(&p, MAX_DEMO_DIMENSION)?;
        let h = build_hamiltonian(&p, &ops)?;
        let eig = diagonalize(h.as_ref(), DEFAULT_TOLERANCE)?;
        check("levels", levels as f64, levels <= eig.dim(), "at most the basis dimension")?;
        out.extend_from_slice(&eig.energies[..levels]);
    }
    Ok(out)
}

/// Emission spectrum on `points` frequencies from 0 to `omega_max`.
pub fn emission_spectrum(
    n_emitters: usize,
    g: f64,
    g_prime: f64,
    temperature: f64,
    n_max: usize,
    omega_max: f64,
    points: usize,
) -> Result<Vec<f64>, DemoError> {
    check("omega_max", omega_max, omega_max > 0.0, "positive")?;
    check_points(points)?;
    let m = DressedModel::with_options(&params(n_emitters, g, g_prime, temperature, n_max)?, options())?;
    let point = m.at_model_temperature()?;
    Ok(m.spectrum(&point, &linspace(omega_max, points))?.values)
}

/// g²(t) at the given delays. Runs of equal increments share one matrix
/// exponential, so blocks of uniform spacing are much cheaper than a
/// geometric grid.
pub fn g2_time(n_emitters: usize, g: f64, g_prime: f64, temperature: f64, n_max: usize, times: &[f64]) -> Result<Vec<f64>, DemoError> {
    check_points(times.len().max(2))?;
    for &t in times {
        check("time", t, t >= 0.0, "nonnegative")?;
    }
    let m = DressedModel::with_options(&params(n_emitters, g, g_prime, temperature, n_max)?, options())?;
    let point = m.at_model_temperature()?;
    Ok(m.g2_time(&point, times)?.values)
}
