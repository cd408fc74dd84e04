//! End-to-end pipeline for one coupling point. Everything that does not
//! depend on temperature is computed once and reused across temperatures.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dissipation::{default_channels, ChannelSpec, LambShift, Ohmic, RateTable};
use crate::dynamics::{stationary_state, PauliPropagator, StationaryState};
use crate::error::Result;
use crate::linalg::to_eigenbasis;
use crate::model::{build_hamiltonian, build_operators_with_limit, ModelParams, OperatorSet, DEFAULT_MAX_DIMENSION};
use crate::observables::{emission_spectrum, g2_time, g2_zero, integrated_emission, EmissionOperators, G2Result, G2Zero, SpectrumResult};
use crate::spectral::{diagonalize, group_transitions, EigenSystem, TransitionSet, DEFAULT_TOLERANCE};

#[cfg(not(target_arch = "wasm32"))]
struct Stopwatch(std::time::Instant);
#[cfg(target_arch = "wasm32")]
struct Stopwatch;

impl Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    fn start() -> Self {
        Stopwatch(std::time::Instant::now())
    }
    #[cfg(not(target_arch = "wasm32"))]
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
    #[cfg(target_arch = "wasm32")]
    fn start() -> Self {
        Stopwatch
    }
    #[cfg(target_arch = "wasm32")]
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DressedOptions {
    pub lamb_shift: LambShift,
    /// degeneracy and transition grouping tolerance δ
    pub tolerance: f64,
    pub max_dimension: usize,
}

impl Default for DressedOptions {
    fn default() -> Self {
        Self {
            lamb_shift: LambShift::Off,
            tolerance: DEFAULT_TOLERANCE,
            max_dimension: DEFAULT_MAX_DIMENSION,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub dimension: usize,
    pub degenerate_levels: usize,
    pub ground_degeneracy: usize,
    /// ω ≠ 0 transition groups spanning several level pairs, summed over channels
    pub transition_collisions: usize,
    pub eigen_residual: f64,
    /// zero on wasm32, which has no clock
    pub setup_seconds: f64,
}

/// Rates and stationary state at one temperature.
#[derive(Clone, Debug)]
pub struct ThermalPoint {
    pub temperature: f64,
    pub rates: RateTable,
    pub stationary: StationaryState,
}

#[derive(Clone, Debug)]
pub struct DressedModel {
    pub params: ModelParams,
    pub options: DressedOptions,
    pub operators: OperatorSet,
    pub hamiltonian: Mat<f64>,
    pub eigen: EigenSystem,
    /// cavity X first, then σ_y of each emitter
    pub transitions: Vec<TransitionSet>,
    pub emission: EmissionOperators,
    pub diagnostics: Diagnostics,
}

impl DressedModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_options(params, DressedOptions::default())
    }

    pub fn with_options(params: &ModelParams, options: DressedOptions) -> Result<Self> {
        let start = Stopwatch::start();
        let operators = build_operators_with_limit(params, options.max_dimension)?;
        let hamiltonian = build_hamiltonian(params, &operators)?;
        let eigen = diagonalize(hamiltonian.as_ref(), options.tolerance)?;
        let transitions = std::iter::once(&operators.x)
            .chain(&operators.sigma_y)
            .map(|s| group_transitions(&eigen, s.as_ref(), options.tolerance))
            .collect::<Result<Vec<_>>>()?;
        // The cavity set already holds X in the eigenbasis.
        let emission = EmissionOperators::new(&eigen, transitions[0].matrix.as_ref())?;
        let diagnostics = Diagnostics {
            dimension: eigen.dim(),
            degenerate_levels: eigen.degenerate_levels(),
            ground_degeneracy: eigen.ground_degeneracy(),
            transition_collisions: transitions.iter().map(|t| t.collisions).sum(),
            eigen_residual: eigen.max_residual(hamiltonian.as_ref()),
            setup_seconds: start.seconds(),
        };
        Ok(Self {
            params: params.clone(),
            options,
            operators,
            hamiltonian,
            eigen,
            transitions,
            emission,
            diagnostics,
        })
    }

    pub fn channels(&self, temperature: f64) -> Vec<ChannelSpec> {
        let mut params = self.params.clone();
        params.temperature = temperature;
        default_channels(&params, self.options.lamb_shift)
    }

    pub fn envelope(&self) -> Ohmic {
        Ohmic {
            gamma: self.params.gamma,
            omega_ref: self.params.omega0,
        }
    }

    pub fn thermal(&self, temperature: f64) -> Result<ThermalPoint> {
        let rates = RateTable::build(&self.eigen, &self.transitions, &self.channels(temperature))?;
        let stationary = stationary_state(&self.eigen, &rates, temperature)?;
        Ok(ThermalPoint {
            temperature,
            rates,
            stationary,
        })
    }

    /// Thermal point at the temperature stored in the parameters.
    pub fn at_model_temperature(&self) -> Result<ThermalPoint> {
        self.thermal(self.params.temperature)
    }

    pub fn integrated_emission(&self, point: &ThermalPoint) -> Result<f64> {
        integrated_emission(&self.emission, &point.stationary)
    }

    pub fn g2_zero(&self, point: &ThermalPoint) -> Result<G2Zero> {
        g2_zero(&self.emission, &point.stationary)
    }

    pub fn spectrum(&self, point: &ThermalPoint, omega_grid: &[f64]) -> Result<SpectrumResult> {
        emission_spectrum(&self.emission, &point.rates, &point.stationary, self.envelope(), omega_grid)
    }

    pub fn propagator(&self, point: &ThermalPoint) -> Result<PauliPropagator> {
        PauliPropagator::new(&self.eigen, &point.rates, point.temperature)
    }

    pub fn g2_time(&self, point: &ThermalPoint, times: &[f64]) -> Result<G2Result> {
        let propagator = self.propagator(point)?;
        g2_time(&self.emission, &point.rates, &point.stationary, &propagator, times)
    }

    /// Any operator in the product basis moved to the eigenbasis.
    pub fn project(&self, op: faer::MatRef<'_, faer::c64>) -> Mat<faer::c64> {
        to_eigenbasis(self.eigen.vectors.as_ref(), op)
    }
}
