//! Dicke Hamiltonian and system operators on the truncated emitters ⊗ Fock
//! product space.
//!
//! Basis order: index `i = config * (n_max + 1) + n`, where `config` is the
//! emitter configuration as a bit pattern (bit `j` set means emitter `j` is
//! excited) and `n` is the photon number. The Fock index varies fastest.
//!
//! Energies are in units of ω₀ whenever the defaults are used.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::sparse_mul;

/// Default guard on the Hilbert-space dimension `2^N (n_max + 1)`.
pub const DEFAULT_MAX_DIMENSION: usize = 8192;

/// Default Fock cutoff.
pub const DEFAULT_N_MAX: usize = 100;

/// Default bath strength γ, in units of ω₀.
pub const DEFAULT_GAMMA: f64 = 1e-2;

fn one() -> f64 {
    1.0
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

/// Physical configuration of the emitter–cavity system and its bath.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n_emitters: usize,
    /// Cavity frequency ω_c; also the emitter frequency unless `omega_x` is set.
    #[serde(default = "one")]
    pub omega0: f64,
    /// Emitter transition energy ω_x when it differs from ω₀ (testing only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_x: Option<f64>,
    /// Co-rotating coupling.
    pub g: f64,
    /// Counter-rotating coupling.
    #[serde(default)]
    pub g_prime: f64,
    /// Maximal photon number kept in the Fock space.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Field amplitude scale X₀.
    #[serde(default = "one")]
    pub x0: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Bath temperature (k_B = 1).
    #[serde(default)]
    pub temperature: f64,
}

impl ModelParams {
    pub fn new(n_emitters: usize, g: f64, g_prime: f64, temperature: f64) -> Self {
        Self {
            n_emitters,
            omega0: 1.0,
            omega_x: None,
            g,
            g_prime,
            n_max: DEFAULT_N_MAX,
            x0: 1.0,
            gamma: DEFAULT_GAMMA,
            temperature,
        }
    }

    /// Tavis–Cummings limit, g′ = 0.
    pub fn tavis_cummings(n_emitters: usize, g: f64, temperature: f64) -> Self {
        Self::new(n_emitters, g, 0.0, temperature)
    }

    /// Dicke limit, g′ = g.
    pub fn dicke(n_emitters: usize, g: f64, temperature: f64) -> Self {
        Self::new(n_emitters, g, g, temperature)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn omega_c(&self) -> f64 {
        self.omega0
    }

    pub fn omega_x(&self) -> f64 {
        self.omega_x.unwrap_or(self.omega0)
    }

    pub fn dim(&self) -> usize {
        (1usize << self.n_emitters.min(usize::BITS as usize - 1)) * (self.n_max + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_emitters < 1 {
            return Err(invalid("n_emitters", "must be at least 1"));
        }
        if self.n_emitters > 20 {
            return Err(invalid("n_emitters", "more than 20 emitters is not supported"));
        }
        if self.n_max < 2 {
            return Err(invalid("n_max", "Fock cutoff must be at least 2"));
        }
        let positive = |field, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive and finite, got {v}")))
            }
        };
        let nonnegative = |field, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be nonnegative and finite, got {v}")))
            }
        };
        positive("omega0", self.omega0)?;
        if let Some(wx) = self.omega_x {
            positive("omega_x", wx)?;
        }
        positive("gamma", self.gamma)?;
        positive("x0", self.x0)?;
        nonnegative("temperature", self.temperature)?;
        nonnegative("g", self.g)?;
        nonnegative("g_prime", self.g_prime)?;
        Ok(())
    }
}

/// Index bookkeeping for the product basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Basis {
    pub n_emitters: usize,
    pub n_max: usize,
}

impl Basis {
    pub fn dim(&self) -> usize {
        (1 << self.n_emitters) * (self.n_max + 1)
    }

    pub fn index(&self, config: usize, photons: usize) -> usize {
        config * (self.n_max + 1) + photons
    }

    /// `(emitter configuration, photon number)` of a basis index.
    pub fn decompose(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1), index % (self.n_max + 1))
    }

    /// Total excitation number of a basis state.
    pub fn excitations(&self, index: usize) -> usize {
        let (config, n) = self.decompose(index);
        config.count_ones() as usize + n
    }
}

/// All system-side operators on the product basis.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub basis: Basis,
    pub x0: f64,
    pub a: Mat<f64>,
    pub a_dagger: Mat<f64>,
    pub sigma_minus: Vec<Mat<f64>>,
    pub sigma_plus: Vec<Mat<f64>>,
    /// σ_y^(j) = i(σ₊ − σ₋).
    pub sigma_y: Vec<Mat<c64>>,
    /// X = −i X₀ (a − a†).
    pub x: Mat<c64>,
    /// N_t = a†a + Σ σ₊σ₋, diagonal.
    pub n_total: Mat<f64>,
}

pub fn build_operators(params: &ModelParams) -> Result<OperatorSet> {
    build_operators_with_limit(params, DEFAULT_MAX_DIMENSION)
}

pub fn build_operators_with_limit(params: &ModelParams, max_dim: usize) -> Result<OperatorSet> {
    params.validate()?;
    let dim = params.dim();
    if dim > max_dim {
        return Err(Error::DimensionTooLarge { dim, limit: max_dim });
    }
    let basis = Basis {
        n_emitters: params.n_emitters,
        n_max: params.n_max,
    };

    let mut a = Mat::<f64>::zeros(dim, dim);
    for config in 0..(1 << basis.n_emitters) {
        for n in 1..=basis.n_max {
            a[(basis.index(config, n - 1), basis.index(config, n))] = (n as f64).sqrt();
        }
    }
    let a_dagger = a.transpose().to_owned();

    let mut sigma_minus = Vec::with_capacity(basis.n_emitters);
    for j in 0..basis.n_emitters {
        let bit = 1usize << j;
        let mut s = Mat::<f64>::zeros(dim, dim);
        for config in (0..(1 << basis.n_emitters)).filter(|c| c & bit != 0) {
            for n in 0..=basis.n_max {
                s[(basis.index(config & !bit, n), basis.index(config, n))] = 1.0;
            }
        }
        sigma_minus.push(s);
    }
    let sigma_plus: Vec<Mat<f64>> = sigma_minus.iter().map(|s| s.transpose().to_owned()).collect();
    let sigma_y = sigma_minus
        .iter()
        .zip(&sigma_plus)
        .map(|(sm, sp)| Mat::from_fn(dim, dim, |i, j| c64::new(0.0, sp[(i, j)] - sm[(i, j)])))
        .collect();
    let x0 = params.x0;
    let x = Mat::from_fn(dim, dim, |i, j| c64::new(0.0, -x0 * (a[(i, j)] - a_dagger[(i, j)])));
    let n_total = Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            basis.excitations(i) as f64
        } else {
            0.0
        }
    });

    Ok(OperatorSet {
        basis,
        x0,
        a,
        a_dagger,
        sigma_minus,
        sigma_plus,
        sigma_y,
        x,
        n_total,
    })
}

/// The four coupling-independent pieces of the Dicke Hamiltonian; a sweep
/// over couplings only rescales and adds them.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    /// a†a
    pub cavity: Mat<f64>,
    /// Σ σ₊σ₋
    pub emitters: Mat<f64>,
    /// Σ (a†σ₋ + aσ₊)
    pub co_rotating: Mat<f64>,
    /// Σ (aσ₋ + a†σ₊)
    pub counter_rotating: Mat<f64>,
}

impl HamiltonianTerms {
    pub fn from_operators(ops: &OperatorSet) -> Self {
        let dim = ops.basis.dim();
        let cavity = sparse_mul(ops.a_dagger.as_ref(), ops.a.as_ref());
        let mut emitters = Mat::<f64>::zeros(dim, dim);
        let mut co_rotating = Mat::<f64>::zeros(dim, dim);
        let mut counter_rotating = Mat::<f64>::zeros(dim, dim);
        for (sm, sp) in ops.sigma_minus.iter().zip(&ops.sigma_plus) {
            emitters += sparse_mul(sp.as_ref(), sm.as_ref());
            co_rotating += sparse_mul(ops.a_dagger.as_ref(), sm.as_ref());
            co_rotating += sparse_mul(ops.a.as_ref(), sp.as_ref());
            counter_rotating += sparse_mul(ops.a.as_ref(), sm.as_ref());
            counter_rotating += sparse_mul(ops.a_dagger.as_ref(), sp.as_ref());
        }
        Self {
            cavity,
            emitters,
            co_rotating,
            counter_rotating,
        }
    }

    /// H = ω_c a†a + ω_x Σσ₊σ₋ + g Σ(a†σ₋ + aσ₊) + g′ Σ(aσ₋ + a†σ₊).
    pub fn assemble(&self, params: &ModelParams) -> Mat<f64> {
        let (wc, wx, g, gp) = (params.omega_c(), params.omega_x(), params.g, params.g_prime);
        let n = self.cavity.nrows();
        Mat::from_fn(n, n, |i, j| {
            wc * self.cavity[(i, j)]
                + wx * self.emitters[(i, j)]
                + g * self.co_rotating[(i, j)]
                + gp * self.counter_rotating[(i, j)]
        })
    }
}

/// The Dicke Hamiltonian. It is real symmetric in the product basis.
pub fn build_hamiltonian(params: &ModelParams, ops: &OperatorSet) -> Result<Mat<f64>> {
    params.validate()?;
    if ops.basis.dim() != params.dim() {
        return Err(Error::ShapeMismatch {
            what: "operator set dimension",
            expected: params.dim(),
            got: ops.basis.dim(),
        });
    }
    Ok(HamiltonianTerms::from_operators(ops).assemble(params))
}
