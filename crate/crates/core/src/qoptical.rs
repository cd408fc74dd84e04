//! Quantum-optical (Lindblad) master equation with bare jump operators,
//! solved on the full vectorized density matrix.

use faer::{c64, linalg::solvers::Solve, Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::dissipation::{bose_occupation, Ohmic};
use crate::error::{invalid, Error, Result};
use crate::linalg::{expm_complex, max_abs_c, to_complex, to_eigenbasis};
use crate::model::{build_hamiltonian, build_operators_with_limit, ModelParams, OperatorSet};
use crate::observables::{EmissionOperators, DARK_STATE_FLOOR};
use crate::spectral::{diagonalize, EigenSystem, DEFAULT_TOLERANCE};

pub const DEFAULT_QO_N_MAX: usize = 15;

/// Largest Hilbert dimension D accepted; the Liouvillian is D² × D² dense.
pub const QO_MAX_DIMENSION: usize = 80;

/// Pivot ratio below which the stationary state is reported as non-unique.
pub const NON_UNIQUE_PIVOT_RATIO: f64 = 1e-12;

/// Jump operator S₊ (energy lowering) and its rates at the reference frequency.
#[derive(Clone, Debug)]
pub struct QoChannel {
    pub s_plus: Mat<c64>,
    pub chi_plus: f64,
    pub chi_minus: f64,
    pub xi_plus: f64,
    pub xi_minus: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QoEmission {
    /// ⟨a†a†aa⟩/⟨a†a⟩²
    #[default]
    Bare,
    /// the same ratio with the dressed Ẋ₋ of the eigenbasis
    Dressed,
}

/// Cavity S₊ = −iX₀a and emitter S₊ = −iσ₋⁽ʲ⁾, with χ₊ = γ(ω₀)(n+1), χ₋ = γ(ω₀)n.
pub fn qo_channels(params: &ModelParams, ops: &OperatorSet) -> Result<Vec<QoChannel>> {
    let density = Ohmic {
        gamma: params.gamma,
        omega_ref: params.omega0,
    };
    let rate = density.density(params.omega0);
    let n = bose_occupation(params.omega0, params.temperature)?;
    let minus_i = c64::new(0.0, -1.0);
    let scale = |m: &Mat<f64>, factor: c64| Mat::from_fn(m.nrows(), m.ncols(), |i, j| factor * m[(i, j)]);
    Ok(std::iter::once(scale(&ops.a, minus_i * ops.x0))
        .chain(ops.sigma_minus.iter().map(|s| scale(s, minus_i)))
        .map(|s_plus| QoChannel {
            s_plus,
            chi_plus: rate * (n + 1.0),
            chi_minus: rate * n,
            xi_plus: 0.0,
            xi_minus: 0.0,
        })
        .collect())
}

fn nonzeros(m: MatRef<'_, c64>) -> Vec<(usize, usize, c64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != c64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// target += coeff · (Bᵀ ⊗ A), the column-major superoperator of ρ ↦ AρB.
fn add_sandwich(target: &mut Mat<c64>, coeff: c64, a: MatRef<'_, c64>, b: MatRef<'_, c64>) {
    let d = a.nrows();
    let an = nonzeros(a);
    let bn = nonzeros(b);
    // (Bᵀ ⊗ A)[(i + d j), (k + d l)] = B[l, j] A[i, k]
    for &(l, j, bv) in &bn {
        for &(i, k, av) in &an {
            target[(i + d * j, k + d * l)] += coeff * bv * av;
        }
    }
}

/// Vectorized generator (column-major vec) of
/// dρ/dt = −i[H,ρ] − i Σ± (ξ±/2)[S±†S±, ρ] + Σ± χ± (S±ρS±† − ½{S±†S±, ρ}).
pub fn liouvillian(h: MatRef<'_, f64>, channels: &[QoChannel]) -> Mat<c64> {
    let d = h.nrows();
    let hc = to_complex(h);
    let identity = Mat::<c64>::identity(d, d);
    let mut l = Mat::<c64>::zeros(d * d, d * d);
    let commutator = |l: &mut Mat<c64>, coeff: c64, k: MatRef<'_, c64>| {
        add_sandwich(l, coeff, k, identity.as_ref());
        add_sandwich(l, -coeff, identity.as_ref(), k);
    };
    commutator(&mut l, c64::new(0.0, -1.0), hc.as_ref());
    for ch in channels {
        let s_minus = ch.s_plus.adjoint().to_owned();
        for (s, chi, xi) in [(&ch.s_plus, ch.chi_plus, ch.xi_plus), (&s_minus, ch.chi_minus, ch.xi_minus)] {
            let sd = s.adjoint().to_owned();
            let k = &sd * s;
            if chi != 0.0 {
                add_sandwich(&mut l, c64::new(chi, 0.0), s.as_ref(), sd.as_ref());
                add_sandwich(&mut l, c64::new(-0.5 * chi, 0.0), k.as_ref(), identity.as_ref());
                add_sandwich(&mut l, c64::new(-0.5 * chi, 0.0), identity.as_ref(), k.as_ref());
            }
            if xi != 0.0 {
                commutator(&mut l, c64::new(0.0, -0.5 * xi), k.as_ref());
            }
        }
    }
    l
}

pub fn vectorize(rho: MatRef<'_, c64>) -> Vec<c64> {
    let d = rho.nrows();
    (0..d * d).map(|idx| rho[(idx % d, idx / d)]).collect()
}

pub fn unvectorize(v: &[c64], d: usize) -> Mat<c64> {
    Mat::from_fn(d, d, |i, j| v[i + d * j])
}

#[derive(Clone, Debug)]
pub struct QoState {
    pub rho: Mat<c64>,
    /// min |U_ii| / max |U_ii| of the trace-constrained LU; NaN for the evolution route.
    pub pivot_ratio: f64,
    /// ‖L vec(ρ)‖_∞
    pub residual: f64,
    pub min_eigenvalue: f64,
    /// ‖ρ − ρ†‖_max
    pub hermiticity_error: f64,
}

/// Model, Liouvillian and operators for one parameter point.
#[derive(Clone, Debug)]
pub struct QoModel {
    pub params: ModelParams,
    pub ops: OperatorSet,
    pub hamiltonian: Mat<f64>,
    pub channels: Vec<QoChannel>,
    pub liouvillian: Mat<c64>,
}

impl QoModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.temperature < 0.0 {
            return Err(invalid("temperature", "must be ≥ 0"));
        }
        let ops = build_operators_with_limit(params, QO_MAX_DIMENSION)?;
        let hamiltonian = build_hamiltonian(params, &ops)?;
        let channels = qo_channels(params, &ops)?;
        let liouvillian = liouvillian(hamiltonian.as_ref(), &channels);
        Ok(Self {
            params: params.clone(),
            ops,
            hamiltonian,
            channels,
            liouvillian,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Null vector of L with the first row replaced by the trace condition.
    pub fn stationary(&self) -> Result<QoState> {
        let d = self.dim();
        let dd = d * d;
        let mut system = self.liouvillian.clone();
        for col in 0..dd {
            system[(0, col)] = c64::new(0.0, 0.0);
        }
        for i in 0..d {
            system[(0, i + d * i)] = c64::new(1.0, 0.0);
        }
        let lu = system.partial_piv_lu();
        let u = lu.U();
        let pivots: Vec<f64> = (0..dd).map(|i| u[(i, i)].norm()).collect();
        let largest = pivots.iter().copied().fold(0.0, f64::max);
        let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = smallest / largest;
        if !(ratio >= NON_UNIQUE_PIVOT_RATIO) {
            return Err(Error::NonUniqueStationaryState(ratio));
        }
        let mut rhs = Mat::<c64>::zeros(dd, 1);
        rhs[(0, 0)] = c64::new(1.0, 0.0);
        let solution = lu.solve(&rhs);
        let v: Vec<c64> = (0..dd).map(|i| solution[(i, 0)]).collect();
        self.finish(v, ratio)
    }

    /// e^{L t} vec(ρ0), for cross-checking the null-space route.
    pub fn stationary_by_evolution(&self, rho0: MatRef<'_, c64>, t: f64) -> Result<QoState> {
        let d = self.dim();
        if rho0.nrows() != d || rho0.ncols() != d {
            return Err(Error::ShapeMismatch {
                what: "initial density matrix",
                expected: d,
                got: rho0.nrows(),
            });
        }
        let scaled = Mat::from_fn(d * d, d * d, |i, j| self.liouvillian[(i, j)] * t);
        let propagator = expm_complex(scaled.as_ref());
        let v0 = vectorize(rho0);
        let v: Vec<c64> = (0..d * d).map(|i| (0..d * d).map(|k| propagator[(i, k)] * v0[k]).sum()).collect();
        let trace: c64 = (0..d).map(|i| v[i + d * i]).sum();
        let v: Vec<c64> = v.iter().map(|x| x / trace).collect();
        self.finish(v, f64::NAN)
    }

    fn finish(&self, v: Vec<c64>, pivot_ratio: f64) -> Result<QoState> {
        let d = self.dim();
        let residual = (0..d * d)
            .map(|i| (0..d * d).map(|k| self.liouvillian[(i, k)] * v[k]).sum::<c64>().norm())
            .fold(0.0, f64::max);
        let rho = unvectorize(&v, d);
        let hermiticity_error = max_abs_c((&rho - rho.adjoint()).as_ref());
        let min_eigenvalue = hermitian_eigenvalues(rho.as_ref())?[0];
        Ok(QoState {
            rho,
            pivot_ratio,
            residual,
            min_eigenvalue,
            hermiticity_error,
        })
    }

    /// Normally ordered g²(0) of the emitted field in `state`.
    pub fn g2_zero(&self, state: &QoState, emission: QoEmission) -> Result<f64> {
        let rho = &state.rho;
        let lowering = match emission {
            QoEmission::Bare => to_complex(self.ops.a.as_ref()),
            QoEmission::Dressed => {
                let eig = diagonalize(self.hamiltonian.as_ref(), DEFAULT_TOLERANCE)?;
                let x = to_eigenbasis(eig.vectors.as_ref(), self.ops.x.as_ref());
                let lower = EmissionOperators::new(&eig, x.as_ref())?.lowering;
                // Back to the product basis: V Ẋ₋ Vᵀ.
                let v = to_complex(eig.vectors.as_ref());
                &v * &lower * v.transpose()
            }
        };
        let squared = &lowering * &lowering;
        let expect = |op: &Mat<c64>| -> f64 {
            let m = op * rho * op.adjoint();
            (0..m.nrows()).map(|i| m[(i, i)].re).sum()
        };
        let denominator = expect(&lowering);
        if !(denominator >= DARK_STATE_FLOOR) {
            return Err(Error::DarkState(denominator));
        }
        Ok(expect(&squared) / (denominator * denominator))
    }
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let d = m.nrows();
    let herm = Mat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = herm.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenNonConvergence {
        dim: d,
        max_abs: max_abs_c(herm.as_ref()),
    })?;
    let mut values: Vec<f64> = eig.S().column_vector().iter().map(|v| v.re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// ½ ‖a − b‖₁ for Hermitian a, b.
pub fn trace_distance(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<f64> {
    let diff = a - b;
    Ok(0.5 * hermitian_eigenvalues(diff.as_ref())?.iter().map(|x| x.abs()).sum::<f64>())
}

/// e^{−βH}/Z in the product basis.
pub fn gibbs_state(eig: &EigenSystem, temperature: f64) -> Result<Mat<c64>> {
    let p = crate::dynamics::boltzmann(eig, temperature)?;
    let d = eig.dim();
    let v = &eig.vectors;
    Ok(Mat::from_fn(d, d, |i, j| {
        c64::new((0..d).map(|k| v[(i, k)] * p[k] * v[(j, k)]).sum(), 0.0)
    }))
}

/// e^{−βω₀N_t}/Z in the product basis.
pub fn excitation_thermal_state(ops: &OperatorSet, omega0: f64, temperature: f64) -> Mat<c64> {
    let d = ops.basis.dim();
    let w: Vec<f64> = (0..d).map(|i| (-omega0 * ops.n_total[(i, i)] / temperature).exp()).collect();
    let z: f64 = w.iter().sum();
    Mat::from_fn(d, d, |i, j| if i == j { c64::new(w[i] / z, 0.0) } else { c64::new(0.0, 0.0) })
}

pub fn qo_stationary_state(params: &ModelParams) -> Result<QoState> {
    QoModel::new(params)?.stationary()
}

pub fn qo_g2_zero(params: &ModelParams, emission: QoEmission) -> Result<f64> {
    let model = QoModel::new(params)?;
    let state = model.stationary()?;
    model.g2_zero(&state, emission)
}

/// Builds operators for QO runs with the reduced default cutoff.
pub fn qo_params(params: &ModelParams) -> ModelParams {
    params.clone().with_n_max(DEFAULT_QO_N_MAX)
}
