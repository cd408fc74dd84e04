//! Stationary state, Pauli propagation of populations, analytic decay of
//! coherences and the regression kernel used for two-time correlators.

use faer::{c64, Mat, MatRef, Side};

use crate::dissipation::RateTable;
use crate::error::{invalid, Error, Result};
use crate::linalg::expm_real;
use crate::spectral::EigenSystem;

/// Tolerance on ‖G ρ^∞‖_∞ accepted for the Boltzmann populations.
pub const STATIONARY_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Coherence terms of the regression kernel smaller than this fraction of
/// |Tr[O ρ]| are dropped.
pub const COHERENCE_FLOOR: f64 = 1e-17;

/// The symmetrized route is used only when every Boltzmann ratio satisfies
/// β(E_n − E_0) ≤ this bound; errors scale like e^{bound/2} times machine epsilon.
pub const SPECTRAL_CONDITION_LIMIT: f64 = 18.42;

#[derive(Clone, Debug)]
pub struct StationaryState {
    /// ρ^∞_{nn} in eigensystem order.
    pub populations: Vec<f64>,
    pub temperature: f64,
    /// ‖G ρ^∞‖_∞ for the Pauli generator G.
    pub residual: f64,
    /// Number of degenerate level groups in the eigensystem.
    pub degenerate_levels: usize,
}

/// Boltzmann populations e^{−βE_n}/Z, checked against the Pauli generator.
pub fn stationary_state(eig: &EigenSystem, rates: &RateTable, temperature: f64) -> Result<StationaryState> {
    if rates.dim() != eig.dim() {
        return Err(Error::ShapeMismatch {
            what: "rate table dimension",
            expected: eig.dim(),
            got: rates.dim(),
        });
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(invalid("temperature", format!("must be finite and ≥ 0, got {temperature}")));
    }
    let populations = boltzmann(eig, temperature)?;
    let residual = generator_residual(&rates.generator(), &populations);
    if residual > STATIONARY_RESIDUAL_TOLERANCE {
        log::warn!("Boltzmann populations leave a Pauli residual of {residual:e}");
    }
    Ok(StationaryState {
        populations,
        temperature,
        residual,
        degenerate_levels: eig.degenerate_levels(),
    })
}

pub(crate) fn boltzmann(eig: &EigenSystem, temperature: f64) -> Result<Vec<f64>> {
    let d = eig.dim();
    if temperature == 0.0 {
        let degeneracy = eig.ground_degeneracy();
        if degeneracy > 1 {
            return Err(Error::DegenerateGround(degeneracy));
        }
        let mut p = vec![0.0; d];
        p[0] = 1.0;
        return Ok(p);
    }
    let e0 = eig.energies[0];
    let mut p: Vec<f64> = eig.energies.iter().map(|&e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(p)
}

fn generator_residual(g: &Mat<f64>, p: &[f64]) -> f64 {
    (0..g.nrows())
        .map(|n| (0..g.ncols()).map(|k| g[(n, k)] * p[k]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    /// Eigendecomposition of the detailed-balance symmetrized generator.
    Spectral,
    /// Scaling and squaring of e^{G t}.
    ScalingSquaring,
}

#[derive(Clone, Debug)]
struct SymmetricParts {
    sqrt_pi: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

/// Exact propagator e^{G t} of the Pauli equation; no time stepping error.
#[derive(Clone, Debug)]
pub struct PauliPropagator {
    generator: Mat<f64>,
    symmetric: Option<SymmetricParts>,
}

impl PauliPropagator {
    /// Picks the spectral route when the Boltzmann ratios are well conditioned.
    pub fn new(eig: &EigenSystem, rates: &RateTable, temperature: f64) -> Result<Self> {
        let method = if well_conditioned(eig, temperature) {
            PropagationMethod::Spectral
        } else {
            PropagationMethod::ScalingSquaring
        };
        Self::with_method(eig, rates, temperature, method)
    }

    pub fn with_method(eig: &EigenSystem, rates: &RateTable, temperature: f64, method: PropagationMethod) -> Result<Self> {
        let generator = rates.generator();
        let symmetric = match method {
            PropagationMethod::ScalingSquaring => None,
            PropagationMethod::Spectral => {
                if !well_conditioned(eig, temperature) {
                    return Err(invalid(
                        "method",
                        format!("spectral propagation requires β(E_max − E_0) ≤ {SPECTRAL_CONDITION_LIMIT}"),
                    ));
                }
                Some(symmetrize(&generator, &boltzmann(eig, temperature)?, eig.dim())?)
            }
        };
        Ok(Self { generator, symmetric })
    }

    pub fn method(&self) -> PropagationMethod {
        if self.symmetric.is_some() {
            PropagationMethod::Spectral
        } else {
            PropagationMethod::ScalingSquaring
        }
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> MatRef<'_, f64> {
        self.generator.as_ref()
    }

    /// e^{G t} p0.
    pub fn propagate(&self, p0: &[f64], t: f64) -> Result<Vec<f64>> {
        Ok(self.trajectory(p0, &[t])?.remove(0))
    }

    /// Distributions at each of `times`, in the given order. On the scaling
    /// and squaring route one step matrix is reused across equal increments,
    /// so a uniform grid costs a single exponential.
    pub fn trajectory(&self, p0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = self.dim();
        if p0.len() != d {
            return Err(Error::ShapeMismatch {
                what: "initial distribution",
                expected: d,
                got: p0.len(),
            });
        }
        if let Some(&t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(invalid("time", format!("must be finite and ≥ 0, got {t}")));
        }
        if let Some(sym) = &self.symmetric {
            return Ok(times.iter().map(|&t| sym.apply(p0, t)).collect());
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let mut out = vec![Vec::new(); times.len()];
        let mut current = Mat::from_fn(d, 1, |i, _| p0[i]);
        let mut now = 0.0;
        let mut step: Option<(f64, Mat<f64>)> = None;
        for idx in order {
            let dt = times[idx] - now;
            if dt > 0.0 {
                let reuse = matches!(&step, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
                if !reuse {
                    let scaled = Mat::from_fn(d, d, |i, j| self.generator[(i, j)] * dt);
                    step = Some((dt, expm_real(scaled.as_ref())));
                }
                let (_, e) = step.as_ref().expect("step matrix set above");
                current = e * &current;
                now = times[idx];
            }
            out[idx] = (0..d).map(|i| current[(i, 0)]).collect();
        }
        Ok(out)
    }
}

fn well_conditioned(eig: &EigenSystem, temperature: f64) -> bool {
    if temperature <= 0.0 {
        return false;
    }
    let spread = eig.energies.last().copied().unwrap_or(0.0) - eig.energies[0];
    spread / temperature <= SPECTRAL_CONDITION_LIMIT
}

fn symmetrize(generator: &Mat<f64>, pi: &[f64], d: usize) -> Result<SymmetricParts> {
    // M = Π^{-1/2} G Π^{1/2}; detailed balance makes M_nk = sqrt(G_nk G_kn).
    let m = Mat::from_fn(d, d, |i, j| {
        if i == j {
            generator[(i, i)]
        } else {
            (generator[(i, j)] * generator[(j, i)]).sqrt()
        }
    });
    let decomposition = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenNonConvergence {
        dim: d,
        max_abs: crate::linalg::max_abs(m.as_ref()),
    })?;
    let eigenvalues = decomposition.S().column_vector().iter().copied().collect();
    Ok(SymmetricParts {
        sqrt_pi: pi.iter().map(|p| p.sqrt()).collect(),
        eigenvalues,
        eigenvectors: decomposition.U().to_owned(),
    })
}

impl SymmetricParts {
    fn apply(&self, p0: &[f64], t: f64) -> Vec<f64> {
        if t == 0.0 {
            return p0.to_vec();
        }
        let u = &self.eigenvectors;
        let d = self.sqrt_pi.len();
        let q: Vec<f64> = (0..d).map(|k| p0[k] / self.sqrt_pi[k]).collect();
        let modes: Vec<f64> = (0..d)
            .map(|j| {
                let overlap: f64 = (0..d).map(|k| u[(k, j)] * q[k]).sum();
                overlap * (self.eigenvalues[j] * t).exp()
            })
            .collect();
        (0..d)
            .map(|n| self.sqrt_pi[n] * (0..d).map(|j| u[(n, j)] * modes[j]).sum::<f64>())
            .collect()
    }
}

/// e^{P t} p0 with the initial distribution normalized.
pub fn propagate_diagonal(p0: &[f64], t: f64, propagator: &PauliPropagator) -> Result<Vec<f64>> {
    let total: f64 = p0.iter().sum();
    if !(total > 0.0) || p0.iter().any(|p| *p < 0.0) {
        return Err(invalid("p0", "must be a nonnegative distribution with positive mass"));
    }
    let normalized: Vec<f64> = p0.iter().map(|p| p / total).collect();
    propagator.propagate(&normalized, t)
}

/// Coherence decay factor e^{−(Z_m + Z_n*) t}.
pub fn offdiagonal_factor(m: usize, n: usize, t: f64, z: &[c64]) -> c64 {
    (-(z[m] + z[n].conj()) * t).exp()
}

/// An operator in the eigenbasis split into populations and coherences.
#[derive(Clone, Debug)]
pub struct ConditionalMatrix {
    pub diagonal: Vec<c64>,
    /// (m, n, ρ_mn) for m ≠ n with ρ_mn ≠ 0.
    pub offdiagonal: Vec<(usize, usize, c64)>,
}

impl ConditionalMatrix {
    pub fn from_dense(rho: MatRef<'_, c64>) -> Self {
        let d = rho.nrows();
        let diagonal = (0..d).map(|n| rho[(n, n)]).collect();
        let mut offdiagonal = Vec::new();
        for n in 0..d {
            for m in 0..d {
                let v = rho[(m, n)];
                if m != n && v != c64::new(0.0, 0.0) {
                    offdiagonal.push((m, n, v));
                }
            }
        }
        Self { diagonal, offdiagonal }
    }

    /// L diag(populations) L†.
    pub fn from_lowering(lowering: MatRef<'_, c64>, populations: &[f64]) -> Result<Self> {
        let d = lowering.nrows();
        if populations.len() != lowering.ncols() {
            return Err(Error::ShapeMismatch {
                what: "populations",
                expected: lowering.ncols(),
                got: populations.len(),
            });
        }
        let weighted = Mat::from_fn(d, populations.len(), |i, j| lowering[(i, j)] * populations[j].sqrt());
        let rho = &weighted * weighted.adjoint();
        Ok(Self::from_dense(rho.as_ref()))
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn trace(&self) -> c64 {
        self.diagonal.iter().sum()
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let d = self.dim();
        let mut out = Mat::<c64>::zeros(d, d);
        for (n, v) in self.diagonal.iter().enumerate() {
            out[(n, n)] = *v;
        }
        for &(m, n, v) in &self.offdiagonal {
            out[(m, n)] = v;
        }
        out
    }
}

/// Tr[O Λ_τ(ρ)]: populations evolve under the Pauli propagator, each
/// coherence ρ_mn independently with e^{−(Z_m + Z_n*) τ}.
#[derive(Clone, Debug)]
pub struct RegressionKernel {
    observable_diagonal: Vec<c64>,
    populations: Vec<f64>,
    populations_imag: Vec<f64>,
    /// (amplitude O_nm ρ_mn, rate Z_m + Z_n*)
    coherences: Vec<(c64, c64)>,
}

impl RegressionKernel {
    pub fn new(rho: &ConditionalMatrix, observable: MatRef<'_, c64>, z: &[c64]) -> Result<Self> {
        let d = rho.dim();
        for (what, got) in [("observable rows", observable.nrows()), ("observable columns", observable.ncols()), ("decay constants", z.len())] {
            if got != d {
                return Err(Error::ShapeMismatch { what, expected: d, got });
            }
        }
        let terms: Vec<(c64, c64)> = rho
            .offdiagonal
            .iter()
            .map(|&(m, n, v)| (observable[(n, m)] * v, z[m] + z[n].conj()))
            .collect();
        let trace: c64 = (0..d).map(|n| observable[(n, n)] * rho.diagonal[n]).sum::<c64>() + terms.iter().map(|t| t.0).sum::<c64>();
        let floor = COHERENCE_FLOOR * trace.norm();
        let coherences = terms.into_iter().filter(|(a, _)| a.norm() > floor).collect();
        Ok(Self {
            observable_diagonal: (0..d).map(|n| observable[(n, n)]).collect(),
            populations: rho.diagonal.iter().map(|v| v.re).collect(),
            populations_imag: rho.diagonal.iter().map(|v| v.im).collect(),
            coherences,
        })
    }

    pub fn evaluate(&self, propagator: &PauliPropagator, times: &[f64]) -> Result<Vec<c64>> {
        let real = propagator.trajectory(&self.populations, times)?;
        let imag = if self.populations_imag.iter().any(|v| *v != 0.0) {
            Some(propagator.trajectory(&self.populations_imag, times)?)
        } else {
            None
        };
        Ok(times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut acc = c64::new(0.0, 0.0);
                for (n, o) in self.observable_diagonal.iter().enumerate() {
                    let p = c64::new(real[i][n], imag.as_ref().map_or(0.0, |im| im[i][n]));
                    acc += o * p;
                }
                for (amplitude, rate) in &self.coherences {
                    acc += amplitude * (-rate * t).exp();
                }
                acc
            })
            .collect())
    }
}

/// Single-τ convenience wrapper around [`RegressionKernel`].
pub fn regression_g2_kernel(
    rho: &ConditionalMatrix,
    tau: f64,
    observable: MatRef<'_, c64>,
    rates: &RateTable,
    propagator: &PauliPropagator,
) -> Result<c64> {
    Ok(RegressionKernel::new(rho, observable, &rates.z)?.evaluate(propagator, &[tau])?[0])
}
