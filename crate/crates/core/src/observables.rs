//! Cavity emission: the lowering operator Ẋ₋, Lorentzian spectra,
//! integrated emission and the Glauber function g²(τ).

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::dissipation::{Ohmic, RateTable};
use crate::dynamics::{ConditionalMatrix, PauliPropagator, RegressionKernel, StationaryState};
use crate::error::{Error, Result};
use crate::spectral::EigenSystem;

/// Below this ⟨Ẋ₊Ẋ₋⟩ the field is treated as dark and g² is undefined.
pub const DARK_STATE_FLOOR: f64 = 1e-30;

/// Peaks lighter than this fraction of the total weight are dropped.
pub const PEAK_WEIGHT_FLOOR: f64 = 1e-15;

pub const DEFAULT_OMEGA_MAX: f64 = 3.0;
pub const DEFAULT_OMEGA_POINTS: usize = 2000;

/// Ẋ₋ = −i Σ_{level(m) < level(n)} (E_n − E_m) |m⟩⟨m|X|n⟩⟨n|, with `x` given
/// in the eigenbasis.
pub fn xdot_minus(eig: &EigenSystem, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let d = eig.dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::ShapeMismatch {
            what: "operator dimension",
            expected: d,
            got: x.nrows(),
        });
    }
    Ok(Mat::from_fn(d, d, |m, n| {
        if eig.level_of(m) < eig.level_of(n) {
            c64::new(0.0, -eig.transition_energy(m, n)) * x[(m, n)]
        } else {
            c64::new(0.0, 0.0)
        }
    }))
}

/// Ẋ₋ together with the per-state norms needed for ⟨Ẋ₊Ẋ₋⟩ and ⟨Ẋ₊²Ẋ₋²⟩.
#[derive(Clone, Debug)]
pub struct EmissionOperators {
    pub lowering: Mat<c64>,
    /// ‖Ẋ₋|n⟩‖²
    pub one_photon: Vec<f64>,
    /// ‖Ẋ₋²|n⟩‖²
    pub two_photon: Vec<f64>,
}

impl EmissionOperators {
    pub fn new(eig: &EigenSystem, x: MatRef<'_, c64>) -> Result<Self> {
        let lowering = xdot_minus(eig, x)?;
        let squared = &lowering * &lowering;
        Ok(Self {
            one_photon: column_norms(&lowering),
            two_photon: column_norms(&squared),
            lowering,
        })
    }

    pub fn dim(&self) -> usize {
        self.lowering.nrows()
    }

    /// Ẋ₊Ẋ₋
    pub fn number_operator(&self) -> Mat<c64> {
        self.lowering.adjoint() * &self.lowering
    }

    fn check(&self, stat: &StationaryState) -> Result<()> {
        if stat.populations.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                what: "stationary populations",
                expected: self.dim(),
                got: stat.populations.len(),
            });
        }
        Ok(())
    }
}

fn column_norms(m: &Mat<c64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|n| (0..m.nrows()).map(|k| m[(k, n)].norm_sqr()).sum())
        .collect()
}

/// ⟨Ẋ₊Ẋ₋⟩ = Σ_{m<n} |⟨m|Ẋ₋|n⟩|² ρ^∞_nn.
pub fn integrated_emission(ops: &EmissionOperators, stat: &StationaryState) -> Result<f64> {
    ops.check(stat)?;
    Ok(ops.one_photon.iter().zip(&stat.populations).map(|(a, p)| a * p).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct G2Zero {
    pub value: f64,
    /// ⟨Ẋ₊Ẋ₊Ẋ₋Ẋ₋⟩
    pub numerator: f64,
    /// ⟨Ẋ₊Ẋ₋⟩
    pub denominator: f64,
}

pub fn g2_zero(ops: &EmissionOperators, stat: &StationaryState) -> Result<G2Zero> {
    let denominator = integrated_emission(ops, stat)?;
    if !(denominator >= DARK_STATE_FLOOR) {
        return Err(Error::DarkState(denominator));
    }
    let numerator: f64 = ops.two_photon.iter().zip(&stat.populations).map(|(a, p)| a * p).sum();
    Ok(G2Zero {
        value: numerator / (denominator * denominator),
        numerator,
        denominator,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    /// Im(Z_n − Z_m)
    pub center: f64,
    /// Re(Z_m + Z_n)
    pub half_width: f64,
    /// |⟨m|Ẋ₋|n⟩|² ρ^∞_nn, summed over merged transitions.
    pub weight: f64,
}

impl Peak {
    /// Unit-area Lorentzian times the weight.
    pub fn profile(&self, omega: f64) -> f64 {
        let dw = omega - self.center;
        self.weight * self.half_width / (PI * (dw * dw + self.half_width * self.half_width))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    /// Sorted by center.
    pub peaks: Vec<Peak>,
    pub omega: Vec<f64>,
    /// S(ω) on `omega`, including the γ_c(ω) envelope.
    pub values: Vec<f64>,
    #[serde(skip)]
    pub envelope: Ohmic,
}

impl SpectrumResult {
    pub fn total_weight(&self) -> f64 {
        self.peaks.iter().map(|p| p.weight).sum()
    }

    /// S(ω)/γ_c(ω), defined for all real ω.
    pub fn reduced(&self, omega: f64) -> f64 {
        self.peaks.iter().map(|p| p.profile(omega)).sum()
    }

    pub fn evaluate(&self, omega: f64) -> f64 {
        self.envelope.density(omega) * self.reduced(omega)
    }

    /// Peaks in decreasing weight order.
    pub fn by_weight(&self) -> Vec<Peak> {
        let mut out = self.peaks.clone();
        out.sort_by(|a, b| b.weight.total_cmp(&a.weight));
        out
    }
}

/// Uniform grid on [0, ω_max] with `points` samples.
pub fn default_omega_grid(omega_max: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0; points];
    }
    (0..points).map(|i| omega_max * i as f64 / (points - 1) as f64).collect()
}

/// Analytic Lorentzian emission spectrum. Transitions sharing the same
/// center and width (within 1e-9) are merged into one peak.
pub fn emission_spectrum(
    ops: &EmissionOperators,
    rates: &RateTable,
    stat: &StationaryState,
    envelope: Ohmic,
    omega_grid: &[f64],
) -> Result<SpectrumResult> {
    ops.check(stat)?;
    let d = ops.dim();
    let z = &rates.z;
    let mut raw = Vec::new();
    for n in 0..d {
        let p = stat.populations[n];
        if p == 0.0 {
            continue;
        }
        for m in 0..d {
            let amp = ops.lowering[(m, n)].norm_sqr();
            if amp == 0.0 {
                continue;
            }
            raw.push(Peak {
                center: (z[n] - z[m]).im,
                half_width: (z[m] + z[n]).re,
                weight: amp * p,
            });
        }
    }
    let total: f64 = raw.iter().map(|p| p.weight).sum();
    raw.retain(|p| p.weight > PEAK_WEIGHT_FLOOR * total);
    raw.sort_by(|a, b| a.center.total_cmp(&b.center).then(a.half_width.total_cmp(&b.half_width)));

    let mut peaks: Vec<Peak> = Vec::new();
    for peak in raw {
        match peaks.iter_mut().rev().take_while(|q| peak.center - q.center <= 1e-9).find(|q| (q.half_width - peak.half_width).abs() <= 1e-9 * q.half_width.max(1e-3)) {
            Some(q) => q.weight += peak.weight,
            None => peaks.push(peak),
        }
    }
    let mut out = SpectrumResult {
        peaks,
        omega: omega_grid.to_vec(),
        values: Vec::new(),
        envelope,
    };
    out.values = omega_grid.iter().map(|&w| out.evaluate(w)).collect();
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct G2Result {
    pub g2_zero: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// ⟨Ẋ₊Ẋ₋⟩
    pub denominator: f64,
    /// Largest |Im| of the kernel relative to its real part.
    pub imaginary_residue: f64,
}

/// g²(τ) by quantum regression with ρ_c = Ẋ₋ρ^∞Ẋ₊ and observable Ẋ₊Ẋ₋.
pub fn g2_time(
    ops: &EmissionOperators,
    rates: &RateTable,
    stat: &StationaryState,
    propagator: &PauliPropagator,
    times: &[f64],
) -> Result<G2Result> {
    let zero = g2_zero(ops, stat)?;
    let rho = ConditionalMatrix::from_lowering(ops.lowering.as_ref(), &stat.populations)?;
    let kernel = RegressionKernel::new(&rho, ops.number_operator().as_ref(), &rates.z)?;
    let raw = kernel.evaluate(propagator, times)?;
    let norm = zero.denominator * zero.denominator;
    let imaginary_residue = raw.iter().map(|v| v.im.abs() / v.re.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    Ok(G2Result {
        g2_zero: zero.value,
        times: times.to_vec(),
        values: raw.iter().map(|v| v.re / norm).collect(),
        denominator: zero.denominator,
        imaginary_residue,
    })
}
