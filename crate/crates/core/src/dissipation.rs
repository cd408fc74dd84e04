//! Thermal bath functions χ(ω), ξ(ω), the Pauli rate matrix and the complex
//! decay constants Z_n.

use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::spectral::{EigenSystem, TransitionSet};

/// Default hard cutoff of the Ohmic density when the Lamb shift is enabled.
pub const DEFAULT_LAMB_CUTOFF: f64 = 50.0;

/// Which system operator couples to the bath.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelOperator {
    /// X = −i X₀ (a − a†)
    CavityX,
    /// σ_y of emitter `j` (zero-based).
    EmitterSigmaY(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LambShift {
    #[default]
    Off,
    /// Principal-value transform of the Ohmic density cut off at `cutoff`.
    PrincipalValue { cutoff: f64 },
}

/// Ohmic spectral density γ(ω) = γ ω / ω_ref for ω > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ohmic {
    pub gamma: f64,
    pub omega_ref: f64,
}

impl Ohmic {
    pub fn density(&self, omega: f64) -> f64 {
        if omega > 0.0 {
            self.gamma * omega / self.omega_ref
        } else {
            0.0
        }
    }

    /// Re Γ(ω + i0⁺) for ω > 0, with Γ(z) = (1/π) ∫₀^Λ γ(ν) [1/(z−ν) − 1/(z+ν)] dν.
    ///
    /// For the Ohmic density the principal value integral is
    /// (γ/πω_ref) [ω ln|(Λ+ω)/(Λ−ω)| − 2Λ].
    pub fn re_gamma(&self, omega: f64, cutoff: f64) -> f64 {
        let log = ((cutoff + omega) / (cutoff - omega)).abs().ln();
        self.gamma / (PI * self.omega_ref) * (omega * log - 2.0 * cutoff)
    }
}

/// Bose–Einstein occupation 1/(e^{ω/T} − 1); zero at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if temperature <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Emission/absorption rate function.
///
/// χ(ω) = γ(ω)[n(ω)+1] for ω > 0, γ(−ω) n(−ω) for ω < 0. At ω = 0 the
/// one-sided limit γT/ω_ref is used, which is finite for the Ohmic density.
pub fn chi(omega: f64, temperature: f64, density: &Ohmic) -> f64 {
    let w = omega.abs();
    if w == 0.0 {
        return density.gamma * temperature.max(0.0) / density.omega_ref;
    }
    if temperature <= 0.0 {
        return if omega > 0.0 { density.density(w) } else { 0.0 };
    }
    let x = w / temperature;
    if omega > 0.0 {
        // γ(ω)/(1 − e^{−βω})
        density.density(w) / -(-x).exp_m1()
    } else {
        density.density(w) / x.exp_m1()
    }
}

/// Lamb-shift function ξ(ω): Re Γ(ω)[n(ω)+1] for ω > 0 and −Re Γ(−ω) n(−ω)
/// for ω < 0. At ω = 0 the mean of the two one-sided limits, Re Γ(0⁺)/2, is used.
pub fn xi(omega: f64, temperature: f64, channel: &ChannelSpec) -> Result<f64> {
    let cutoff = match channel.lamb_shift {
        LambShift::Off => return Err(Error::LambShiftDisabled),
        LambShift::PrincipalValue { cutoff } => cutoff,
    };
    let density = &channel.density;
    let w = omega.abs();
    if w == 0.0 {
        return Ok(0.5 * density.re_gamma(0.0, cutoff));
    }
    let re = density.re_gamma(w, cutoff);
    let n = bose_occupation(w, temperature)?;
    Ok(if omega > 0.0 { re * (n + 1.0) } else { -re * n })
}

/// One dissipation channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub operator: ChannelOperator,
    pub density: Ohmic,
    pub temperature: f64,
    #[serde(default)]
    pub lamb_shift: LambShift,
}

impl ChannelSpec {
    pub fn chi(&self, omega: f64) -> f64 {
        chi(omega, self.temperature, &self.density)
    }

    /// ξ(ω), or zero when the Lamb shift is off.
    pub fn lamb(&self, omega: f64) -> Result<f64> {
        match self.lamb_shift {
            LambShift::Off => Ok(0.0),
            LambShift::PrincipalValue { .. } => xi(omega, self.temperature, self),
        }
    }
}

/// Cavity channel followed by one σ_y channel per emitter, all sharing the
/// Ohmic density γ ω/ω₀ and the bath temperature of `params`.
pub fn default_channels(params: &ModelParams, lamb_shift: LambShift) -> Vec<ChannelSpec> {
    let density = Ohmic {
        gamma: params.gamma,
        omega_ref: params.omega0,
    };
    std::iter::once(ChannelOperator::CavityX)
        .chain((0..params.n_emitters).map(ChannelOperator::EmitterSigmaY))
        .map(|operator| ChannelSpec {
            operator,
            density,
            temperature: params.temperature,
            lamb_shift,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupRates {
    pub omega: f64,
    pub chi: f64,
    pub xi: f64,
}

#[derive(Clone, Debug)]
pub struct ChannelRates {
    pub operator: ChannelOperator,
    /// Parallel to the transition groups of the channel's `TransitionSet`.
    pub groups: Vec<GroupRates>,
}

/// Rates of all channels on one eigensystem.
#[derive(Clone, Debug)]
pub struct RateTable {
    pub channels: Vec<ChannelRates>,
    /// Z_n = ½ Σ_{k≠n} [χ(ω_nk) + iξ(ω_nk)] S_{k,n} + i E_n, summed over channels.
    pub z: Vec<c64>,
    /// `pauli[(n, k)]` = W_{n←k} = Σ_channels χ(ω_kn) S_{n,k}; zero diagonal.
    pub pauli: Mat<f64>,
}

impl RateTable {
    pub fn build(eig: &EigenSystem, transitions: &[TransitionSet], channels: &[ChannelSpec]) -> Result<Self> {
        if transitions.len() != channels.len() {
            return Err(Error::ShapeMismatch {
                what: "transition sets per channel",
                expected: channels.len(),
                got: transitions.len(),
            });
        }
        let d = eig.dim();
        let mut pauli = Mat::<f64>::zeros(d, d);
        let mut z: Vec<c64> = eig.energies.iter().map(|&e| c64::new(0.0, e)).collect();
        let mut per_channel = Vec::with_capacity(channels.len());

        for (ts, ch) in transitions.iter().zip(channels) {
            if ts.dim() != d {
                return Err(Error::ShapeMismatch {
                    what: "transition set dimension",
                    expected: d,
                    got: ts.dim(),
                });
            }
            if let LambShift::PrincipalValue { cutoff } = ch.lamb_shift {
                let largest = ts.groups.iter().map(|g| g.omega.abs()).fold(0.0, f64::max);
                if !(cutoff > largest) {
                    return Err(invalid(
                        "lamb_shift.cutoff",
                        format!("cutoff {cutoff} must exceed the largest transition energy {largest}"),
                    ));
                }
            }
            let mut groups = Vec::with_capacity(ts.groups.len());
            for group in &ts.groups {
                let rates = GroupRates {
                    omega: group.omega,
                    chi: ch.chi(group.omega),
                    xi: ch.lamb(group.omega)?,
                };
                // Element (m, n) of S_ω drives n → m; ω = E_n − E_m.
                for &(m, n) in &group.entries {
                    if m == n {
                        continue;
                    }
                    let s = ts.strengths[(m, n)];
                    pauli[(m, n)] += rates.chi * s;
                    z[n] += c64::new(0.5 * rates.chi * s, 0.5 * rates.xi * s);
                }
                groups.push(rates);
            }
            per_channel.push(ChannelRates {
                operator: ch.operator,
                groups,
            });
        }
        Ok(Self {
            channels: per_channel,
            z,
            pauli,
        })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Pauli generator G = W − diag(Σ_k W_{k←n}); columns sum to zero.
    pub fn generator(&self) -> Mat<f64> {
        let d = self.dim();
        let mut g = self.pauli.clone();
        for n in 0..d {
            let outflow: f64 = (0..d).map(|k| self.pauli[(k, n)]).sum();
            g[(n, n)] -= outflow;
        }
        g
    }
}

/// Z_n for every eigenstate.
pub fn decay_constants(eig: &EigenSystem, transitions: &[TransitionSet], channels: &[ChannelSpec]) -> Result<Vec<c64>> {
    Ok(RateTable::build(eig, transitions, channels)?.z)
}

/// Gain rates W_{n←k}.
pub fn pauli_rates(eig: &EigenSystem, transitions: &[TransitionSet], channels: &[ChannelSpec]) -> Result<Mat<f64>> {
    Ok(RateTable::build(eig, transitions, channels)?.pauli)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, build_operators};
    use crate::spectral::{diagonalize, group_eigenbasis, group_transitions, DEFAULT_TOLERANCE};

    const OHMIC: Ohmic = Ohmic {
        gamma: 1e-2,
        omega_ref: 1.0,
    };

    #[test]
    fn bose_values() {
        assert_eq!(bose_occupation(1.0, 0.0).unwrap(), 0.0);
        assert!(bose_occupation(1.0, 1e-3).unwrap() < 1e-300);
        assert!((bose_occupation(1.0, 1.0 / 2f64.ln()).unwrap() - 1.0).abs() < 1e-14);
        let direct = 1.0 / (1f64.exp() - 1.0);
        assert!((bose_occupation(1.0, 1.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.581977).abs() < 1e-6);
        assert!(matches!(bose_occupation(0.0, 1.0), Err(Error::NonPositiveFrequency(_))));
        assert!(bose_occupation(-1.0, 1.0).is_err());
    }

    #[test]
    fn chi_values_and_kms() {
        assert!((chi(1.0, 0.0, &OHMIC) - 1e-2).abs() < 1e-16);
        assert_eq!(chi(-1.0, 0.0, &OHMIC), 0.0);
        let n = 1.0 / (0.5f64.exp() - 1.0);
        let want = 0.5 * 1e-2 * (n + 1.0);
        assert!((chi(0.5, 1.0, &OHMIC) - want).abs() < 1e-16);
        for &(w, t) in &[(0.5, 1.0), (1.3, 0.07), (3.0, 0.3), (1e-4, 0.2), (7.0, 2.0)] {
            let ratio = chi(-w, t, &OHMIC) / chi(w, t, &OHMIC);
            let kms = (-w / t).exp();
            assert!((ratio / kms - 1.0).abs() < 1e-10, "KMS at ω={w}, T={t}");
        }
        assert!((chi(0.0, 0.2, &OHMIC) - 2e-3).abs() < 1e-18);
        assert!(((chi(1e-9, 0.2, &OHMIC) - chi(0.0, 0.2, &OHMIC)) / 2e-3).abs() < 1e-8);
    }

    /// Adaptive Simpson quadrature on [a, b].
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    /// Principal value of (1/π)∫₀^Λ γ(ν)[1/(ω−ν) − 1/(ω+ν)] dν by folding the
    /// singular interval around ν = ω onto a regular integrand.
    fn re_gamma_quadrature(omega: f64, cutoff: f64) -> f64 {
        let gamma = |nu: f64| OHMIC.density(nu);
        let a = omega.min(cutoff - omega);
        let smooth = |nu: f64| -gamma(nu) / (omega + nu);
        let singular = |nu: f64| gamma(nu) / (omega - nu);
        let folded = |u: f64| {
            if u == 0.0 {
                // limit of [γ(ω−u) − γ(ω+u)]/u
                -2.0 * OHMIC.gamma / OHMIC.omega_ref
            } else {
                (gamma(omega - u) - gamma(omega + u)) / u
            }
        };
        let tol = 1e-13;
        let total = simpson(&smooth, 0.0, cutoff, tol)
            + simpson(&folded, 0.0, a, tol)
            + simpson(&singular, 0.0, omega - a, tol)
            + simpson(&singular, omega + a, cutoff, tol);
        total / PI
    }

    #[test]
    fn lamb_shift_matches_principal_value_quadrature() {
        let channel = ChannelSpec {
            operator: ChannelOperator::CavityX,
            density: OHMIC,
            temperature: 0.0,
            lamb_shift: LambShift::PrincipalValue { cutoff: 50.0 },
        };
        let closed = xi(1.0, 0.0, &channel).unwrap();
        let numeric = re_gamma_quadrature(1.0, 50.0);
        assert!(((closed - numeric) / numeric).abs() < 1e-6, "{closed} vs {numeric}");
        for w in [0.3, 2.7, 12.0] {
            let q = re_gamma_quadrature(w, 50.0);
            assert!(((OHMIC.re_gamma(w, 50.0) - q) / q).abs() < 1e-6);
        }
        let off = ChannelSpec {
            lamb_shift: LambShift::Off,
            ..channel.clone()
        };
        assert!(matches!(xi(1.0, 0.0, &off), Err(Error::LambShiftDisabled)));
        assert_eq!(off.lamb(1.0).unwrap(), 0.0);
        let warm = ChannelSpec {
            temperature: 0.3,
            ..channel
        };
        let n = bose_occupation(0.8, 0.3).unwrap();
        assert!((xi(-0.8, 0.3, &warm).unwrap() + OHMIC.re_gamma(0.8, 50.0) * n).abs() < 1e-15);
        assert!(xi(0.0, 0.3, &warm).unwrap().is_finite());
    }

    #[test]
    fn bare_two_level_cavity_decay_constant() {
        // Cavity truncated to {|0⟩, |1⟩}, no emitters: H = diag(0, ω₀).
        let x0 = 0.8;
        let eig = EigenSystem::from_parts(vec![0.0, 1.0], Mat::identity(2, 2), DEFAULT_TOLERANCE);
        let x = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.0, -x0),
            (1, 0) => c64::new(0.0, x0),
            _ => c64::new(0.0, 0.0),
        });
        let ts = group_eigenbasis(&eig, x, DEFAULT_TOLERANCE);
        let channel = ChannelSpec {
            operator: ChannelOperator::CavityX,
            density: OHMIC,
            temperature: 0.0,
            lamb_shift: LambShift::Off,
        };
        let rates = RateTable::build(&eig, &[ts], &[channel]).unwrap();
        assert!((rates.z[1].re - 0.5 * 1e-2 * x0 * x0).abs() < 1e-16);
        assert_eq!(rates.z[0].re, 0.0);
        assert_eq!(rates.z[1].im, 1.0);
        assert!((rates.pauli[(0, 1)] - 1e-2 * x0 * x0).abs() < 1e-16);
        assert_eq!(rates.pauli[(1, 0)], 0.0);
    }

    fn table(p: &ModelParams) -> (EigenSystem, RateTable) {
        let ops = build_operators(p).unwrap();
        let h = build_hamiltonian(p, &ops).unwrap();
        let eig = diagonalize(h.as_ref(), DEFAULT_TOLERANCE).unwrap();
        let channels = default_channels(p, LambShift::Off);
        let ts: Vec<_> = std::iter::once(&ops.x)
            .chain(&ops.sigma_y)
            .map(|s| group_transitions(&eig, s.as_ref(), DEFAULT_TOLERANCE).unwrap())
            .collect();
        let rates = RateTable::build(&eig, &ts, &channels).unwrap();
        (eig, rates)
    }

    #[test]
    fn detailed_balance_and_generator() {
        let p = ModelParams::new(2, 0.45, 0.2, 0.17).with_n_max(10);
        let (eig, rates) = table(&p);
        let beta = 1.0 / p.temperature;
        let w = &rates.pauli;
        for n in 0..eig.dim() {
            for k in 0..n {
                let (a, b) = (w[(n, k)], w[(k, n)]);
                assert!(a >= 0.0 && b >= 0.0);
                let de = eig.energies[n] - eig.energies[k];
                if a > 0.0 && beta * de.abs() < 600.0 {
                    let lhs = a * (-beta * (eig.energies[k] - eig.energies[0])).exp();
                    let rhs = b * (-beta * (eig.energies[n] - eig.energies[0])).exp();
                    assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(rhs), "pair ({n},{k})");
                }
            }
        }
        let g = rates.generator();
        for n in 0..eig.dim() {
            let col: f64 = (0..eig.dim()).map(|k| g[(k, n)]).sum();
            assert!(col.abs() < 1e-14);
            assert!(rates.z[n].re > 0.0);
            assert!((rates.z[n].im - eig.energies[n]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_temperature_only_decays() {
        let p = ModelParams::dicke(1, 0.5, 0.0).with_n_max(12);
        let (eig, rates) = table(&p);
        for n in 0..eig.dim() {
            for k in 0..eig.dim() {
                if eig.energies[n] > eig.energies[k] + 1e-9 {
                    assert_eq!(rates.pauli[(n, k)], 0.0, "upward gain {k} → {n}");
                }
            }
        }
        assert_eq!(rates.z[0].re, 0.0);
        let g = rates.generator();
        for k in 0..eig.dim() {
            assert_eq!(g[(k, 0)], 0.0);
        }
    }

    #[test]
    fn lamb_cutoff_must_exceed_transitions() {
        let p = ModelParams::dicke(1, 0.3, 0.1).with_n_max(8);
        let ops = build_operators(&p).unwrap();
        let h = build_hamiltonian(&p, &ops).unwrap();
        let eig = diagonalize(h.as_ref(), DEFAULT_TOLERANCE).unwrap();
        let ts = vec![group_transitions(&eig, ops.x.as_ref(), DEFAULT_TOLERANCE).unwrap()];
        let mut ch = default_channels(&p, LambShift::PrincipalValue { cutoff: 3.0 });
        ch.truncate(1);
        assert!(RateTable::build(&eig, &ts, &ch).is_err());
        ch[0].lamb_shift = LambShift::PrincipalValue { cutoff: 50.0 };
        let rates = RateTable::build(&eig, &ts, &ch).unwrap();
        assert!(rates.z.iter().zip(&eig.energies).any(|(z, e)| (z.im - e).abs() > 1e-8));
    }
}
