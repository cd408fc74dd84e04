//! Closed-form ladder energies in the rotating-wave limit, the collective
//! coupling maps and low-temperature approximations of g²(0) for one emitter.
//!
//! All quantities are in units of the resonance frequency ω₀.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Above this coupling the second and third excited single-emitter levels
/// cross and the low-temperature approximation of g²(0) is not reliable.
pub const APPROXIMATION_COUPLING_LIMIT: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    TavisCummings,
    Dicke,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelLabel {
    Ground,
    /// single emitter, |n, ±⟩
    Polariton { photons: usize, upper: bool },
    /// two emitters, symmetric sector with `excitations` quanta; branch −1, 0, +1
    Triplet { excitations: usize, branch: i8 },
    /// two emitters, antisymmetric state with `photons` cavity quanta
    Singlet { photons: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Level {
    pub label: LevelLabel,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LadderEnergies {
    pub levels: Vec<Level>,
}

impl LadderEnergies {
    pub fn energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.levels.iter().map(|l| l.energy).collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// (nω₀ − √n g, nω₀ + √n g) for photon index n ≥ 1.
pub fn jc_energies(n: usize, g: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(invalid("n", "photon index must be ≥ 1; the ground level is 0"));
    }
    let split = (n as f64).sqrt() * g;
    Ok((n as f64 - split, n as f64 + split))
}

/// Single-emitter ladder up to `max_excitations` quanta, including the ground level.
pub fn jc_ladder(max_excitations: usize, g: f64) -> LadderEnergies {
    let mut levels = vec![Level {
        label: LevelLabel::Ground,
        energy: 0.0,
    }];
    for n in 1..=max_excitations {
        let (lower, upper) = jc_energies(n, g).expect("n ≥ 1");
        levels.push(Level {
            label: LevelLabel::Polariton { photons: n, upper: false },
            energy: lower,
        });
        levels.push(Level {
            label: LevelLabel::Polariton { photons: n, upper: true },
            energy: upper,
        });
    }
    LadderEnergies { levels }
}

/// Two-emitter levels for index n: the symmetric sector with n quanta and
/// the antisymmetric state with n photons at (n+1)ω₀.
pub fn tc_energies_n2(n: usize, g: f64) -> LadderEnergies {
    let nf = n as f64;
    let triplet = |branch: i8, energy: f64| Level {
        label: LevelLabel::Triplet { excitations: n, branch },
        energy,
    };
    let mut levels = match n {
        0 => vec![Level {
            label: LevelLabel::Ground,
            energy: 0.0,
        }],
        1 => vec![triplet(-1, 1.0 - 2f64.sqrt() * g), triplet(1, 1.0 + 2f64.sqrt() * g)],
        _ => {
            let split = 2f64.sqrt() * (2.0 * nf - 1.0).sqrt() * g;
            vec![triplet(-1, nf - split), triplet(0, nf), triplet(1, nf + split)]
        }
    };
    levels.push(Level {
        label: LevelLabel::Singlet { photons: n },
        energy: nf + 1.0,
    });
    LadderEnergies { levels }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingEnergies {
    /// ω₀ ± √N g
    pub first: [f64; 2],
    /// symmetric two-quanta levels, 2ω₀ and 2ω₀ ± √2·√(2N−1) g
    pub second: Vec<f64>,
}

/// Lowest symmetric levels for N emitters in the rotating-wave limit.
pub fn scaling_energies(n_emitters: usize, g: f64) -> Result<ScalingEnergies> {
    if n_emitters == 0 {
        return Err(invalid("n_emitters", "must be ≥ 1"));
    }
    let nf = n_emitters as f64;
    let first = [1.0 - nf.sqrt() * g, 1.0 + nf.sqrt() * g];
    let second = if n_emitters == 1 {
        vec![2.0 - 2f64.sqrt() * g, 2.0 + 2f64.sqrt() * g]
    } else {
        // rungs |2,↓⟩, |1,1⟩, |0,2⟩ couple with √(2N) g and √(2(N−1)) g
        let split = (2.0 * (2.0 * nf - 1.0)).sqrt() * g;
        vec![2.0 - split, 2.0, 2.0 + split]
    };
    Ok(ScalingEnergies { first, second })
}

/// Single-emitter coupling whose chart features match N emitters at `g`.
pub fn scaling_map(n_emitters: usize, g: f64, limit: Limit) -> Result<f64> {
    if n_emitters == 0 {
        return Err(invalid("n_emitters", "must be ≥ 1"));
    }
    let nf = n_emitters as f64;
    Ok(match limit {
        Limit::TavisCummings => g * nf.sqrt(),
        Limit::Dicke => g * nf,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct G2Approximation {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// false above the level crossing at g ≈ 0.4ω₀
    pub valid: bool,
}

/// Polariton |n, s⟩ = (|g, n⟩ + s|e, n−1⟩)/√2 for n ≥ 1; s = ±1.
fn polariton_energy(n: usize, s: f64, g: f64) -> f64 {
    n as f64 + s * (n as f64).sqrt() * g
}

/// ⟨n−1, s|a|n, t⟩ between polaritons (or the ground state for n = 1).
fn ladder_element(n: usize, s: f64, t: f64) -> f64 {
    if n == 1 {
        return 1.0 / 2f64.sqrt();
    }
    ((n as f64).sqrt() + s * t * ((n - 1) as f64).sqrt()) / 2.0
}

/// |⟨0|Ẋ₋²|2, t⟩|² for X₀ = 1, summed coherently over the intermediate |1, ±⟩.
fn two_photon_strength(t: f64, g: f64) -> f64 {
    let e2 = polariton_energy(2, t, g);
    let amplitude: f64 = [-1.0, 1.0]
        .iter()
        .map(|&s| {
            let e1 = polariton_energy(1, s, g);
            // ⟨m|Ẋ₋|n⟩ = −i(E_n − E_m)⟨m|X|n⟩ and ⟨m|X|n⟩ = −i⟨m|a|n⟩ below n.
            let upper = -(e2 - e1) * ladder_element(2, s, t);
            let lower = -e1 * ladder_element(1, 0.0, s);
            upper * lower
        })
        .sum();
    amplitude * amplitude
}

/// Low-temperature g²(0) for one emitter in the rotating-wave limit.
///
/// The basic form keeps |1,−⟩ in ⟨Ẋ₊Ẋ₋⟩ and |2,−⟩ in ⟨Ẋ₊²Ẋ₋²⟩, with the
/// closed-form prefactors. The refined form adds |1,+⟩ and |2,+⟩, whose
/// matrix elements are assembled from the polariton eigenvectors.
pub fn appc_g2_approx(g: f64, temperature: f64, refined: bool) -> Result<G2Approximation> {
    if !(g >= 0.0 && g < 1.0) {
        return Err(invalid("g", format!("must lie in [0, 1), got {g}")));
    }
    if !(temperature > 0.0) {
        return Err(invalid("temperature", format!("must be > 0, got {temperature}")));
    }
    let beta = 1.0 / temperature;
    let sqrt2 = 2f64.sqrt();
    let sqrt8 = 8f64.sqrt();
    let lower_a = 1.0 - (sqrt2 - 1.0) * g;
    let lower_b = 1.0 - (sqrt2 + 1.0) * g;
    let boltzmann = |e: f64| (-beta * e).exp();

    let mut denominator = 0.5 * (1.0 - g).powi(2) * boltzmann(1.0 - g);
    let bracket = (3.0 + sqrt8) / 8.0 * lower_a.powi(2) * (1.0 - g).powi(2)
        + 0.25 * lower_a * (1.0 - g * g) * lower_b
        + (3.0 - sqrt8) / 8.0 * lower_b.powi(2) * (1.0 + g).powi(2);
    let mut numerator = bracket * boltzmann(2.0 - sqrt2 * g);
    if refined {
        denominator += 0.5 * (1.0 + g).powi(2) * boltzmann(1.0 + g);
        numerator += two_photon_strength(1.0, g) * boltzmann(2.0 + sqrt2 * g);
    }
    Ok(G2Approximation {
        value: numerator / (denominator * denominator),
        numerator,
        denominator,
        valid: g <= APPROXIMATION_COUPLING_LIMIT,
    })
}
