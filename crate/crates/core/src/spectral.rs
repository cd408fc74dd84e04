//! Eigendecomposition of H, grouping of degenerate levels and of transition
//! energies, and the projected coupling operators S_ω.

use std::ops::Range;

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_c, to_eigenbasis};

/// Default tolerance for equal energies and equal transition energies (× ω₀).
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Relative magnitude below which an eigenbasis matrix element counts as zero.
const ELEMENT_FLOOR: f64 = 1e-12;

/// Sorted eigenvalues and real orthonormal eigenvectors of H.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]`; the largest-magnitude
    /// component of every column is positive.
    pub vectors: Mat<f64>,
    /// Contiguous index ranges of (numerically) equal energies.
    pub level_groups: Vec<Range<usize>>,
    level_of: Vec<usize>,
    level_energy: Vec<f64>,
    pub tolerance: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Index of the level group containing state `k`.
    pub fn level_of(&self, k: usize) -> usize {
        self.level_of[k]
    }

    /// Mean energy of level group `level`.
    pub fn level_energy(&self, level: usize) -> f64 {
        self.level_energy[level]
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.level_groups[0].len()
    }

    /// Number of level groups holding more than one state.
    pub fn degenerate_levels(&self) -> usize {
        self.level_groups.iter().filter(|g| g.len() > 1).count()
    }

    /// E_n − E_m using level-mean energies, exactly zero inside a level.
    pub fn transition_energy(&self, m: usize, n: usize) -> f64 {
        let (lm, ln) = (self.level_of[m], self.level_of[n]);
        if lm == ln {
            0.0
        } else {
            self.level_energy[ln] - self.level_energy[lm]
        }
    }

    /// max_k ‖H v_k − E_k v_k‖.
    pub fn max_residual(&self, h: MatRef<'_, f64>) -> f64 {
        let hv = h * &self.vectors;
        let mut worst = 0.0f64;
        for k in 0..self.dim() {
            let mut acc = 0.0;
            for i in 0..self.dim() {
                let r = hv[(i, k)] - self.energies[k] * self.vectors[(i, k)];
                acc += r * r;
            }
            worst = worst.max(acc.sqrt());
        }
        worst
    }

    /// Builds an eigensystem from precomputed parts, regrouping levels.
    pub fn from_parts(energies: Vec<f64>, vectors: Mat<f64>, tolerance: f64) -> Self {
        let mut level_groups = Vec::new();
        let mut start = 0;
        for k in 1..=energies.len() {
            if k == energies.len() || energies[k] - energies[start] >= tolerance {
                level_groups.push(start..k);
                start = k;
            }
        }
        let mut level_of = vec![0; energies.len()];
        let mut level_energy = Vec::with_capacity(level_groups.len());
        for (l, group) in level_groups.iter().enumerate() {
            for k in group.clone() {
                level_of[k] = l;
            }
            level_energy.push(energies[group.clone()].iter().sum::<f64>() / group.len() as f64);
        }
        Self {
            energies,
            vectors,
            level_groups,
            level_of,
            level_energy,
            tolerance,
        }
    }
}

/// Dense symmetric eigendecomposition with energies ascending.
pub fn diagonalize(h: MatRef<'_, f64>, delta_e: f64) -> Result<EigenSystem> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::ShapeMismatch {
            what: "Hamiltonian columns",
            expected: dim,
            got: h.ncols(),
        });
    }
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNonConvergence {
            dim,
            max_abs: max_abs(h),
        })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let energies: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let mut vectors = Mat::<f64>::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        let col = u.col(src);
        let mut pivot = 0;
        for i in 1..dim {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim {
            vectors[(i, k)] = sign * col[i];
        }
    }
    Ok(EigenSystem::from_parts(energies, vectors, delta_e))
}

/// One projected operator S_ω: the matrix elements ⟨m|S|n⟩ with
/// E_n − E_m = ω, stored as `(m, n)` index pairs into the eigenbasis matrix.
#[derive(Clone, Debug)]
pub struct TransitionGroup {
    pub omega: f64,
    pub entries: Vec<(usize, usize)>,
}

/// All projections of a coupling operator S onto fixed transition energies.
#[derive(Clone, Debug)]
pub struct TransitionSet {
    /// S in the eigenbasis: `matrix[(m, n)] = ⟨m|S|n⟩`.
    pub matrix: Mat<c64>,
    /// S_{m,n} = |⟨m|S|n⟩|².
    pub strengths: Mat<f64>,
    /// Sorted by ascending ω.
    pub groups: Vec<TransitionGroup>,
    /// Groups with ω ≠ 0 that collect elements from more than one pair of
    /// levels (degenerate transition energies).
    pub collisions: usize,
}

impl TransitionSet {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Dense S_ω for group `index`.
    pub fn projected(&self, index: usize) -> Mat<c64> {
        let d = self.dim();
        let mut out = Mat::<c64>::zeros(d, d);
        for &(m, n) in &self.groups[index].entries {
            out[(m, n)] = self.matrix[(m, n)];
        }
        out
    }

    /// Index of the group whose frequency is within `tol` of `omega`.
    pub fn find(&self, omega: f64, tol: f64) -> Option<usize> {
        self.groups.iter().position(|g| (g.omega - omega).abs() <= tol)
    }
}

/// Groups the eigenbasis elements of the Hermitian coupling S (given in the
/// product basis) by their transition energy. The transformed matrix is
/// re-symmetrized so that |S_mn| and |S_nm| agree to the last bit.
pub fn group_transitions(eig: &EigenSystem, s: MatRef<'_, c64>, delta_omega: f64) -> Result<TransitionSet> {
    if s.nrows() != eig.dim() || s.ncols() != eig.dim() {
        return Err(Error::ShapeMismatch {
            what: "coupling operator dimension",
            expected: eig.dim(),
            got: s.nrows(),
        });
    }
    if !(delta_omega > 0.0) {
        return Err(crate::error::invalid("delta_omega", "must be positive"));
    }
    let raw = to_eigenbasis(eig.vectors.as_ref(), s);
    let matrix = Mat::from_fn(raw.nrows(), raw.ncols(), |m, n| (raw[(m, n)] + raw[(n, m)].conj()) * 0.5);
    Ok(group_eigenbasis(eig, matrix, delta_omega))
}

/// As [`group_transitions`] for a Hermitian operator already in the eigenbasis.
pub fn group_eigenbasis(eig: &EigenSystem, matrix: Mat<c64>, delta_omega: f64) -> TransitionSet {
    let d = eig.dim();
    let floor = ELEMENT_FLOOR * max_abs_c(matrix.as_ref());
    let strengths = Mat::from_fn(d, d, |m, n| {
        let v = matrix[(m, n)];
        if v.norm() > floor {
            v.norm_sqr()
        } else {
            0.0
        }
    });

    // Positive frequencies are grouped and mirrored onto the negative side, so
    // every −ω group is exactly the transpose of its +ω partner. |ω| ≤ δ is one
    // group at ω = 0.
    let mut zero: Vec<(usize, usize)> = Vec::new();
    let mut positive: Vec<(f64, usize, usize)> = Vec::new();
    for n in 0..d {
        for m in 0..d {
            if strengths[(m, n)] > 0.0 {
                let omega = eig.transition_energy(m, n);
                if omega.abs() <= delta_omega {
                    zero.push((m, n));
                } else if omega > 0.0 {
                    positive.push((omega, m, n));
                }
            }
        }
    }
    positive.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut upper: Vec<TransitionGroup> = Vec::new();
    let mut collisions = 0;
    let mut i = 0;
    while i < positive.len() {
        let start = positive[i].0;
        let mut j = i;
        let mut level_pairs: Vec<(usize, usize)> = Vec::new();
        while j < positive.len() && positive[j].0 - start <= delta_omega {
            let pair = (eig.level_of(positive[j].1), eig.level_of(positive[j].2));
            if !level_pairs.contains(&pair) {
                level_pairs.push(pair);
            }
            j += 1;
        }
        let slice = &positive[i..j];
        if level_pairs.len() > 1 {
            collisions += 2;
        }
        upper.push(TransitionGroup {
            omega: slice.iter().map(|e| e.0).sum::<f64>() / slice.len() as f64,
            entries: slice.iter().map(|e| (e.1, e.2)).collect(),
        });
        i = j;
    }

    let mut groups: Vec<TransitionGroup> = upper
        .iter()
        .rev()
        .map(|g| TransitionGroup {
            omega: -g.omega,
            entries: g.entries.iter().map(|&(m, n)| (n, m)).collect(),
        })
        .collect();
    if !zero.is_empty() {
        groups.push(TransitionGroup { omega: 0.0, entries: zero });
    }
    groups.extend(upper);
    if collisions > 0 {
        log::info!(
            "{collisions} transition groups merge distinct level pairs; \
             off-diagonal blocks are treated as uncoupled"
        );
    }

    TransitionSet {
        matrix,
        strengths,
        groups,
        collisions,
    }
}
