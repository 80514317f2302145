//! Reduced qubit state, populations, tripartite negativity and GHZ fidelity.
//!
//! The 8×8 reduced state uses the slot order
//! `ggg, gge, geg, egg, gee, ege, eeg, eee` (grouped by excitation number).
//! Internally a qubit pattern is also addressed by its bitmask
//! `q1·4 + q2·2 + q3`; the two orders differ only by swapping `egg` and `gee`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::Basis;
use crate::linalg::hermitian_eigenvalues;

pub const QUBIT_LABELS: [&str; 8] = ["ggg", "gge", "geg", "egg", "gee", "ege", "eeg", "eee"];

/// Slot of each bitmask; the map is its own inverse.
const SLOT_OF_MASK: [usize; 8] = [0, 1, 2, 4, 3, 5, 6, 7];

/// Partial-transpose eigenvalues above `-EIGENVALUE_FLOOR` count as zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn slot_of_qubits(qubits: &[u8]) -> usize {
    let mask = (qubits[0] as usize) << 2 | (qubits[1] as usize) << 1 | qubits[2] as usize;
    SLOT_OF_MASK[mask]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensityMatrix {
    pub entries: [[Complex64; 8]; 8],
}

impl QubitDensityMatrix {
    pub fn zero() -> Self {
        Self {
            entries: [[ZERO; 8]; 8],
        }
    }

    /// `|ψ⟩⟨ψ|` for a qubit vector given in slot order.
    pub fn from_pure(psi: &[Complex64; 8]) -> Self {
        let mut rho = Self::zero();
        for (r, a) in psi.iter().enumerate() {
            for (c, b) in psi.iter().enumerate() {
                rho.entries[r][c] = a * b.conj();
            }
        }
        rho
    }

    pub fn trace(&self) -> f64 {
        (0..8).map(|k| self.entries[k][k].re).sum()
    }

    /// Copy scaled to unit trace; a zero matrix is returned unchanged.
    pub fn renormalized(&self) -> Self {
        let tr = self.trace();
        if tr <= 0.0 {
            return *self;
        }
        let mut out = *self;
        for v in out.entries.iter_mut().flatten() {
            *v /= tr;
        }
        out
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..8 {
            for c in 0..8 {
                worst = worst.max((self.entries[r][c] - self.entries[c][r].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<[f64; 8]> {
        hermitian_eigenvalues(&self.entries)
    }
}

/// Precomputed grouping of basis states by field configuration, so the
/// partial trace over the modes is a sum over pairs within each group.
#[derive(Debug, Clone)]
pub struct QubitReducer {
    dim: usize,
    groups: Vec<Vec<(usize, usize)>>,
}

impl QubitReducer {
    pub fn new(basis: &Basis) -> Result<Self> {
        if basis.dims().atoms != 3 {
            return Err(Error::InvalidSector(format!(
                "qubit reduction needs three emitters, basis has {}",
                basis.dims().atoms
            )));
        }
        let mut index: HashMap<&[u8], usize> = HashMap::new();
        let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
        for (k, s) in basis.states().iter().enumerate() {
            let g = *index.entry(&s.modes).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push((slot_of_qubits(&s.qubits), k));
        }
        Ok(Self {
            dim: basis.len(),
            groups,
        })
    }

    /// `ρ[q, q'] = Σ_f A_{q,f} conj(A_{q',f})`.
    pub fn reduce(&self, amplitudes: &[Complex64]) -> Result<QubitDensityMatrix> {
        if amplitudes.len() != self.dim {
            return Err(Error::InvalidParams(format!(
                "state has {} amplitudes, basis has {}",
                amplitudes.len(),
                self.dim
            )));
        }
        let mut rho = QubitDensityMatrix::zero();
        for group in &self.groups {
            for &(r, i) in group {
                for &(c, j) in group {
                    rho.entries[r][c] += amplitudes[i] * amplitudes[j].conj();
                }
            }
        }
        Ok(rho)
    }
}

pub fn reduce_qubits(basis: &Basis, amplitudes: &[Complex64]) -> Result<QubitDensityMatrix> {
    QubitReducer::new(basis)?.reduce(amplitudes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub p_eee: f64,
    pub p_eeg: f64,
    pub p_egg: f64,
    pub p_ggg: f64,
}

impl Populations {
    pub fn total(&self) -> f64 {
        self.p_eee + self.p_eeg + self.p_egg + self.p_ggg
    }
}

pub fn populations(rho: &QubitDensityMatrix) -> Populations {
    let d = |k: usize| rho.entries[k][k].re;
    Populations {
        p_eee: d(7),
        p_eeg: d(4) + d(5) + d(6),
        p_egg: d(1) + d(2) + d(3),
        p_ggg: d(0),
    }
}

/// Transpose the indices of one qubit (`cut` = 0, 1, 2 for A, B, C):
/// `⟨m n|ρ^T|p q⟩ = ⟨p n|ρ|m q⟩`.
pub fn partial_transpose(rho: &QubitDensityMatrix, cut: usize) -> Result<[[Complex64; 8]; 8]> {
    if cut > 2 {
        return Err(Error::InvalidParams(format!(
            "partial transpose cut must be 0, 1 or 2, got {cut}"
        )));
    }
    let bit = 1 << (2 - cut);
    let mut out = [[ZERO; 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            let (r2, c2) = ((r & !bit) | (c & bit), (c & !bit) | (r & bit));
            out[SLOT_OF_MASK[r]][SLOT_OF_MASK[c]] = rho.entries[SLOT_OF_MASK[r2]][SLOT_OF_MASK[c2]];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityResult {
    /// Cuts A|BC, B|AC, C|AB.
    pub per_cut: [f64; 3],
    pub tripartite: f64,
}

/// Bipartite negativity `Σ(|λ| − λ)` of a partially transposed matrix.
pub fn cut_negativity(pt: &[[Complex64; 8]; 8]) -> Result<f64> {
    let ev = hermitian_eigenvalues(pt)?;
    Ok(ev
        .iter()
        .filter(|&&l| l < -EIGENVALUE_FLOOR)
        .fold(0.0, |acc, &l| acc - 2.0 * l))
}

/// Per-cut negativities and their geometric mean.
pub fn negativity(rho: &QubitDensityMatrix) -> Result<NegativityResult> {
    let mut per_cut = [0.0; 3];
    for (cut, v) in per_cut.iter_mut().enumerate() {
        *v = cut_negativity(&partial_transpose(rho, cut)?)?;
    }
    let tripartite = (per_cut[0] * per_cut[1] * per_cut[2]).cbrt();
    Ok(NegativityResult {
        per_cut,
        tripartite,
    })
}

/// `⟨GHZ|ρ|GHZ⟩` with `|GHZ⟩ = (|ggg⟩ + |eee⟩)/√2`.
pub fn ghz_fidelity(rho: &QubitDensityMatrix) -> f64 {
    let e = &rho.entries;
    0.5 * (e[0][0].re + e[7][7].re + 2.0 * e[7][0].re)
}
