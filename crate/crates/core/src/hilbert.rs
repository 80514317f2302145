//! Occupation-number basis of the fixed-excitation sector.
//!
//! A basis state lists which two-level emitters are excited and how many
//! photons sit in each cavity mode. Because `(a†)^k |0⟩ = √(k!) |k⟩`, the
//! amplitudes stored against these orthonormal states are exactly the
//! coefficients of the usual creation-operator expansion with its
//! `1/√2!`, `1/√3!` prefactors, so no symmetrisation factors are carried.
//!
//! Canonical ordering: descending number of excited emitters, then the
//! emitter pattern in descending lexicographic order, then the mode
//! occupations in descending lexicographic order. The first state is always
//! "every emitter excited, field empty".

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Emitter and mode occupations of one basis vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub qubits: Vec<u8>,
    pub modes: Vec<u8>,
}

impl BasisState {
    pub fn new(qubits: Vec<u8>, modes: Vec<u8>) -> Self {
        Self { qubits, modes }
    }

    pub fn excited_qubits(&self) -> u32 {
        self.qubits.iter().map(|&q| q as u32).sum()
    }

    pub fn photons(&self) -> u32 {
        self.modes.iter().map(|&n| n as u32).sum()
    }

    pub fn excitations(&self) -> u32 {
        self.excited_qubits() + self.photons()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for q in &self.qubits {
            write!(f, "{}", if *q == 1 { 'e' } else { 'g' })?;
        }
        write!(f, ";")?;
        for (k, n) in self.modes.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Position of a state in the canonical ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorDimensions {
    pub atoms: u32,
    pub excitations: u32,
    pub modes: u32,
    pub dimension: usize,
}

impl SectorDimensions {
    pub fn new(atoms: u32, excitations: u32, modes: u32) -> Result<Self> {
        let dimension = count_amplitudes(atoms, excitations, modes)?;
        let dimension = usize::try_from(dimension).map_err(|_| Error::CountOverflow {
            atoms,
            excitations,
            modes,
        })?;
        Ok(Self {
            atoms,
            excitations,
            modes,
            dimension,
        })
    }

    /// The three-emitter, three-excitation sector used by every simulation.
    pub fn three_excitation(modes: u32) -> Result<Self> {
        Self::new(3, 3, modes)
    }
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Number of basis states with `excitations` quanta shared between `atoms`
/// two-level emitters and `modes` bosonic modes:
/// `Σ_{i=0}^{E} C(A, i) · C(E − i + N_m − 1, N_m − 1)`.
pub fn count_amplitudes(atoms: u32, excitations: u32, modes: u32) -> Result<u64> {
    if modes == 0 {
        return Err(Error::InvalidSector("at least one mode is required".into()));
    }
    let overflow = || Error::CountOverflow {
        atoms,
        excitations,
        modes,
    };
    let (a, e, m) = (atoms as u64, excitations as u64, modes as u64);
    let mut total: u128 = 0;
    for i in 0..=e {
        let emitters = binomial(a, i).ok_or_else(overflow)?;
        let field = binomial(e - i + m - 1, m - 1).ok_or_else(overflow)?;
        let term = emitters.checked_mul(field).ok_or_else(overflow)?;
        total = total.checked_add(term).ok_or_else(overflow)?;
    }
    u64::try_from(total).map_err(|_| overflow())
}

/// All length-`len` vectors with entries in `0..=cap` summing to `total`,
/// in descending lexicographic order.
fn occupations_desc(len: usize, total: u32, cap: u32, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, len: usize, left: u32, cap: u32, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == len {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let slots_after = (len - prefix.len() - 1) as u32;
        let hi = left.min(cap);
        let lo = left.saturating_sub(slots_after.saturating_mul(cap));
        for v in (lo..=hi).rev() {
            prefix.push(v as u8);
            rec(prefix, len, left - v, cap, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, total, cap, out);
}

/// Enumerate the sector in canonical order.
pub fn enumerate_basis(atoms: u32, excitations: u32, modes: u32) -> Result<Vec<BasisState>> {
    let dims = SectorDimensions::new(atoms, excitations, modes)?;
    if excitations > u8::MAX as u32 {
        return Err(Error::InvalidSector(format!(
            "{excitations} excitations exceed the per-mode occupation range"
        )));
    }
    let mut states = Vec::with_capacity(dims.dimension);
    for n_excited in (0..=atoms.min(excitations)).rev() {
        let mut patterns = Vec::new();
        occupations_desc(atoms as usize, n_excited, 1, &mut patterns);
        let mut fields = Vec::new();
        occupations_desc(modes as usize, excitations - n_excited, excitations, &mut fields);
        for q in &patterns {
            for f in &fields {
                states.push(BasisState::new(q.clone(), f.clone()));
            }
        }
    }
    debug_assert_eq!(states.len(), dims.dimension);
    Ok(states)
}

/// An enumerated sector with a reverse lookup table.
#[derive(Debug, Clone)]
pub struct Basis {
    dims: SectorDimensions,
    states: Vec<BasisState>,
    lookup: HashMap<BasisState, usize>,
}

impl Basis {
    pub fn new(atoms: u32, excitations: u32, modes: u32) -> Result<Self> {
        let dims = SectorDimensions::new(atoms, excitations, modes)?;
        let states = enumerate_basis(atoms, excitations, modes)?;
        let lookup = states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect();
        Ok(Self {
            dims,
            states,
            lookup,
        })
    }

    pub fn three_excitation(modes: u32) -> Result<Self> {
        Self::new(3, 3, modes)
    }

    pub fn dims(&self) -> SectorDimensions {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, index: BasisIndex) -> Option<&BasisState> {
        self.states.get(index.0)
    }

    pub fn index_of(&self, state: &BasisState) -> Result<BasisIndex> {
        self.lookup
            .get(state)
            .map(|&k| BasisIndex(k))
            .ok_or_else(|| Error::StateOutsideSector(state.to_string()))
    }
}
