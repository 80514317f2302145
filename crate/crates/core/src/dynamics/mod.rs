//! Linear generator `dA/dt = M·A` of the three-excitation amplitudes and its
//! time integration.
//!
//! Both assembly routes work in the frame rotating at the qubit transition
//! frequency, so only detunings appear. Losses enter as complex frequencies
//! `ω̃_eg = ω_eg − iγ/2` and `ω̃_n = ω_n − iκ/2`; population that leaks out of
//! the sector shows up as norm decay.

mod appendix;
mod generic;
mod integrate;

pub use appendix::assemble_appendix_a;
pub use generic::assemble_generic;
pub use integrate::{integrate, integrate_with, Rk4Stepper, StepSchedule, Trajectory};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::SectorDimensions;
use crate::sparse::CsrMatrix;

/// Sparse `M` with `dA/dt = M·A`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGenerator {
    pub matrix: CsrMatrix,
}

impl EffectiveGenerator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matrix.mul_vec(x, y);
    }
}

/// Amplitudes over the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Every qubit excited, field empty: basis index 0 of the three-excitation sector.
pub fn initial_state_all_excited(dims: SectorDimensions) -> Result<StateVector> {
    if dims.atoms != 3 || dims.excitations != 3 {
        return Err(Error::InvalidSector(format!(
            "all-excited initial state needs 3 atoms and 3 excitations, got {} and {}",
            dims.atoms, dims.excitations
        )));
    }
    let mut s = StateVector::zeros(dims.dimension);
    s.amplitudes[0] = Complex64::new(1.0, 0.0);
    Ok(s)
}
