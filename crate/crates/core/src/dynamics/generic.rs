use num_complex::Complex64;

use super::EffectiveGenerator;
use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState};
use crate::model::{complex_detuning, coupling_table, mode_window, SystemParams};
use crate::sparse::TripletBuilder;

/// Generator from second-quantised matrix elements of
/// `H = Σ ω̃_eg σ†σ + Σ ω̃_n a†a + i Σ (𝒢 σ† a − 𝒢* σ a†)` in the rotating
/// frame, so `M = −iH`:
///
/// * diagonal: `−i Σ_n Δ̃_n m_n − (γ/2)·(excited qubits)`
/// * `σ†_j a_n`: `+𝒢_{nj} √m_n`
/// * `σ_j a†_n`: `−𝒢*_{nj} √(m_n + 1)`
///
/// Works for any sector with at most three emitters.
pub fn assemble_generic(params: &SystemParams, basis: &Basis) -> Result<EffectiveGenerator> {
    params.validate()?;
    let dims = basis.dims();
    if dims.atoms > 3 || dims.modes != params.n_modes {
        return Err(Error::InvalidSector(format!(
            "basis ({} atoms, {} modes) does not match parameters ({} modes, at most 3 atoms)",
            dims.atoms, dims.modes, params.n_modes
        )));
    }
    let window = mode_window(params)?;
    let detunings: Vec<Complex64> = window
        .indices
        .iter()
        .map(|&n| complex_detuning(params, n))
        .collect();
    let g = coupling_table(params)?;
    let atoms = dims.atoms as usize;

    let mut m = TripletBuilder::new(basis.len());
    let mut target = BasisState::new(vec![0; atoms], vec![0; window.len()]);
    for (col, state) in basis.states().iter().enumerate() {
        let mut diag = Complex64::new(-0.5 * params.gamma * state.excited_qubits() as f64, 0.0);
        for (d, &n) in detunings.iter().zip(&state.modes) {
            diag += Complex64::new(0.0, -1.0) * d * n as f64;
        }
        m.push(col, col, diag);

        for j in 0..atoms {
            for (a, &occ) in state.modes.iter().enumerate() {
                target.qubits.copy_from_slice(&state.qubits);
                target.modes.copy_from_slice(&state.modes);
                if state.qubits[j] == 0 && occ > 0 {
                    target.qubits[j] = 1;
                    target.modes[a] -= 1;
                    let row = basis.index_of(&target)?.0;
                    m.push(row, col, g[a][j] * (occ as f64).sqrt());
                } else if state.qubits[j] == 1 {
                    target.qubits[j] = 0;
                    target.modes[a] += 1;
                    let row = basis.index_of(&target)?.0;
                    m.push(row, col, -g[a][j].conj() * (occ as f64 + 1.0).sqrt());
                }
            }
        }
    }
    Ok(EffectiveGenerator { matrix: m.build() })
}
