//! Generator written family by family from the closed amplitude equations.
//!
//! Amplitude families (qubits `i < j`, third qubit `k`; modes `α < β < γ`):
//!
//! | family  | qubits excited | photons       |
//! |---------|----------------|---------------|
//! | `A_123` | all three      | none          |
//! | `A_ijα` | `i, j`         | `α`           |
//! | `A_iαα` | `i`            | `α, α`        |
//! | `A_iαβ` | `i`            | `α, β`        |
//! | `A_ααα` | none           | `α, α, α`     |
//! | `A_ααβ` | none           | `α, α, β`     |
//! | `A_αββ` | none           | `α, β, β`     |
//! | `A_αβγ` | none           | `α, β, γ`     |
//!
//! Each row below is one `d/dt` equation; its damping prefactor lands on the
//! diagonal with a minus sign. This path shares nothing with the generic
//! assembly except the basis lookup, so the two can check each other.

use num_complex::Complex64;

use super::EffectiveGenerator;
use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState};
use crate::model::{complex_detuning, coupling_table, mode_window, SystemParams};
use crate::sparse::TripletBuilder;

struct Families<'a> {
    basis: &'a Basis,
    n_modes: usize,
}

impl Families<'_> {
    fn idx(&self, excited: &[usize], photons: &[usize]) -> Result<usize> {
        let mut qubits = vec![0u8; 3];
        for &q in excited {
            qubits[q] = 1;
        }
        let mut modes = vec![0u8; self.n_modes];
        for &p in photons {
            modes[p] += 1;
        }
        Ok(self.basis.index_of(&BasisState::new(qubits, modes))?.0)
    }
}

fn third(i: usize, j: usize) -> usize {
    3 - i - j
}

pub fn assemble_appendix_a(params: &SystemParams, basis: &Basis) -> Result<EffectiveGenerator> {
    params.validate()?;
    let dims = basis.dims();
    if dims.atoms != 3 || dims.excitations != 3 || dims.modes != params.n_modes {
        return Err(Error::InvalidSector(format!(
            "equation families need the 3-atom, 3-excitation sector with {} modes",
            params.n_modes
        )));
    }
    let window = mode_window(params)?;
    let nm = window.len();
    let g = coupling_table(params)?;
    // i·Δ̃_α
    let i_det: Vec<Complex64> = window
        .indices
        .iter()
        .map(|&n| Complex64::i() * complex_detuning(params, n))
        .collect();
    let gamma = Complex64::new(params.gamma, 0.0);
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let f = Families { basis, n_modes: nm };
    let mut m = TripletBuilder::new(basis.len());

    // (a) dA_123/dt = −(3γ/2) A_123 + Σ_{i<j} Σ_{k≠i,j} Σ_α 𝒢_αk A_ijα
    let r = f.idx(&[0, 1, 2], &[])?;
    m.push(r, r, -1.5 * gamma);
    for i in 0..3 {
        for j in (i + 1)..3 {
            let k = third(i, j);
            for a in 0..nm {
                m.push(r, f.idx(&[i, j], &[a])?, g[a][k]);
            }
        }
    }

    // (b) (d/dt + iΔ̃_α + γ) A_ijα = √2 𝒢_αi A_jαα + √2 𝒢_αj A_iαα − 𝒢*_αk A_123
    //     + Σ_{β>α} 𝒢_βi A_jαβ + Σ_{β<α} 𝒢_βi A_jβα + Σ_{β>α} 𝒢_βj A_iαβ + Σ_{β<α} 𝒢_βj A_iβα
    for i in 0..3 {
        for j in (i + 1)..3 {
            let k = third(i, j);
            for a in 0..nm {
                let r = f.idx(&[i, j], &[a])?;
                m.push(r, r, -(i_det[a] + gamma));
                m.push(r, f.idx(&[j], &[a, a])?, s2 * g[a][i]);
                m.push(r, f.idx(&[i], &[a, a])?, s2 * g[a][j]);
                m.push(r, f.idx(&[0, 1, 2], &[])?, -g[a][k].conj());
                for b in (a + 1)..nm {
                    m.push(r, f.idx(&[j], &[a, b])?, g[b][i]);
                }
                for b in 0..a {
                    m.push(r, f.idx(&[j], &[b, a])?, g[b][i]);
                }
                for b in (a + 1)..nm {
                    m.push(r, f.idx(&[i], &[a, b])?, g[b][j]);
                }
                for b in 0..a {
                    m.push(r, f.idx(&[i], &[b, a])?, g[b][j]);
                }
            }
        }
    }

    // (c) (d/dt + 2iΔ̃_α + γ/2) A_iαα = √3 𝒢_αi A_ααα + Σ_{β>α} 𝒢_βi A_ααβ
    //     + Σ_{β<α} 𝒢_βi A_βαα − √2 Σ_{j>i} 𝒢*_αj A_ijα − √2 Σ_{j<i} 𝒢*_αj A_jiα
    for i in 0..3 {
        for a in 0..nm {
            let r = f.idx(&[i], &[a, a])?;
            m.push(r, r, -(2.0 * i_det[a] + 0.5 * gamma));
            m.push(r, f.idx(&[], &[a, a, a])?, s3 * g[a][i]);
            for b in (a + 1)..nm {
                m.push(r, f.idx(&[], &[a, a, b])?, g[b][i]);
            }
            for b in 0..a {
                m.push(r, f.idx(&[], &[b, a, a])?, g[b][i]);
            }
            for j in (i + 1)..3 {
                m.push(r, f.idx(&[i, j], &[a])?, -s2 * g[a][j].conj());
            }
            for j in 0..i {
                m.push(r, f.idx(&[j, i], &[a])?, -s2 * g[a][j].conj());
            }
        }
    }

    // (d) (d/dt + iΔ̃_α + iΔ̃_β + γ/2) A_iαβ = √2 𝒢_αi A_ααβ + √2 𝒢_βi A_αββ
    //     + Σ_{γ∉{α,β}} 𝒢_γi A_{sorted(α,β,γ)}
    //     − Σ_{j≠i} 𝒢*_βj A_{(ij)α} − Σ_{j≠i} 𝒢*_αj A_{(ij)β}
    // The single excited qubit contributes γ/2 to the damping, as in (c).
    for i in 0..3 {
        for a in 0..nm {
            for b in (a + 1)..nm {
                let r = f.idx(&[i], &[a, b])?;
                m.push(r, r, -(i_det[a] + i_det[b] + 0.5 * gamma));
                m.push(r, f.idx(&[], &[a, a, b])?, s2 * g[a][i]);
                m.push(r, f.idx(&[], &[a, b, b])?, s2 * g[b][i]);
                for c in (b + 1)..nm {
                    m.push(r, f.idx(&[], &[a, b, c])?, g[c][i]);
                }
                for c in (a + 1)..b {
                    m.push(r, f.idx(&[], &[a, c, b])?, g[c][i]);
                }
                for c in 0..a {
                    m.push(r, f.idx(&[], &[c, a, b])?, g[c][i]);
                }
                for j in (i + 1)..3 {
                    m.push(r, f.idx(&[i, j], &[a])?, -g[b][j].conj());
                }
                for j in 0..i {
                    m.push(r, f.idx(&[j, i], &[a])?, -g[b][j].conj());
                }
                for j in (i + 1)..3 {
                    m.push(r, f.idx(&[i, j], &[b])?, -g[a][j].conj());
                }
                for j in 0..i {
                    m.push(r, f.idx(&[j, i], &[b])?, -g[a][j].conj());
                }
            }
        }
    }

    // (e) (d/dt + 3iΔ̃_α) A_ααα = −√3 Σ_i 𝒢*_αi A_iαα
    for a in 0..nm {
        let r = f.idx(&[], &[a, a, a])?;
        m.push(r, r, -3.0 * i_det[a]);
        for i in 0..3 {
            m.push(r, f.idx(&[i], &[a, a])?, -s3 * g[a][i].conj());
        }
    }

    // (f) (d/dt + 2iΔ̃_α + iΔ̃_β) A_ααβ = −Σ_i 𝒢*_βi A_iαα − √2 Σ_i 𝒢*_αi A_iαβ
    // (g) (d/dt + iΔ̃_α + 2iΔ̃_β) A_αββ = −Σ_i 𝒢*_αi A_iββ − √2 Σ_i 𝒢*_βi A_iαβ
    for a in 0..nm {
        for b in (a + 1)..nm {
            let r = f.idx(&[], &[a, a, b])?;
            m.push(r, r, -(2.0 * i_det[a] + i_det[b]));
            for i in 0..3 {
                m.push(r, f.idx(&[i], &[a, a])?, -g[b][i].conj());
            }
            for i in 0..3 {
                m.push(r, f.idx(&[i], &[a, b])?, -s2 * g[a][i].conj());
            }

            let r = f.idx(&[], &[a, b, b])?;
            m.push(r, r, -(i_det[a] + 2.0 * i_det[b]));
            for i in 0..3 {
                m.push(r, f.idx(&[i], &[b, b])?, -g[a][i].conj());
            }
            for i in 0..3 {
                m.push(r, f.idx(&[i], &[a, b])?, -s2 * g[b][i].conj());
            }
        }
    }

    // (h) (d/dt + iΔ̃_α + iΔ̃_β + iΔ̃_γ) A_αβγ
    //     = −Σ_i 𝒢*_γi A_iαβ − Σ_i 𝒢*_βi A_iαγ − Σ_i 𝒢*_αi A_iβγ
    for a in 0..nm {
        for b in (a + 1)..nm {
            for c in (b + 1)..nm {
                let r = f.idx(&[], &[a, b, c])?;
                m.push(r, r, -(i_det[a] + i_det[b] + i_det[c]));
                for i in 0..3 {
                    m.push(r, f.idx(&[i], &[a, b])?, -g[c][i].conj());
                }
                for i in 0..3 {
                    m.push(r, f.idx(&[i], &[a, c])?, -g[b][i].conj());
                }
                for i in 0..3 {
                    m.push(r, f.idx(&[i], &[b, c])?, -g[a][i].conj());
                }
            }
        }
    }

    Ok(EffectiveGenerator { matrix: m.build() })
}
