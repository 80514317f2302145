//! Physical parameters in cavity units.
//!
//! Times are measured in `L/c`; frequencies and rates in `c/L`. Qubit
//! positions are fractions of the round-trip length `L`, and the cavity
//! length itself is given in units of the transition wavelength `λ_eg`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `L / λ_eg` used throughout the reference scenarios.
pub const REFERENCE_CAVITY_LENGTH: f64 = 994.28;

/// Default coupling magnitude `|𝒢| = 0.314 · 2π` in units of `c/L`.
///
/// With the resonant mode locked onto the qubit transition this reproduces
/// the single-mode landmarks: `P_eee ≈ P_ggg ≈ 0.2` near `t = 0.875 L/c`,
/// negativity onset near `0.5 L/c` and a peak tripartite negativity of 0.68.
pub const DEFAULT_COUPLING: f64 = 0.314 * 2.0 * PI;

pub const SAME_LOCATION: [f64; 3] = [0.0, 0.0, 0.0];
pub const SEPARATED: [f64; 3] = [0.0, 1.0 / 3.0, 2.0 / 3.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_modes: u32,
    /// `L / λ_eg`.
    pub cavity_length: f64,
    /// Qubit positions as fractions of `L`, each in `[0, 1)`.
    pub positions: [f64; 3],
    /// `|𝒢|`, identical for every (mode, qubit) pair.
    pub coupling: f64,
    /// Spontaneous emission rate of each qubit.
    pub gamma: f64,
    /// Leakage rate of each cavity mode.
    pub kappa: f64,
    /// Overrides `round(L / λ_eg)` as the window centre.
    pub resonant_mode: Option<i64>,
    /// Measure detunings from the resonant mode (`Δ_n = 2π(n − n₀)`) instead
    /// of from `L / λ_eg` (`Δ_n = 2π(n − L/λ_eg)`).
    pub lock_resonance: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_modes: 1,
            cavity_length: REFERENCE_CAVITY_LENGTH,
            positions: SAME_LOCATION,
            coupling: DEFAULT_COUPLING,
            gamma: 0.0,
            kappa: 0.0,
            resonant_mode: None,
            lock_resonance: true,
        }
    }
}

impl SystemParams {
    pub fn with_modes(mut self, n_modes: u32) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_positions(mut self, positions: [f64; 3]) -> Self {
        self.positions = positions;
        self
    }

    pub fn with_losses(mut self, kappa: f64, gamma: f64) -> Self {
        self.kappa = kappa;
        self.gamma = gamma;
        self
    }

    /// Equal losses `κ = γ = |𝒢| / √𝒞` for a target cooperativity.
    pub fn with_cooperativity(self, cooperativity: f64) -> Self {
        let rate = loss_rate_for_cooperativity(self.coupling, cooperativity);
        self.with_losses(rate, rate)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_modes < 1 {
            problems.push("n_modes must be at least 1".to_string());
        }
        if !(self.cavity_length > 0.0 && self.cavity_length.is_finite()) {
            problems.push(format!(
                "cavity length must be positive, got {}",
                self.cavity_length
            ));
        }
        for (j, x) in self.positions.iter().enumerate() {
            if !(0.0..1.0).contains(x) {
                problems.push(format!(
                    "position of qubit {} must lie in [0, 1) (fraction of L), got {x}",
                    j + 1
                ));
            }
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            problems.push(format!("coupling must be positive, got {}", self.coupling));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            problems.push(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            problems.push(format!("kappa must be non-negative, got {}", self.kappa));
        }
        if problems.is_empty() {
            if let Err(e) = mode_window(self) {
                problems.push(e.to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(problems.join("; ")))
        }
    }

    pub fn resonant_mode(&self) -> i64 {
        self.resonant_mode
            .unwrap_or_else(|| self.cavity_length.round() as i64)
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma == 0.0 && self.kappa == 0.0
    }
}

/// Consecutive mode numbers kept in the simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeWindow {
    pub indices: Vec<i64>,
}

impl ModeWindow {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `N_m` consecutive modes centred on the resonant mode `n₀`. Even windows
/// take the extra mode below resonance.
pub fn mode_window(params: &SystemParams) -> Result<ModeWindow> {
    if params.n_modes < 1 {
        return Err(Error::InvalidParams("n_modes must be at least 1".into()));
    }
    let n0 = params.resonant_mode();
    let lo = n0 - (params.n_modes / 2) as i64;
    if lo < 1 {
        return Err(Error::InvalidParams(format!(
            "mode window starting at n = {lo} includes non-positive mode numbers"
        )));
    }
    Ok(ModeWindow {
        indices: (lo..lo + params.n_modes as i64).collect(),
    })
}

/// `Δ_n = ω_n − ω_eg` in units of `c/L`; positive when the mode is blue of
/// the qubit.
pub fn mode_detuning(params: &SystemParams, mode_index: i64) -> f64 {
    let origin = if params.lock_resonance {
        params.resonant_mode() as f64
    } else {
        params.cavity_length
    };
    2.0 * PI * (mode_index as f64 - origin)
}

/// `Δk_n = Δ_n / c` in units of `1/λ_eg`.
pub fn wavenumber_offset(params: &SystemParams, mode_index: i64) -> f64 {
    mode_detuning(params, mode_index) / params.cavity_length
}

/// Loss-shifted detuning `Δ̃_n = Δ_n − iκ/2`.
pub fn complex_detuning(params: &SystemParams, mode_index: i64) -> Complex64 {
    Complex64::new(mode_detuning(params, mode_index), -0.5 * params.kappa)
}

/// `𝒢_n(x_j) = |𝒢| e^{i k_n x_j}` with `k_n x_j = 2π n x_j / L`.
///
/// `qubit` is zero-based.
pub fn coupling(params: &SystemParams, mode_index: i64, qubit: usize) -> Complex64 {
    let x = params.positions[qubit];
    // reduce n·x modulo 1 before scaling so large mode numbers keep full phase precision
    let turns = (mode_index as f64 * x).rem_euclid(1.0);
    Complex64::from_polar(params.coupling, 2.0 * PI * turns)
}

/// `𝒞 = |𝒢|² / (κγ)`.
pub fn cooperativity(params: &SystemParams) -> Result<f64> {
    if params.kappa <= 0.0 || params.gamma <= 0.0 {
        return Err(Error::InvalidParams(
            "cooperativity is undefined unless kappa and gamma are both positive".into(),
        ));
    }
    Ok(params.coupling * params.coupling / (params.kappa * params.gamma))
}

pub fn loss_rate_for_cooperativity(coupling: f64, cooperativity: f64) -> f64 {
    coupling / cooperativity.sqrt()
}

/// Coupling table `𝒢[mode][qubit]` over the active window.
pub fn coupling_table(params: &SystemParams) -> Result<Vec<[Complex64; 3]>> {
    let window = mode_window(params)?;
    Ok(window
        .indices
        .iter()
        .map(|&n| [0, 1, 2].map(|j| coupling(params, n, j)))
        .collect())
}
