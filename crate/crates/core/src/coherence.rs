//! Splitting a density matrix into ω-modes of coherence.
//!
//! Mode ω collects the entries `ρ_nm` with `E_n - E_m = ω`. Populations and
//! coherences inside degenerate subspaces form the zero mode.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::DensityMatrix;

/// Bohr frequencies closer than this (in eV) share a mode.
pub const OMEGA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub omega: f64,
    /// `(row, col, value)` for every matrix entry in this mode.
    pub entries: Vec<(usize, usize, Complex64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    dim: usize,
    /// Sorted by increasing ω.
    modes: Vec<Mode>,
}

impl ModeDecomposition {
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, omega: f64) -> Option<&Mode> {
        self.modes.iter().find(|m| (m.omega - omega).abs() <= OMEGA_TOL)
    }

    /// Modes holding at least one nonzero entry.
    pub fn nonzero_modes(&self) -> impl Iterator<Item = &Mode> {
        self.modes
            .iter()
            .filter(|m| m.entries.iter().any(|(_, _, v)| *v != Complex64::new(0.0, 0.0)))
    }

    /// Entrywise sum of all modes.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for mode in &self.modes {
            for &(r, c, v) in &mode.entries {
                out[[r, c]] += v;
            }
        }
        out
    }

    /// One mode as a dense matrix.
    pub fn dense(&self, mode: &Mode) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &mode.entries {
            out[[r, c]] = v;
        }
        out
    }
}

/// Partitions every entry of `m` by the energy difference of its row and column.
pub fn mode_decompose(m: &DensityMatrix) -> ModeDecomposition {
    let energies = m.spectrum().energies();
    let dim = m.dim();
    let mut modes: Vec<Mode> = Vec::new();
    for r in 0..dim {
        for c in 0..dim {
            let omega = energies[r] - energies[c];
            let slot = match modes.iter().position(|md| (md.omega - omega).abs() <= OMEGA_TOL) {
                Some(k) => k,
                None => {
                    modes.push(Mode { omega, entries: Vec::new() });
                    modes.len() - 1
                }
            };
            modes[slot].entries.push((r, c, m.get(r, c)));
        }
    }
    modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    ModeDecomposition { dim, modes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub row: String,
    pub col: String,
    #[serde(rename = "omega_eV")]
    pub omega_ev: f64,
    pub order: usize,
}

/// Coherence order `|E_row - E_col| / (E_e - E_g)` of every matrix entry.
pub fn mode_report(m: &DensityMatrix) -> Vec<ModeEntry> {
    let spectrum = m.spectrum();
    let gap = spectrum.qubit().gap();
    let levels = spectrum.levels();
    let mut out = Vec::with_capacity(levels.len() * levels.len());
    for row in levels {
        for col in levels {
            let omega = row.energy - col.energy;
            out.push(ModeEntry {
                row: row.label.clone(),
                col: col.label.clone(),
                omega_ev: omega,
                order: (omega.abs() / gap).round() as usize,
            });
        }
    }
    out
}
