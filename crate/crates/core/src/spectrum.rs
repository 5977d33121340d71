//! Energy levels of identical-qubit registers and their Gibbs weights.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest register the crate will enumerate (7 qubit pairs).
pub const MAX_QUBITS: usize = 14;

/// Two-level spectrum of a single qubit, in eV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitLevels {
    pub ground: f64,
    pub excited: f64,
}

impl QubitLevels {
    pub fn new(ground: f64, excited: f64) -> Result<Self> {
        if !(ground.is_finite() && excited.is_finite()) || excited <= ground {
            return domain(format!(
                "excited level must lie above ground level, got E_g={ground}, E_e={excited}"
            ));
        }
        Ok(Self { ground, excited })
    }

    /// Level splitting `E_e - E_g`.
    pub fn gap(&self) -> f64 {
        self.excited - self.ground
    }

    /// Ground and excited occupations of the single-qubit Gibbs state.
    pub fn thermal_populations(&self, beta: f64) -> (f64, f64) {
        // Shift by E_g so the ground weight is exactly one.
        let w = (-beta * self.gap()).exp();
        let z = 1.0 + w;
        (1.0 / z, w / z)
    }

    /// Inverse temperature reproducing a given excited/ground occupation ratio.
    pub fn beta_from_ratio(&self, excited_over_ground: f64) -> Result<f64> {
        if !(excited_over_ground > 0.0 && excited_over_ground <= 1.0) {
            return domain(format!(
                "occupation ratio {excited_over_ground} does not correspond to a non-negative temperature"
            ));
        }
        Ok(-excited_over_ground.ln() / self.gap())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub index: usize,
    pub energy: f64,
    /// Occupation string such as `"geg"`, one character per qubit.
    pub label: String,
}

/// Product basis of an n-qubit register, in lexicographic label order with `g < e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySpectrum {
    qubit: QubitLevels,
    n_qubits: usize,
    levels: Vec<Level>,
}

impl EnergySpectrum {
    pub fn new(qubit: QubitLevels, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return domain("a register needs at least one qubit");
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::Resource(format!(
                "{n_qubits} qubits exceeds the cap of {MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n_qubits;
        let levels = (0..dim)
            .map(|index| {
                let excitations = index.count_ones() as f64;
                let grounds = n_qubits as f64 - excitations;
                let label = (0..n_qubits)
                    .map(|q| if index >> (n_qubits - 1 - q) & 1 == 1 { 'e' } else { 'g' })
                    .collect();
                Level {
                    index,
                    energy: grounds * qubit.ground + excitations * qubit.excited,
                    label,
                }
            })
            .collect();
        Ok(Self { qubit, n_qubits, levels })
    }

    pub fn qubit(&self) -> QubitLevels {
        self.qubit
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// Number of excited qubits in a basis state.
    pub fn excitations(&self, index: usize) -> usize {
        index.count_ones() as usize
    }

    /// Level indices sorted by energy, ties kept in label order, so
    /// degenerate levels are contiguous.
    pub fn levels_by_energy(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by_key(|&i| self.excitations(i));
        idx
    }

    /// Degenerate subspaces, lowest energy first. Each group lists level
    /// indices in label order.
    pub fn degenerate_groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_qubits + 1];
        for i in 0..self.dim() {
            groups[self.excitations(i)].push(i);
        }
        groups
    }

    /// Spectrum of the register obtained by appending `other`'s qubits.
    pub fn join(&self, other: &EnergySpectrum) -> Result<EnergySpectrum> {
        if self.qubit != other.qubit {
            return domain("cannot compose registers built on different qubit spectra");
        }
        EnergySpectrum::new(self.qubit, self.n_qubits + other.n_qubits)
    }
}

/// Unnormalized Boltzmann weights `e^{-βE_i}` and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsWeights {
    pub beta: f64,
    pub weights: Vec<f64>,
    pub partition_function: f64,
}

impl GibbsWeights {
    pub fn normalized(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.partition_function).collect()
    }
}

pub fn gibbs_weights(spec: &EnergySpectrum, beta: f64) -> Result<GibbsWeights> {
    if !(beta >= 0.0) || beta.is_infinite() {
        return domain(format!("inverse temperature must be finite and >= 0, got {beta}"));
    }
    let weights: Vec<f64> = spec.levels.iter().map(|l| (-beta * l.energy).exp()).collect();
    let partition_function = weights.iter().sum();
    Ok(GibbsWeights { beta, weights, partition_function })
}
