//! Locally thermal qubit-pair states and their composition into registers.
//!
//! Every builder returns a state whose single-qubit reduced states are the
//! Gibbs state at the requested β; only the correlations differ.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::matrix::DensityMatrix;
use crate::spectrum::{EnergySpectrum, QubitLevels};

/// Two-qubit correlation patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCorrelation {
    /// ρ_β ⊗ ρ_β.
    Product,
    /// P_g|gg⟩⟨gg| + P_e|ee⟩⟨ee|.
    Classical,
    /// Classical plus μ(|gg⟩⟨ee| + h.c.).
    Entangled,
    /// Product plus λ(|ge⟩⟨eg| + h.c.).
    Discord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    /// Largest value keeping the state positive semidefinite.
    Max,
    Value(f64),
}

impl FromStr for Strength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("max") {
            return Ok(Strength::Max);
        }
        s.parse::<f64>()
            .map(Strength::Value)
            .map_err(|_| Error::Domain(format!("strength must be a number or 'max', got '{s}'")))
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strength::Max => f.write_str("max"),
            Strength::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub kind: PairCorrelation,
    pub strength: Strength,
}

impl CorrelationSpec {
    pub fn product() -> Self {
        Self { kind: PairCorrelation::Product, strength: Strength::Value(0.0) }
    }

    pub fn classical() -> Self {
        Self { kind: PairCorrelation::Classical, strength: Strength::Value(0.0) }
    }

    pub fn entangled(strength: Strength) -> Self {
        Self { kind: PairCorrelation::Entangled, strength }
    }

    pub fn discord(strength: Strength) -> Self {
        Self { kind: PairCorrelation::Discord, strength }
    }

    /// Positivity ceiling of the coherence for this kind at β, or `None` for
    /// the diagonal kinds.
    pub fn positivity_bound(&self, qubit: QubitLevels, beta: f64) -> Option<f64> {
        let (pg, pe) = qubit.thermal_populations(beta);
        match self.kind {
            PairCorrelation::Entangled => Some((pg * pe).sqrt()),
            PairCorrelation::Discord => Some(pg * pe),
            _ => None,
        }
    }

    /// Concrete coherence value, validated against the positivity bound.
    pub fn resolve(&self, qubit: QubitLevels, beta: f64) -> Result<f64> {
        let Some(bound) = self.positivity_bound(qubit, beta) else {
            return Ok(0.0);
        };
        match self.strength {
            Strength::Max => Ok(bound),
            Strength::Value(v) => {
                if !v.is_finite() || v.abs() > bound {
                    let name = match self.kind {
                        PairCorrelation::Entangled => "mu_max = sqrt(P_g P_e)",
                        _ => "lambda_max = P_g P_e",
                    };
                    return domain(format!(
                        "correlation strength {v} exceeds the positivity bound {name} = {bound}"
                    ));
                }
                Ok(v)
            }
        }
    }
}

fn pair_spectrum(qubit: QubitLevels) -> EnergySpectrum {
    EnergySpectrum::new(qubit, 2).expect("two qubits are always within caps")
}

/// Single-qubit Gibbs state.
pub fn thermal_qubit(qubit: QubitLevels, beta: f64) -> Result<DensityMatrix> {
    let (pg, pe) = qubit.thermal_populations(beta);
    DensityMatrix::from_diagonal(&[pg, pe], EnergySpectrum::new(qubit, 1)?)
}

/// Builds a locally thermal two-qubit state in the basis (gg, ge, eg, ee).
pub fn build_pair(qubit: QubitLevels, beta: f64, corr: CorrelationSpec) -> Result<DensityMatrix> {
    if !(beta >= 0.0) || beta.is_infinite() {
        return domain(format!("inverse temperature must be finite and >= 0, got {beta}"));
    }
    let (pg, pe) = qubit.thermal_populations(beta);
    let coherence = corr.resolve(qubit, beta)?;
    let mut m = Array2::<Complex64>::zeros((4, 4));
    let set = |m: &mut Array2<Complex64>, i: usize, j: usize, v: f64| {
        m[[i, j]] = Complex64::new(v, 0.0);
    };
    match corr.kind {
        PairCorrelation::Product | PairCorrelation::Discord => {
            set(&mut m, 0, 0, pg * pg);
            set(&mut m, 1, 1, pg * pe);
            set(&mut m, 2, 2, pe * pg);
            set(&mut m, 3, 3, pe * pe);
            if corr.kind == PairCorrelation::Discord {
                set(&mut m, 1, 2, coherence);
                set(&mut m, 2, 1, coherence);
            }
        }
        PairCorrelation::Classical | PairCorrelation::Entangled => {
            set(&mut m, 0, 0, pg);
            set(&mut m, 3, 3, pe);
            if corr.kind == PairCorrelation::Entangled {
                set(&mut m, 0, 3, coherence);
                set(&mut m, 3, 0, coherence);
            }
        }
    }
    let state = DensityMatrix::new(m, pair_spectrum(qubit))?;
    if coherence != 0.0 {
        state.check_positive()?;
    }
    Ok(state)
}

/// P_g|g…g⟩⟨g…g| + P_e|e…e⟩⟨e…e| over `n_qubits` qubits.
pub fn multipartite_classical(qubit: QubitLevels, beta: f64, n_qubits: usize) -> Result<DensityMatrix> {
    let spectrum = EnergySpectrum::new(qubit, n_qubits)?;
    let populations = multipartite_classical_populations(qubit, beta, n_qubits);
    DensityMatrix::from_diagonal(&populations, spectrum)
}

pub(crate) fn multipartite_classical_populations(qubit: QubitLevels, beta: f64, n_qubits: usize) -> Vec<f64> {
    let (pg, pe) = qubit.thermal_populations(beta);
    let dim = 1usize << n_qubits;
    let mut p = vec![0.0; dim];
    p[0] = pg;
    p[dim - 1] += pe;
    p
}

/// Tensor product of states over the same qubit spectrum, in the given order.
pub fn compose_register(parts: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Domain("cannot compose an empty register".into()))?;
    rest.iter().try_fold(first.clone(), |acc, part| acc.kron(part))
}
