//! Multi-pair registers described factor by factor.
//!
//! Registers of up to seven qubit pairs are too large to hold as dense
//! matrices, so a register keeps one small state per factor and composes
//! populations directly. Each factor's zero-mode coherences are converted to
//! populations before composition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::majorization::{zero_mode_populations, PopulationVector};
use crate::matrix::DensityMatrix;
use crate::spectrum::{EnergySpectrum, QubitLevels, MAX_QUBITS};
use crate::states::{build_pair, multipartite_classical, multipartite_classical_populations, CorrelationSpec, PairCorrelation, Strength};

/// Correlation patterns available for whole registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegisterKind {
    Product,
    Classical,
    Entangled,
    Discord,
    /// P_g|g…g⟩⟨g…g| + P_e|e…e⟩⟨e…e| across several qubits.
    MultiClassical,
    /// Classical pairs alternating with discord pairs.
    Mixed,
}

impl RegisterKind {
    pub const ALL: [RegisterKind; 6] = [
        RegisterKind::Product,
        RegisterKind::Classical,
        RegisterKind::Entangled,
        RegisterKind::Discord,
        RegisterKind::MultiClassical,
        RegisterKind::Mixed,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            RegisterKind::Product => "p",
            RegisterKind::Classical => "cc",
            RegisterKind::Entangled => "qce",
            RegisterKind::Discord => "qcd",
            RegisterKind::MultiClassical => "multi-cc",
            RegisterKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for RegisterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for RegisterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegisterKind::ALL
            .into_iter()
            .find(|k| k.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown correlation kind '{s}' (expected p, cc, qce, qcd, multi-cc or mixed)")))
    }
}

/// How correlated pairs are arranged across a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Every pair carries the correlation.
    Scaling,
    /// One correlated block, the remaining pairs in product form.
    Dimensionality,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scaling" | "homo" => Ok(Layout::Scaling),
            "dimensionality" | "hetero" => Ok(Layout::Dimensionality),
            _ => domain(format!("unknown layout '{s}' (expected scaling or dimensionality)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Factor {
    Dense(DensityMatrix),
    /// Diagonal state over `n_qubits` qubits.
    Diagonal { n_qubits: usize, populations: Vec<f64> },
}

impl Factor {
    fn n_qubits(&self) -> usize {
        match self {
            Factor::Dense(m) => m.spectrum().n_qubits(),
            Factor::Diagonal { n_qubits, .. } => *n_qubits,
        }
    }

    fn zero_mode_populations(&self) -> Vec<f64> {
        match self {
            Factor::Dense(m) => zero_mode_populations(m.entries(), m.spectrum()),
            Factor::Diagonal { populations, .. } => populations.clone(),
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            Factor::Dense(m) => m.diagonal(),
            Factor::Diagonal { populations, .. } => populations.clone(),
        }
    }
}

/// A locally thermal register: qubit spectrum, local β and an ordered list of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    qubit: QubitLevels,
    local_beta: f64,
    factors: Vec<Factor>,
}

impl Register {
    pub fn new(qubit: QubitLevels, local_beta: f64) -> Self {
        Self { qubit, local_beta, factors: Vec::new() }
    }

    pub fn qubit(&self) -> QubitLevels {
        self.qubit
    }

    pub fn local_beta(&self) -> f64 {
        self.local_beta
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.iter().map(Factor::n_qubits).sum()
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    fn ensure_room(&self, extra: usize) -> Result<()> {
        let n = self.n_qubits() + extra;
        if n > MAX_QUBITS {
            return Err(Error::Resource(format!("register of {n} qubits exceeds the cap of {MAX_QUBITS}")));
        }
        Ok(())
    }

    /// Appends an arbitrary state built on the same qubit spectrum.
    pub fn push_state(&mut self, state: DensityMatrix) -> Result<&mut Self> {
        if state.spectrum().qubit() != self.qubit {
            return domain("factor built on a different qubit spectrum");
        }
        self.ensure_room(state.spectrum().n_qubits())?;
        self.factors.push(Factor::Dense(state));
        Ok(self)
    }

    pub fn push_pair(&mut self, corr: CorrelationSpec) -> Result<&mut Self> {
        let pair = build_pair(self.qubit, self.local_beta, corr)?;
        self.push_state(pair)
    }

    pub fn push_multipartite_classical(&mut self, n_qubits: usize) -> Result<&mut Self> {
        if n_qubits == 0 {
            return domain("a classical block needs at least one qubit");
        }
        self.ensure_room(n_qubits)?;
        let populations = multipartite_classical_populations(self.qubit, self.local_beta, n_qubits);
        self.factors.push(Factor::Diagonal { n_qubits, populations });
        Ok(self)
    }

    /// Register of `n_pairs` qubit pairs of the given kind and layout.
    pub fn build(
        qubit: QubitLevels,
        local_beta: f64,
        kind: RegisterKind,
        strength: Strength,
        n_pairs: usize,
        layout: Layout,
    ) -> Result<Register> {
        if n_pairs == 0 {
            return domain("a register needs at least one qubit pair");
        }
        let mut reg = Register::new(qubit, local_beta);
        reg.ensure_room(2 * n_pairs)?;
        let pair_of = |k: PairCorrelation| CorrelationSpec { kind: k, strength };
        let product = CorrelationSpec::product();
        match (kind, layout) {
            (RegisterKind::Product, _) => {
                for _ in 0..n_pairs {
                    reg.push_pair(product)?;
                }
            }
            (RegisterKind::Classical | RegisterKind::Entangled | RegisterKind::Discord, layout) => {
                let corr = pair_of(match kind {
                    RegisterKind::Classical => PairCorrelation::Classical,
                    RegisterKind::Entangled => PairCorrelation::Entangled,
                    _ => PairCorrelation::Discord,
                });
                for k in 0..n_pairs {
                    let correlated = layout == Layout::Scaling || k == 0;
                    reg.push_pair(if correlated { corr } else { product })?;
                }
            }
            (RegisterKind::MultiClassical, Layout::Scaling) => {
                reg.push_multipartite_classical(2 * n_pairs)?;
            }
            (RegisterKind::MultiClassical, Layout::Dimensionality) => {
                let block = n_pairs.min(2);
                reg.push_multipartite_classical(2 * block)?;
                for _ in block..n_pairs {
                    reg.push_pair(product)?;
                }
            }
            (RegisterKind::Mixed, layout) => {
                let correlated = match layout {
                    Layout::Scaling => n_pairs,
                    Layout::Dimensionality => n_pairs.min(2),
                };
                for k in 0..n_pairs {
                    let corr = if k >= correlated {
                        product
                    } else if k % 2 == 0 {
                        CorrelationSpec::classical()
                    } else {
                        pair_of(PairCorrelation::Discord)
                    };
                    reg.push_pair(corr)?;
                }
            }
        }
        Ok(reg)
    }

    pub fn spectrum(&self) -> Result<EnergySpectrum> {
        EnergySpectrum::new(self.qubit, self.n_qubits())
    }

    fn compose(&self, parts: impl Iterator<Item = Vec<f64>>) -> Vec<f64> {
        parts.fold(vec![1.0], |acc, f| {
            let mut out = Vec::with_capacity(acc.len() * f.len());
            for a in &acc {
                out.extend(f.iter().map(|b| a * b));
            }
            out
        })
    }

    /// Populations after converting each factor's zero-mode coherences into
    /// populations; what thermal operations can act on.
    pub fn zero_mode_populations(&self, bath_beta: f64) -> Result<PopulationVector> {
        self.vector(self.compose(self.factors.iter().map(Factor::zero_mode_populations)), bath_beta)
    }

    /// Diagonal of the register, coherences discarded.
    pub fn diagonal_populations(&self, bath_beta: f64) -> Result<PopulationVector> {
        self.vector(self.compose(self.factors.iter().map(Factor::diagonal)), bath_beta)
    }

    fn vector(&self, populations: Vec<f64>, bath_beta: f64) -> Result<PopulationVector> {
        if self.factors.is_empty() {
            return domain("register is empty");
        }
        PopulationVector::new(populations, self.spectrum()?.energies(), bath_beta)
    }

    /// Dense density matrix of the whole register (dimension ≤ 1024).
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        let dense: Vec<DensityMatrix> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Dense(m) => Ok(m.clone()),
                Factor::Diagonal { n_qubits, .. } => {
                    multipartite_classical(self.qubit, self.local_beta, *n_qubits)
                }
            })
            .collect::<Result<_>>()?;
        crate::states::compose_register(&dense)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorization::block_diagonalize_zero_mode;
    use crate::temperature::Temperature;

    fn qubit() -> QubitLevels {
        QubitLevels::new(0.0, 0.05).unwrap()
    }

    fn b(c: f64) -> f64 {
        Temperature::celsius(c).to_beta().unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in RegisterKind::ALL {
            assert_eq!(k.short_name().parse::<RegisterKind>().unwrap(), k);
        }
        assert!("qc".parse::<RegisterKind>().is_err());
    }

    #[test]
    fn factor_route_matches_dense_route() {
        for kind in RegisterKind::ALL {
            for layout in [Layout::Scaling, Layout::Dimensionality] {
                let coherent = matches!(kind, RegisterKind::Entangled | RegisterKind::Discord);
                if coherent && layout == Layout::Scaling {
                    continue; // cross-pair μ² coherences, see entangled_register_zero_mode
                }
                for n in 1..=3 {
                    let reg = Register::build(qubit(), b(60.0), kind, Strength::Max, n, layout).unwrap();
                    let dense = reg.to_density_matrix().unwrap();
                    let full = block_diagonalize_zero_mode(&dense, b(0.0)).unwrap();
                    let fac = reg.zero_mode_populations(b(0.0)).unwrap();
                    // same values per degenerate block; placement inside a block may differ
                    for group in reg.spectrum().unwrap().degenerate_groups() {
                        let sorted = |p: &[f64]| {
                            let mut v: Vec<f64> = group.iter().map(|&i| p[i]).collect();
                            v.sort_by(f64::total_cmp);
                            v
                        };
                        for (x, y) in sorted(full.populations()).iter().zip(sorted(fac.populations())) {
                            assert!((x - y).abs() < 1e-12, "{kind} {layout:?} n={n}");
                        }
                    }
                    assert_eq!(reg.diagonal_populations(b(0.0)).unwrap().populations(), dense.diagonal());
                }
            }
        }
    }

    #[test]
    fn entangled_register_zero_mode() {
        // Two ρ_E pairs: |gg,ee⟩ and |ee,gg⟩ are degenerate and coupled by μ².
        let reg = Register::build(qubit(), b(60.0), RegisterKind::Entangled, Strength::Max, 2, Layout::Scaling).unwrap();
        let dense = reg.to_density_matrix().unwrap();
        let mu2 = dense.get(0b0011, 0b1100).re;
        let (pg, pe) = qubit().thermal_populations(b(60.0));
        assert!((mu2 - pg * pe).abs() < 1e-15);
        let factor = reg.zero_mode_populations(b(0.0)).unwrap();
        let classical = Register::build(qubit(), b(60.0), RegisterKind::Classical, Strength::Max, 2, Layout::Scaling).unwrap();
        assert_eq!(factor.populations(), classical.zero_mode_populations(b(0.0)).unwrap().populations());
    }

    #[test]
    fn layouts_place_correlations() {
        let reg = Register::build(qubit(), b(60.0), RegisterKind::Classical, Strength::Max, 3, Layout::Dimensionality).unwrap();
        assert_eq!(reg.n_qubits(), 6);
        let p = reg.diagonal_populations(b(0.0)).unwrap();
        // first pair classical: |ge....⟩ has zero population
        assert_eq!(p.populations()[0b010000], 0.0);
        assert!(p.populations()[0b000100] > 0.0);

        let multi = Register::build(qubit(), b(60.0), RegisterKind::MultiClassical, Strength::Max, 3, Layout::Scaling).unwrap();
        assert_eq!(multi.n_factors(), 1);
        let p = multi.diagonal_populations(b(0.0)).unwrap();
        assert_eq!(p.populations().iter().filter(|x| **x > 0.0).count(), 2);
    }

    #[test]
    fn caps_enforced() {
        assert!(Register::build(qubit(), b(60.0), RegisterKind::Classical, Strength::Max, 7, Layout::Scaling).is_ok());
        let err = Register::build(qubit(), b(60.0), RegisterKind::Classical, Strength::Max, 8, Layout::Scaling).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert!(Register::build(qubit(), b(60.0), RegisterKind::Classical, Strength::Max, 0, Layout::Scaling).is_err());
        let big = Register::build(qubit(), b(60.0), RegisterKind::Product, Strength::Max, 6, Layout::Scaling).unwrap();
        assert!(matches!(big.to_density_matrix(), Err(Error::Resource(_))));
    }
}
