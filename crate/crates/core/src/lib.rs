//! Thermo-majorization tools for the quantum Mpemba effect in correlated
//! qubit registers coupled to a thermal bath.
//!
//! States are density matrices over n identical qubits with a shared bath
//! inverse temperature β_b. The central question is how hot a product state
//! a correlated register can be turned into by thermal operations
//! ([`mpemba::max_product_temperature`]) or by Markovian relaxation
//! ([`markovian::max_product_temperature_markovian`]).

pub mod coherence;
pub mod error;
pub mod export;
pub mod majorization;
pub mod markovian;
pub mod matrix;
pub mod mpemba;
pub mod register;
pub mod roots;
pub mod spectrum;
pub mod states;
pub mod temperature;

pub use coherence::{mode_decompose, mode_report, ModeDecomposition, ModeEntry};
pub use error::{Error, Result};
pub use majorization::{
    beta_order, block_diagonalize_zero_mode, build_curve, curve_height_at, thermo_majorizes, Majorization,
    PopulationVector, ThermoCurve,
};
pub use markovian::{
    apply_step, continuously_thermo_majorizes, max_product_temperature_markovian, relax_trajectory,
    ContinuousDecision, ElementaryStep, Leg, MarkovCertificate, MarkovConfig,
};
pub use matrix::DensityMatrix;
pub use mpemba::{
    free_energy, max_product_temperature, scan_dimensionality, scan_scaling, Method, MpembaResult, ScanConfig,
    ScanRow,
};
pub use register::{Layout, Register, RegisterKind};
pub use spectrum::{gibbs_weights, EnergySpectrum, GibbsWeights, QubitLevels};
pub use states::{build_pair, compose_register, thermal_qubit, CorrelationSpec, PairCorrelation, Strength};
pub use temperature::Temperature;
