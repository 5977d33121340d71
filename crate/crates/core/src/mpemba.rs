//! Hottest product state a given state can thermo-majorize.
//!
//! For a bath colder than both systems, the β-order of a product state
//! `ρ_β^{⊗n}` is fixed (highest energy first), so the x-coordinates of its
//! curve do not depend on β and each vertex height falls monotonically as β
//! grows. The search evaluates the target state's curve at those fixed
//! x-coordinates once, finds the β at which a product vertex touches it, and
//! moves on to the most violated vertex until the product curve lies below
//! everywhere.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::majorization::{
    block_diagonalize_zero_mode, build_curve, height_unchecked, thermo_majorizes, PopulationVector,
};
use crate::matrix::DensityMatrix;
use crate::register::{Layout, Register, RegisterKind};
use crate::roots::{bisect_threshold, solve_decreasing};
use crate::spectrum::{EnergySpectrum, QubitLevels};
use crate::states::Strength;
use crate::temperature::Temperature;

/// Results within this many degrees of the local temperature count as no effect.
pub const NO_MPEMBA_MARGIN_C: f64 = 1e-3;
/// Step above the maximum at which the certificate must fail.
pub const CERTIFICATE_STEP_C: f64 = 0.1;
/// Lower end of the β bracket, as a fraction of the bath β.
pub const BETA_FLOOR_FRACTION: f64 = 1e-6;
/// Tolerance of the touching-point equations, in units of β·ΔE.
pub const TOUCH_TOL: f64 = 1e-12;
/// Agreement required between the vertex search and plain bisection, in β·ΔE.
pub const REFINE_TOL: f64 = 1e-6;
/// Pair counts allowed in scans.
pub const DEFAULT_MAX_PAIRS: usize = 5;
pub const HARD_MAX_PAIRS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NonMarkovian,
    Markovian,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::NonMarkovian => "non-markovian",
            Method::Markovian => "markovian",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "to" | "non-markovian" | "thermal" => Ok(Method::NonMarkovian),
            "markov" | "markovian" => Ok(Method::Markovian),
            _ => domain(format!("unknown method '{s}' (expected to or markov)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpembaResult {
    /// Hottest product temperature reached, even when it is not above the
    /// local temperature.
    pub max_temperature: Temperature,
    pub local_temperature: Temperature,
    pub bath_temperature: Temperature,
    /// Index (1-based, along the product curve) of the vertex in contact.
    pub binding_vertex: Option<usize>,
    pub method: Method,
    /// Whether the boundary passed the independent checks.
    pub certified: bool,
    pub diagnostic: Option<String>,
    /// Thermalization sequence reaching the maximum (Markovian method only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov_certificate: Option<crate::markovian::MarkovCertificate>,
}

impl MpembaResult {
    pub fn max_celsius(&self) -> f64 {
        self.max_temperature.to_celsius().unwrap_or(f64::INFINITY)
    }

    pub fn local_celsius(&self) -> f64 {
        self.local_temperature.to_celsius().unwrap_or(f64::INFINITY)
    }

    /// True when the state majorizes product states hotter than itself.
    pub fn is_mpemba(&self) -> bool {
        self.max_celsius() > self.local_celsius() + NO_MPEMBA_MARGIN_C
    }

    /// `"136.70"`, or `"none"` without an effect.
    pub fn max_label(&self) -> String {
        if self.is_mpemba() {
            format!("{:.2}", self.max_celsius())
        } else {
            "none".to_string()
        }
    }
}

/// Product-state populations over `n_qubits` at inverse temperature `beta`.
pub fn product_populations(qubit: QubitLevels, n_qubits: usize, beta: f64, bath_beta: f64) -> Result<PopulationVector> {
    PopulationVector::thermal(&EnergySpectrum::new(qubit, n_qubits)?, beta, bath_beta)
}

/// Fixed x-vertices of hot product curves and their height as a function of β.
struct ProductCurve {
    qubit: QubitLevels,
    n_qubits: usize,
    /// Excitation count of each level in curve order (highest energy first).
    excitations: Vec<usize>,
    xs: Vec<f64>,
}

impl ProductCurve {
    fn new(spectrum: &EnergySpectrum, bath_beta: f64) -> Self {
        // highest energy first, label order inside degenerate blocks
        let n = spectrum.n_qubits();
        let grouped: Vec<usize> = spectrum.degenerate_groups().into_iter().rev().flatten().collect();
        let levels = spectrum.levels();
        let mut x = 0.0;
        let xs = grouped
            .iter()
            .map(|&i| {
                x += (-bath_beta * levels[i].energy).exp();
                x
            })
            .collect();
        let excitations = grouped.iter().map(|&i| spectrum.excitations(i)).collect();
        Self { qubit: spectrum.qubit(), n_qubits: n, excitations, xs }
    }

    fn level_populations(&self, beta: f64) -> Vec<f64> {
        let (pg, pe) = self.qubit.thermal_populations(beta);
        (0..=self.n_qubits)
            .map(|m| pe.powi(m as i32) * pg.powi((self.n_qubits - m) as i32))
            .collect()
    }

    /// Heights of all vertices at β.
    fn heights(&self, beta: f64) -> Vec<f64> {
        let q = self.level_populations(beta);
        let mut y = 0.0;
        self.excitations
            .iter()
            .map(|&m| {
                y += q[m];
                y
            })
            .collect()
    }

    /// Height of vertex `k` (0-based) at β.
    fn height(&self, k: usize, beta: f64) -> f64 {
        let q = self.level_populations(beta);
        self.excitations[..=k].iter().map(|&m| q[m]).sum()
    }
}

/// Outcome of the vertex search: the smallest admissible β and the vertex in contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchingPoint {
    pub beta: f64,
    pub vertex: usize,
    pub iterations: usize,
}

/// Smallest β in `[floor, bath]` for which the product curve lies below the
/// curve of `p`, found by walking touching points.
pub fn touching_point_search(p: &PopulationVector, qubit: QubitLevels) -> Result<TouchingPoint> {
    let n_qubits = n_qubits_of(p)?;
    let spectrum = EnergySpectrum::new(qubit, n_qubits)?;
    check_energies(p, &spectrum)?;
    let bath_beta = p.bath_beta();
    if bath_beta <= 0.0 {
        return domain("bath must be at a finite temperature");
    }
    let product = ProductCurve::new(&spectrum, bath_beta);
    let state_curve = build_curve(p, false);
    let ys: Vec<f64> = product.xs.iter().map(|&x| height_unchecked(&state_curve.vertices, x)).collect();

    let floor = bath_beta * BETA_FLOOR_FRACTION;
    let tol = TOUCH_TOL / qubit.gap();
    let touch = |k: usize| solve_decreasing(floor, bath_beta, ys[k], tol, |b| product.height(k, b));

    let mut vertex = 0;
    let mut beta = touch(vertex);
    let mut iterations = 1;
    loop {
        let candidate = product_populations(qubit, n_qubits, beta, bath_beta)?;
        if thermo_majorizes(p, &candidate)?.holds {
            break;
        }
        // difference vector d = heights(P_i) - y, most violated vertex next
        let h = product.heights(beta);
        let (next, excess) = h
            .iter()
            .zip(&ys)
            .map(|(a, b)| a - b)
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty curve");
        let next_beta = touch(next);
        if excess <= 0.0 || next_beta <= beta {
            // The curves agree to within rounding; nudge upward past the tolerance.
            beta = (beta + tol).min(bath_beta);
            if beta >= bath_beta {
                break;
            }
        } else {
            beta = next_beta;
            vertex = next;
        }
        iterations += 1;
        if iterations > 4 * product.xs.len() + 8 {
            return Err(Error::Domain("touching-point search did not settle".into()));
        }
    }
    Ok(TouchingPoint { beta, vertex: vertex + 1, iterations })
}

/// Plain bisection on β with the thermo-majorization test as oracle.
pub fn bisection_max_product_beta(p: &PopulationVector, qubit: QubitLevels, tol: f64) -> Result<f64> {
    let n_qubits = n_qubits_of(p)?;
    let bath_beta = p.bath_beta();
    let floor = bath_beta * BETA_FLOOR_FRACTION;
    let holds = |b: f64| {
        product_populations(qubit, n_qubits, b, bath_beta)
            .and_then(|q| thermo_majorizes(p, &q))
            .map(|m| m.holds)
            .unwrap_or(false)
    };
    if holds(floor) {
        return Ok(floor);
    }
    let (_, b) = bisect_threshold(floor, bath_beta, tol, holds);
    Ok(b)
}

/// Checks that `p` majorizes the product state at `celsius` but not 0.1 °C hotter.
pub fn certify_boundary(p: &PopulationVector, qubit: QubitLevels, celsius: f64) -> Result<bool> {
    let n_qubits = n_qubits_of(p)?;
    let bath_beta = p.bath_beta();
    let at = Temperature::celsius(celsius).to_beta()?;
    let above = Temperature::celsius(celsius + CERTIFICATE_STEP_C).to_beta()?;
    let holds_at = thermo_majorizes(p, &product_populations(qubit, n_qubits, at.min(bath_beta), bath_beta)?)?.holds;
    let fails_above = !thermo_majorizes(p, &product_populations(qubit, n_qubits, above, bath_beta)?)?.holds;
    Ok(holds_at && fails_above)
}

/// Maximum product temperature for a population vector whose coherences
/// have already been handled. `local_beta` is the state's own local β.
pub fn max_product_temperature_populations(
    p: &PopulationVector,
    qubit: QubitLevels,
    local_beta: f64,
) -> Result<MpembaResult> {
    let bath_beta = p.bath_beta();
    if !(local_beta < bath_beta) {
        return domain(format!(
            "state (β = {local_beta}) must be hotter than the bath (β = {bath_beta})"
        ));
    }
    let touch = touching_point_search(p, qubit)?;
    let refined = bisection_max_product_beta(p, qubit, REFINE_TOL / qubit.gap() * 1e-3)?;
    let agree = ((touch.beta - refined) * qubit.gap()).abs() < REFINE_TOL;
    let max_temperature = Temperature::beta(touch.beta);
    let max_c = max_temperature.to_celsius()?;
    let certified = agree && certify_boundary(p, qubit, max_c)?;

    let mut result = MpembaResult {
        max_temperature,
        local_temperature: Temperature::beta(local_beta),
        bath_temperature: Temperature::beta(bath_beta),
        binding_vertex: Some(touch.vertex),
        method: Method::NonMarkovian,
        certified,
        diagnostic: None,
        markov_certificate: None,
    };
    if touch.beta <= bath_beta * BETA_FLOOR_FRACTION {
        result.diagnostic = Some("majorizes product states up to the search ceiling".into());
    } else if !result.is_mpemba() {
        result.diagnostic = Some(format!(
            "no Mpemba effect: hottest majorized product state is {max_c:.4} °C, not above the local {:.4} °C",
            result.local_celsius()
        ));
    }
    Ok(result)
}

/// Maximum product temperature `T*` with `state ≻_th ρ_P(T*)^{⊗n}` for a bath at `bath`.
///
/// Zero-mode coherences are first rotated into populations
/// ([`block_diagonalize_zero_mode`]); the local temperature is read off the
/// state's single-qubit marginals.
pub fn max_product_temperature(state: &DensityMatrix, bath: Temperature) -> Result<MpembaResult> {
    let bath_beta = bath.to_beta()?;
    let local_beta = local_beta_of(state)?;
    let p = block_diagonalize_zero_mode(state, bath_beta)?;
    max_product_temperature_populations(&p, state.spectrum().qubit(), local_beta)
}

/// Same as [`max_product_temperature`] for a factored register.
pub fn max_product_temperature_register(reg: &Register, bath: Temperature) -> Result<MpembaResult> {
    let bath_beta = bath.to_beta()?;
    let p = reg.zero_mode_populations(bath_beta)?;
    max_product_temperature_populations(&p, reg.qubit(), reg.local_beta())
}

/// Re-checks a result against its register: the reported maximum must be
/// majorized by the state (thermal operations) or reached by replaying the
/// stored certificate (Markovian).
pub fn validate_register_result(reg: &Register, result: &MpembaResult) -> Result<bool> {
    let bath_beta = result.bath_temperature.to_beta()?;
    let beta = result.max_temperature.to_beta()?.min(bath_beta);
    let q = product_populations(reg.qubit(), reg.n_qubits(), beta, bath_beta)?;
    match result.method {
        Method::NonMarkovian => Ok(thermo_majorizes(&reg.zero_mode_populations(bath_beta)?, &q)?.holds),
        Method::Markovian => match &result.markov_certificate {
            Some(cert) => crate::markovian::certificate_is_sound(&reg.diagonal_populations(bath_beta)?, &q, cert),
            None => Ok(false),
        },
    }
}

/// Common local β of all qubits; fails when the state is not locally thermal.
pub fn local_beta_of(state: &DensityMatrix) -> Result<f64> {
    let qubit = state.spectrum().qubit();
    let mut beta = None;
    for q in 0..state.spectrum().n_qubits() {
        let r = state.qubit_marginal(q)?;
        let b = qubit.beta_from_ratio(r[1][1].re / r[0][0].re)?;
        match beta {
            None => beta = Some(b),
            Some(b0) if ((b - b0) * qubit.gap()).abs() > 1e-9 => {
                return domain("state is not locally thermal: qubit marginals differ");
            }
            _ => {}
        }
    }
    Ok(beta.expect("at least one qubit"))
}

fn n_qubits_of(p: &PopulationVector) -> Result<usize> {
    let d = p.len();
    if !d.is_power_of_two() || d < 2 {
        return domain(format!("{d} levels is not a qubit register"));
    }
    Ok(d.trailing_zeros() as usize)
}

fn check_energies(p: &PopulationVector, spectrum: &EnergySpectrum) -> Result<()> {
    let ok = p
        .level_energies()
        .iter()
        .zip(spectrum.levels())
        .all(|(a, l)| (a - l.energy).abs() < 1e-12);
    if !ok {
        return domain("population vector does not match the qubit spectrum");
    }
    Ok(())
}

/// The two closed-form conditions for a classically correlated pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcConditions {
    /// `e^{-2β_h E_e}/Z_P < e^{-β_c E_e}/Z_C`.
    pub first_point_ok: bool,
    /// Left minus right side of the third-vertex contact equation.
    pub intersection_residual: f64,
}

pub fn cc_conditions(beta_c: f64, beta_h: f64, beta_b: f64, qubit: QubitLevels) -> CcConditions {
    let (eg, ee) = (qubit.ground, qubit.excited);
    let z_p = ((-beta_h * eg).exp() + (-beta_h * ee).exp()).powi(2);
    let z_c = (-beta_c * eg).exp() + (-beta_c * ee).exp();
    let first_point_ok = (-2.0 * beta_h * ee).exp() / z_p < (-beta_c * ee).exp() / z_c;
    let lhs = ((-2.0 * beta_h * ee).exp() + 2.0 * (-beta_h * (eg + ee)).exp()) / z_p;
    let rhs = ((-beta_c * ee).exp() + 2.0 * (-beta_b * (ee - eg) - beta_c * eg).exp()) / z_c;
    CcConditions { first_point_ok, intersection_residual: lhs - rhs }
}

/// `(β_b - β_c)(E_e - E_g)`.
pub fn discord_constraint_value(beta_c: f64, beta_b: f64, qubit: QubitLevels) -> f64 {
    (beta_b - beta_c) * qubit.gap()
}

/// Whether the maximal-discord pair keeps its |ge⟩+|eg⟩ level on top of the
/// β-order, i.e. `(β_b - β_c)(E_e - E_g) ≤ ln 2`.
pub fn discord_lambda_constraint(beta_c: f64, beta_b: f64, qubit: QubitLevels) -> bool {
    discord_constraint_value(beta_c, beta_b, qubit) <= std::f64::consts::LN_2
}

/// Nonequilibrium free energy `tr[ρH] - S[ρ]/β` in eV.
pub fn free_energy(state: &DensityMatrix, bath_beta: f64) -> Result<f64> {
    if !(bath_beta > 0.0) {
        return domain("free energy needs a finite bath temperature");
    }
    let energy: f64 = state
        .diagonal()
        .iter()
        .zip(state.spectrum().energies())
        .map(|(p, e)| p * e)
        .sum();
    Ok(energy - entropy(&state.eigenvalues()) / bath_beta)
}

/// Free energy of a diagonal state at the vector's bath β.
pub fn free_energy_populations(p: &PopulationVector) -> Result<f64> {
    if !(p.bath_beta() > 0.0) {
        return domain("free energy needs a finite bath temperature");
    }
    let energy: f64 = p.populations().iter().zip(p.level_energies()).map(|(a, e)| a * e).sum();
    Ok(energy - entropy(p.populations()) / p.bath_beta())
}

fn entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub qubit: QubitLevels,
    pub local: Temperature,
    pub bath: Temperature,
    pub strength: Strength,
    pub kinds: Vec<RegisterKind>,
    pub max_pairs: usize,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub kind: RegisterKind,
    pub n_pairs: usize,
    pub layout: Layout,
    pub result: MpembaResult,
}

/// Runs every (kind, n) cell of a scan in parallel; rows come back in grid order.
pub fn scan(layout: Layout, cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    if cfg.max_pairs == 0 {
        return domain("scan needs at least one qubit pair");
    }
    if cfg.max_pairs > HARD_MAX_PAIRS {
        return Err(Error::Resource(format!(
            "{} pairs exceeds the cap of {HARD_MAX_PAIRS}",
            cfg.max_pairs
        )));
    }
    let local_beta = cfg.local.to_beta()?;
    let grid: Vec<(RegisterKind, usize)> = cfg
        .kinds
        .iter()
        .flat_map(|&k| (1..=cfg.max_pairs).map(move |n| (k, n)))
        .collect();
    grid.into_par_iter()
        .map(|(kind, n_pairs)| {
            let reg = Register::build(cfg.qubit, local_beta, kind, cfg.strength, n_pairs, layout)?;
            let result = match cfg.method {
                Method::NonMarkovian => max_product_temperature_register(&reg, cfg.bath)?,
                Method::Markovian => crate::markovian::max_product_temperature_markovian_register(
                    &reg,
                    cfg.bath,
                    &crate::markovian::MarkovConfig::default(),
                )?,
            };
            Ok(ScanRow { kind, n_pairs, layout, result })
        })
        .collect()
}

/// One correlated block composed with product pairs, for n = 1..=max_pairs.
pub fn scan_dimensionality(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    scan(Layout::Dimensionality, cfg)
}

/// Every pair correlated (plus the multipartite classical register).
pub fn scan_scaling(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    scan(Layout::Scaling, cfg)
}
