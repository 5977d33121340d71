//! Markovian relaxation through elementary two-level thermalizations.
//!
//! `T^{i,j}(λ)` moves levels i and j a fraction λ of the way to their mutual
//! Gibbs ratio; λ = 1 − e^{−t/τ} for a reset channel run for time t. A vector
//! `q` is reachable from `p` when some finite sequence of these steps leads
//! to a state that shares a β-order with `q` and whose curve dominates `q`'s.
//!
//! The decision is a depth-bounded search over pairs (i, j). Along each pair
//! only a finite set of λ values is tried: the points where the pair's
//! ratios cross another level's ratio, the last λ keeping the curve above
//! the target's, and λ = 1. Visited states are memoized after quantization.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::majorization::{build_curve, compare_curves, PopulationVector, ThermoCurve, CURVE_TOL};
use crate::matrix::DensityMatrix;
use crate::mpemba::{
    local_beta_of, product_populations, touching_point_search, Method, MpembaResult, CERTIFICATE_STEP_C,
    NO_MPEMBA_MARGIN_C,
};
use crate::register::Register;
use crate::roots::bisect_threshold;
use crate::spectrum::QubitLevels;
use crate::temperature::Temperature;

/// Largest dimension the search accepts (two qubit pairs).
pub const MAX_MARKOV_DIM: usize = 16;
/// Temperature resolution of the Markovian maximum, in °C.
pub const TEMPERATURE_TOL_C: f64 = 0.01;
const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementaryStep {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovCertificate {
    pub steps: Vec<ElementaryStep>,
    /// Largest height by which the target's curve exceeds the reached state's.
    pub residual: f64,
}

impl MarkovCertificate {
    /// State reached by applying the steps to `p` in order.
    pub fn replay(&self, p: &PopulationVector) -> Result<PopulationVector> {
        self.steps.iter().try_fold(p.clone(), |acc, s| apply_step(&acc, *s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovConfig {
    /// Longest step sequence explored; `None` means d(d−1).
    pub max_depth: Option<usize>,
    /// Grid on which visited states are deduplicated.
    pub quantum: f64,
    /// Node budget per decision.
    pub max_nodes: usize,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self { max_depth: None, quantum: 1e-10, max_nodes: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousDecision {
    pub holds: bool,
    pub certificate: Option<MarkovCertificate>,
    /// Smallest curve deficit among visited states sharing a β-order with
    /// the target; `+inf` if none was found.
    pub best_residual: f64,
    /// Longest step sequence explored.
    pub deepest: usize,
    pub nodes: usize,
    /// True when the node budget cut the search short.
    pub truncated: bool,
}

fn pair_weights(p: &PopulationVector, i: usize, j: usize) -> (f64, f64) {
    let e = p.level_energies();
    let b = p.bath_beta();
    ((-b * e[i]).exp(), (-b * e[j]).exp())
}

/// Applies `T^{i,j}(λ)` to `p`.
pub fn apply_step(p: &PopulationVector, s: ElementaryStep) -> Result<PopulationVector> {
    let d = p.len();
    if s.i == s.j {
        return domain(format!("elementary thermalization needs two distinct levels, got ({}, {})", s.i, s.j));
    }
    if s.i >= d || s.j >= d {
        return domain(format!("level index out of range for {d} levels"));
    }
    if !(0.0..=1.0).contains(&s.lambda) {
        return domain(format!("lambda must lie in [0, 1], got {}", s.lambda));
    }
    Ok(p.with_populations(step_raw(p.populations(), s, pair_weights(p, s.i, s.j))))
}

fn step_raw(p: &[f64], s: ElementaryStep, (gi, gj): (f64, f64)) -> Vec<f64> {
    let mut out = p.to_vec();
    let total = p[s.i] + p[s.j];
    let target = gi / (gi + gj) * total;
    let moved = s.lambda * (target - p[s.i]);
    out[s.i] = p[s.i] + moved;
    out[s.j] = p[s.j] - moved;
    out
}

/// One leg of a relaxation schedule: reset channel on (i, j) for `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub i: usize,
    pub j: usize,
    pub duration: f64,
    pub tau: f64,
}

impl Leg {
    pub fn lambda(&self) -> f64 {
        -(-self.duration / self.tau).exp_m1()
    }
}

/// States after each leg, starting with `p` itself. Exact solution of the
/// reset master equation on each leg.
pub fn relax_trajectory(p: &PopulationVector, schedule: &[Leg]) -> Result<Vec<PopulationVector>> {
    let mut out = Vec::with_capacity(schedule.len() + 1);
    out.push(p.clone());
    for leg in schedule {
        if !(leg.duration >= 0.0 && leg.tau > 0.0) {
            return domain(format!("leg needs duration >= 0 and tau > 0, got {leg:?}"));
        }
        let next = apply_step(out.last().unwrap(), ElementaryStep { i: leg.i, j: leg.j, lambda: leg.lambda() })?;
        out.push(next);
    }
    Ok(out)
}

/// Whether two vectors admit a common β-order (ties may be broken either way).
pub fn share_beta_order(p: &PopulationVector, q: &PopulationVector) -> bool {
    let rp = p.ratios();
    let rq = q.ratios();
    let tp = RATIO_TOL * rp.iter().copied().fold(1.0, f64::max);
    let tq = RATIO_TOL * rq.iter().copied().fold(1.0, f64::max);
    for i in 0..rp.len() {
        for j in 0..rp.len() {
            if rp[i] > rp[j] + tp && rq[i] < rq[j] - tq {
                return false;
            }
        }
    }
    true
}

struct Search<'a> {
    target: &'a PopulationVector,
    target_curve: ThermoCurve,
    weights: Vec<f64>,
    config: MarkovConfig,
    depth_limit: usize,
    seen: HashMap<Vec<i64>, usize>,
    nodes: usize,
    deepest: usize,
    best_residual: f64,
    truncated: bool,
}

impl Search<'_> {
    fn deficit(&self, p: &PopulationVector) -> f64 {
        compare_curves(&build_curve(p, false), &self.target_curve).max_deficit
    }

    fn key(&self, p: &PopulationVector) -> Vec<i64> {
        p.populations().iter().map(|x| (x / self.config.quantum).round() as i64).collect()
    }

    /// Candidate λ values for the pair (i, j) from state `p`, ascending.
    fn critical_lambdas(&self, p: &PopulationVector, i: usize, j: usize) -> Vec<f64> {
        let pops = p.populations();
        let (gi, gj) = (self.weights[i], self.weights[j]);
        let target_i = gi / (gi + gj) * (pops[i] + pops[j]);
        let shift = target_i - pops[i];
        let mut out = Vec::new();
        if shift.abs() < 1e-15 {
            return out;
        }
        let ratios = p.ratios();
        for (k, &rk) in ratios.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            // ratio of i: (p_i + λ·shift)/g_i, ratio of j: (p_j − λ·shift)/g_j
            for l in [(rk * gi - pops[i]) / shift, (pops[j] - rk * gj) / shift] {
                if l > 1e-12 && l < 1.0 - 1e-12 {
                    out.push(l);
                }
            }
        }
        out.push(1.0);

        let step = |l: f64| p.with_populations(step_raw(pops, ElementaryStep { i, j, lambda: l }, (gi, gj)));
        let threshold = 0.1 * CURVE_TOL;
        if self.deficit(&step(1.0)) > threshold {
            let (touch, _) = bisect_threshold(0.0, 1.0, 1e-13, |l| self.deficit(&step(l)) > threshold);
            out.retain(|&l| l < touch);
            if touch > 1e-12 {
                out.push(touch);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }

    /// All pairs, those whose order conflicts with the target's first
    /// (largest conflict first).
    fn pair_order(&self, p: &PopulationVector) -> Vec<(usize, usize)> {
        let rp = p.ratios();
        let rq = self.target.ratios();
        let d = rp.len();
        let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(d * (d - 1) / 2);
        for i in 0..d {
            for j in i + 1..d {
                let conflict = -((rp[i] - rp[j]) * (rq[i] - rq[j])).min(0.0);
                scored.push((conflict, i, j));
            }
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        scored.into_iter().map(|(_, i, j)| (i, j)).collect()
    }

    fn visit(&mut self, p: &PopulationVector, depth: usize, path: &mut Vec<ElementaryStep>) -> Option<f64> {
        self.nodes += 1;
        self.deepest = self.deepest.max(depth);
        let deficit = self.deficit(p);
        let aligned = share_beta_order(p, self.target);
        if aligned {
            self.best_residual = self.best_residual.min(deficit);
        }
        if deficit > CURVE_TOL {
            return None;
        }
        if aligned {
            return Some(deficit);
        }
        if depth >= self.depth_limit {
            return None;
        }
        if self.nodes >= self.config.max_nodes {
            self.truncated = true;
            return None;
        }
        let remaining = self.depth_limit - depth;
        let key = self.key(p);
        if self.seen.get(&key).is_some_and(|&r| r >= remaining) {
            return None;
        }
        self.seen.insert(key, remaining);

        for (i, j) in self.pair_order(p) {
            {
                for lambda in self.critical_lambdas(p, i, j).into_iter().rev() {
                    let s = ElementaryStep { i, j, lambda };
                    let next = p.with_populations(step_raw(p.populations(), s, (self.weights[i], self.weights[j])));
                    path.push(s);
                    if let Some(res) = self.visit(&next, depth + 1, path) {
                        return Some(res);
                    }
                    path.pop();
                    if self.truncated {
                        return None;
                    }
                }
            }
        }
        None
    }
}

/// Decides whether `p` continuously thermo-majorizes `q` with the default search settings.
pub fn continuously_thermo_majorizes(p: &PopulationVector, q: &PopulationVector) -> Result<ContinuousDecision> {
    continuously_thermo_majorizes_with(p, q, &MarkovConfig::default())
}

pub fn continuously_thermo_majorizes_with(
    p: &PopulationVector,
    q: &PopulationVector,
    config: &MarkovConfig,
) -> Result<ContinuousDecision> {
    let d = p.len();
    if d > MAX_MARKOV_DIM {
        return Err(Error::Resource(format!(
            "continuous thermo-majorization search is capped at dimension {MAX_MARKOV_DIM}, got {d}"
        )));
    }
    // validates bath and spectrum agreement
    crate::majorization::thermo_majorizes(p, q)?;
    if p.level_energies() != q.level_energies() {
        return domain("population vectors must list levels in the same order");
    }
    let mut search = Search {
        target: q,
        target_curve: build_curve(q, false),
        weights: p.bath_weights(),
        config: *config,
        depth_limit: config.max_depth.unwrap_or(d * (d - 1)),
        seen: HashMap::new(),
        nodes: 0,
        deepest: 0,
        best_residual: f64::INFINITY,
        truncated: false,
    };
    let mut path = Vec::new();
    let found = search.visit(p, 0, &mut path);
    Ok(ContinuousDecision {
        holds: found.is_some(),
        certificate: found.map(|residual| MarkovCertificate { steps: path, residual }),
        best_residual: search.best_residual,
        deepest: search.deepest,
        nodes: search.nodes,
        truncated: search.truncated,
    })
}

/// Checks a certificate: replaying it from `p` must give a state that shares
/// `q`'s β-order and dominates `q` to within the curve tolerance.
pub fn certificate_is_sound(p: &PopulationVector, q: &PopulationVector, cert: &MarkovCertificate) -> Result<bool> {
    let reached = cert.replay(p)?;
    let m = crate::majorization::thermo_majorizes(&reached, q)?;
    Ok(m.holds && share_beta_order(&reached, q))
}

/// Hottest product temperature reachable by Markovian relaxation, found by
/// bisection on temperature with the continuous decision as oracle.
///
/// Works on the diagonal of `state`: elementary thermalizations act on
/// populations only and cannot rotate degenerate coherences into them.
pub fn max_product_temperature_markovian(state: &DensityMatrix, bath: Temperature) -> Result<MpembaResult> {
    max_product_temperature_markovian_with(state, bath, &MarkovConfig::default())
}

pub fn max_product_temperature_markovian_with(
    state: &DensityMatrix,
    bath: Temperature,
    config: &MarkovConfig,
) -> Result<MpembaResult> {
    let bath_beta = bath.to_beta()?;
    let p = PopulationVector::from_diagonal(state, bath_beta)?;
    markovian_search(&p, state.spectrum().qubit(), local_beta_of(state)?, config)
}

pub fn max_product_temperature_markovian_register(
    reg: &Register,
    bath: Temperature,
    config: &MarkovConfig,
) -> Result<MpembaResult> {
    let p = reg.diagonal_populations(bath.to_beta()?)?;
    markovian_search(&p, reg.qubit(), reg.local_beta(), config)
}

fn markovian_search(p: &PopulationVector, qubit: QubitLevels, local_beta: f64, config: &MarkovConfig) -> Result<MpembaResult> {
    let bath_beta = p.bath_beta();
    if !(local_beta < bath_beta) {
        return domain(format!("state (β = {local_beta}) must be hotter than the bath (β = {bath_beta})"));
    }
    if p.len() > MAX_MARKOV_DIM {
        return Err(Error::Resource(format!(
            "Markovian analysis is capped at dimension {MAX_MARKOV_DIM}, got {}",
            p.len()
        )));
    }
    let n_qubits = p.len().trailing_zeros() as usize;
    let to_c = |beta: f64| Temperature::beta(beta).to_celsius();
    let bath_c = to_c(bath_beta)?;
    let local_c = to_c(local_beta)?;
    // thermal operations bound Markovian ones
    let ceiling_c = to_c(touching_point_search(p, qubit)?.beta)?;

    let decide = |celsius: f64| -> Result<ContinuousDecision> {
        let beta = Temperature::celsius(celsius).to_beta()?.min(bath_beta);
        let q = product_populations(qubit, n_qubits, beta, bath_beta)?;
        continuously_thermo_majorizes_with(p, &q, config)
    };

    let mut truncated = false;
    let mut best: Option<(f64, ContinuousDecision)> = None;
    let mut probe = |c: f64, best: &mut Option<(f64, ContinuousDecision)>| -> Result<bool> {
        let d = decide(c)?;
        truncated |= d.truncated;
        let holds = d.holds;
        if holds && best.as_ref().map_or(true, |(b, _)| c > *b) {
            *best = Some((c, d));
        }
        Ok(holds)
    };

    let max_c = if probe(ceiling_c, &mut best)? {
        ceiling_c
    } else {
        let (lo, hi) = if probe(local_c.min(ceiling_c), &mut best)? {
            (local_c.min(ceiling_c), ceiling_c)
        } else {
            probe(bath_c, &mut best)?;
            (bath_c, local_c.min(ceiling_c))
        };
        let mut err = None;
        let (lo, _) = bisect_threshold(lo, hi, TEMPERATURE_TOL_C, |c| match probe(c, &mut best) {
            Ok(h) => !h,
            Err(e) => {
                err = Some(e);
                true
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        lo
    };

    let certificate = best.and_then(|(_, d)| d.certificate);
    let sound = match &certificate {
        Some(cert) => {
            let q = product_populations(qubit, n_qubits, Temperature::celsius(max_c).to_beta()?.min(bath_beta), bath_beta)?;
            certificate_is_sound(p, &q, cert)?
        }
        None => false,
    };
    let fails_above = max_c >= ceiling_c || !decide(max_c + CERTIFICATE_STEP_C)?.holds;

    let mut result = MpembaResult {
        max_temperature: Temperature::celsius(max_c),
        local_temperature: Temperature::beta(local_beta),
        bath_temperature: Temperature::beta(bath_beta),
        binding_vertex: None,
        method: Method::Markovian,
        certified: sound && fails_above,
        diagnostic: None,
        markov_certificate: certificate,
    };
    if max_c <= local_c + NO_MPEMBA_MARGIN_C {
        result.diagnostic = Some(format!(
            "no Markovian Mpemba effect: hottest reachable product state is {max_c:.2} °C"
        ));
    }
    if truncated {
        let note = "search budget exhausted on some probes; 'not reachable' means not found within the bound";
        result.diagnostic = Some(match result.diagnostic.take() {
            Some(d) => format!("{d}; {note}"),
            None => note.to_string(),
        });
    }
    Ok(result)
}
