#![allow(dead_code)]

use std::time::Instant;

use mpemba_core::majorization::{block_diagonalize_zero_mode, thermo_majorizes, PopulationVector};
use mpemba_core::markovian::{
    apply_step, certificate_is_sound, continuously_thermo_majorizes_with, ElementaryStep, MarkovConfig,
};
use mpemba_core::matrix::DensityMatrix;
use mpemba_core::mpemba::{free_energy_populations, max_product_temperature_register, product_populations};
use mpemba_core::spectrum::{EnergySpectrum, QubitLevels};
use mpemba_core::temperature::Temperature;
use mpemba_core::{mode_decompose, Layout, Register, RegisterKind, Strength};
use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = std::result::Result<String, String>;

pub fn qubit() -> QubitLevels {
    QubitLevels::new(0.0, 0.05).unwrap()
}

pub fn beta(celsius: f64) -> f64 {
    Temperature::celsius(celsius).to_beta().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_populations(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    // exponential draws give a flat distribution on the simplex
    let raw: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn random_vector(rng: &mut impl Rng, n_qubits: usize) -> PopulationVector {
    let s = EnergySpectrum::new(qubit(), n_qubits).unwrap();
    PopulationVector::new(random_populations(rng, 1 << n_qubits), s.energies(), beta(0.0)).unwrap()
}

pub fn gibbs(n_qubits: usize) -> PopulationVector {
    let s = EnergySpectrum::new(qubit(), n_qubits).unwrap();
    PopulationVector::thermal(&s, beta(0.0), beta(0.0)).unwrap()
}

/// Random Gibbs-preserving image of `p`: a few elementary thermalizations.
pub fn random_descendant(rng: &mut impl Rng, p: &PopulationVector) -> PopulationVector {
    let d = p.len();
    let mut q = p.clone();
    for _ in 0..rng.gen_range(1..6) {
        let i = rng.gen_range(0..d);
        let j = (i + rng.gen_range(1..d)) % d;
        q = apply_step(&q, ElementaryStep { i, j, lambda: rng.gen() }).unwrap();
    }
    q
}

pub fn mix(p: &PopulationVector, q: &PopulationVector, t: f64) -> PopulationVector {
    let v = p.populations().iter().zip(q.populations()).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    PopulationVector::new(v, p.level_energies().to_vec(), p.bath_beta()).unwrap()
}

fn holds(p: &PopulationVector, q: &PopulationVector) -> bool {
    thermo_majorizes(p, q).unwrap().holds
}

/// Preorder axioms, Gibbs minimality and free-energy monotonicity on
/// `count` random states for each of d = 4, 8, 16.
pub fn suite_preorder(count: usize) -> Outcome {
    let mut rng = rng(7);
    let mut checks = 0usize;
    for n in [2, 3, 4] {
        let g = gibbs(n);
        for k in 0..count {
            let p = random_vector(&mut rng, n);
            if !holds(&p, &p) {
                return Err(format!("reflexivity failed at d={} sample {k}", p.len()));
            }
            if !holds(&p, &g) {
                return Err(format!("Gibbs minimality failed at d={} sample {k}", p.len()));
            }
            let q = if k % 2 == 0 { random_descendant(&mut rng, &p) } else { mix(&p, &g, rng.gen()) };
            let r = random_descendant(&mut rng, &q);
            if !(holds(&p, &q) && holds(&q, &r) && holds(&p, &r)) {
                return Err(format!("transitivity chain failed at d={} sample {k}", p.len()));
            }
            // arbitrary triple: the implication must never be violated
            let a = random_vector(&mut rng, n);
            if holds(&a, &p) && holds(&p, &q) && !holds(&a, &q) {
                return Err(format!("transitivity violated at d={} sample {k}", p.len()));
            }
            let fp = free_energy_populations(&p).unwrap();
            let fq = free_energy_populations(&q).unwrap();
            if fp < fq - 1e-9 {
                return Err(format!("free energy increased along p ≻ q at d={}", p.len()));
            }
            checks += 6;
        }
    }
    Ok(format!("{checks} checks over {count} states per d"))
}

/// Every Markovian success is also a thermal-operation success, and every
/// certificate replays to a state that dominates the target.
pub fn suite_markov_containment(count: usize, config: &MarkovConfig) -> Outcome {
    let mut rng = rng(11);
    let mut positives = 0;
    for k in 0..count {
        let p = random_vector(&mut rng, 2);
        let q = if k % 3 == 0 { random_vector(&mut rng, 2) } else { random_descendant(&mut rng, &p) };
        let d = continuously_thermo_majorizes_with(&p, &q, config).map_err(|e| e.to_string())?;
        if d.holds {
            positives += 1;
            if !holds(&p, &q) {
                return Err(format!("sample {k}: Markovian true but thermal false"));
            }
            let cert = d.certificate.as_ref().ok_or("missing certificate")?;
            if !certificate_is_sound(&p, &q, cert).unwrap() {
                return Err(format!("sample {k}: certificate replay failed"));
            }
        }
    }
    Ok(format!("{positives}/{count} random pairs reachable, all contained and replayed"))
}

/// Markovian maxima of scanned registers never exceed the thermal ones and
/// their certificates replay.
pub fn suite_scanned_containment(max_pairs: usize, config: &MarkovConfig) -> Outcome {
    scanned_containment(1..=max_pairs, config)
}

/// Same as [`suite_scanned_containment`] for registers of exactly `n_pairs` pairs.
pub fn suite_scanned_containment_at(n_pairs: usize, config: &MarkovConfig) -> Outcome {
    scanned_containment(n_pairs..=n_pairs, config)
}

fn scanned_containment(pairs: std::ops::RangeInclusive<usize>, config: &MarkovConfig) -> Outcome {
    let bath = Temperature::celsius(0.0);
    let mut rows = 0;
    for layout in [Layout::Scaling, Layout::Dimensionality] {
        for kind in RegisterKind::ALL {
            for n in pairs.clone() {
                let reg = Register::build(qubit(), beta(60.0), kind, Strength::Max, n, layout).unwrap();
                let to = max_product_temperature_register(&reg, bath).unwrap();
                let mk = mpemba_core::markovian::max_product_temperature_markovian_register(&reg, bath, config)
                    .map_err(|e| e.to_string())?;
                if mk.max_celsius() > to.max_celsius() + 1e-6 {
                    return Err(format!("{kind} n={n}: markovian {} > thermal {}", mk.max_celsius(), to.max_celsius()));
                }
                let cert = mk.markov_certificate.as_ref().ok_or(format!("{kind} n={n}: no certificate"))?;
                let p = reg.diagonal_populations(beta(0.0)).unwrap();
                let q = product_populations(qubit(), reg.n_qubits(), mk.max_temperature.to_beta().unwrap(), beta(0.0))
                    .unwrap();
                if !certificate_is_sound(&p, &q, cert).unwrap() {
                    return Err(format!("{kind} n={n}: certificate replay failed"));
                }
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} scanned registers"))
}

/// Zero-mode populations and maxima of QC-E registers equal the CC ones for
/// every coherence strength.
pub fn suite_entangled_invariance(max_pairs: usize) -> Outcome {
    let bath = Temperature::celsius(0.0);
    let (pg, pe) = qubit().thermal_populations(beta(60.0));
    let bound = (pg * pe).sqrt();
    for layout in [Layout::Scaling, Layout::Dimensionality] {
        for n in 1..=max_pairs {
            let cc = Register::build(qubit(), beta(60.0), RegisterKind::Classical, Strength::Max, n, layout).unwrap();
            let pc = cc.zero_mode_populations(beta(0.0)).unwrap();
            let tc = max_product_temperature_register(&cc, bath).unwrap().max_celsius();
            for s in [Strength::Max, Strength::Value(0.5 * bound), Strength::Value(1e-3 * bound)] {
                let qe = Register::build(qubit(), beta(60.0), RegisterKind::Entangled, s, n, layout).unwrap();
                let pq = qe.zero_mode_populations(beta(0.0)).unwrap();
                let dev = pc.populations().iter().zip(pq.populations()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if dev > 1e-14 {
                    return Err(format!("n={n} {s}: population deviation {dev:e}"));
                }
                let te = max_product_temperature_register(&qe, bath).unwrap().max_celsius();
                if (te - tc).abs() > 1e-9 {
                    return Err(format!("n={n} {s}: {te} vs {tc}"));
                }
            }
        }
    }
    Ok(format!("n = 1..={max_pairs}, three strengths, both layouts"))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> Array2<Complex64> {
    let mut m = Array2::<Complex64>::zeros((d, d));
    for i in 0..d {
        m[[i, i]] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[[i, j]] = z;
            m[[j, i]] = z.conj();
        }
    }
    // unit trace so it passes the density-matrix shape checks
    let tr: f64 = (0..d).map(|i| m[[i, i]].re).sum();
    let shift = (1.0 - tr) / d as f64;
    for i in 0..d {
        m[[i, i]].re += shift;
    }
    m
}

/// Mode decomposition reconstructs random Hermitian matrices exactly.
pub fn suite_mode_reconstruction(count: usize) -> Outcome {
    let mut rng = rng(13);
    for k in 0..count {
        let n = 1 + k % 6;
        let s = EnergySpectrum::new(qubit(), n).unwrap();
        let e = s.energies();
        let m = DensityMatrix::new(random_hermitian(&mut rng, 1 << n), s).map_err(|e| e.to_string())?;
        let dec = mode_decompose(&m);
        if &dec.reconstruct() != m.entries() {
            return Err(format!("sample {k} (d={}): reconstruction differs", 1 << n));
        }
        for mode in dec.modes() {
            for &(r, c, _) in &mode.entries {
                if (e[r] - e[c] - mode.omega).abs() > 1e-12 {
                    return Err(format!("sample {k}: entry ({r},{c}) filed under ω={}", mode.omega));
                }
            }
        }
    }
    Ok(format!("{count} matrices, d = 2..64"))
}

fn nalgebra_eigenvalues(block: &Array2<Complex64>) -> Vec<f64> {
    let d = block.nrows();
    let m = DMatrix::from_fn(d, d, |i, j| block[[i, j]]);
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Random density matrix A·A†/tr over `n` qubits.
pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let d = 1 << n;
    let a = Array2::from_shape_fn((d, d), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut rho = a.dot(&a.t().mapv(|z| z.conj()));
    let tr: f64 = (0..d).map(|i| rho[[i, i]].re).sum();
    rho.mapv_inplace(|z| z / tr);
    for i in 0..d {
        rho[[i, i]].im = 0.0;
        for j in i + 1..d {
            let z = 0.5 * (rho[[i, j]] + rho[[j, i]].conj());
            rho[[i, j]] = z;
            rho[[j, i]] = z.conj();
        }
    }
    DensityMatrix::new(rho, EnergySpectrum::new(qubit(), n).unwrap()).unwrap()
}

/// Degenerate-block eigenvalues agree with an independent eigensolver.
pub fn suite_block_eigenvalues(count: usize) -> Outcome {
    let mut rng = rng(17);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = 2 + k % 3;
        let m = random_density(&mut rng, n);
        let p = block_diagonalize_zero_mode(&m, beta(0.0)).map_err(|e| e.to_string())?;
        for group in m.spectrum().degenerate_groups() {
            let block = Array2::from_shape_fn((group.len(), group.len()), |(i, j)| m.get(group[i], group[j]));
            let expected = nalgebra_eigenvalues(&block);
            let mut got: Vec<f64> = group.iter().map(|&i| p.populations()[i]).collect();
            got.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in got.iter().zip(&expected) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("largest eigenvalue deviation {worst:e}"));
    }
    Ok(format!("{count} random states, max deviation {worst:.1e}"))
}

pub fn timed<F: FnOnce() -> Outcome>(f: F) -> (Outcome, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64())
}
