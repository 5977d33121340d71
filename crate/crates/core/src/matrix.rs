//! Dense Hermitian matrices over a register's product basis.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::spectrum::EnergySpectrum;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Largest dimension for which dense matrices are built (five qubit pairs).
pub const MAX_DENSE_DIM: usize = 1024;

/// Stopping threshold on the off-diagonal Frobenius norm in [`hermitian_eigenvalues`].
pub const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// A normalized Hermitian matrix in the energy product basis of `spectrum`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<Complex64>,
    spectrum: EnergySpectrum,
}

impl DensityMatrix {
    /// Checks shape, Hermiticity and unit trace. Positivity is checked
    /// separately by [`DensityMatrix::check_positive`], which costs an
    /// eigendecomposition.
    pub fn new(entries: Array2<Complex64>, spectrum: EnergySpectrum) -> Result<Self> {
        let dim = spectrum.dim();
        if entries.dim() != (dim, dim) {
            return domain(format!(
                "matrix shape {:?} does not match a {}-level spectrum",
                entries.dim(),
                dim
            ));
        }
        check_hermitian(entries.view())?;
        let trace: f64 = (0..dim).map(|i| entries[[i, i]].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return domain(format!("trace must be 1, got {trace}"));
        }
        Ok(Self { entries, spectrum })
    }

    /// Diagonal state with the given populations.
    pub fn from_diagonal(populations: &[f64], spectrum: EnergySpectrum) -> Result<Self> {
        let dim = spectrum.dim();
        if populations.len() != dim {
            return domain(format!("expected {dim} populations, got {}", populations.len()));
        }
        let mut m = Array2::zeros((dim, dim));
        for (i, &p) in populations.iter().enumerate() {
            m[[i, i]] = Complex64::new(p, 0.0);
        }
        Self::new(m, spectrum)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn spectrum(&self) -> &EnergySpectrum {
        &self.spectrum
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[[row, col]]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[[i, i]].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.entries.view())
    }

    pub fn check_positive(&self) -> Result<()> {
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return domain(format!("matrix is not positive semidefinite (eigenvalue {min})"));
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other` over the joined register.
    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let spectrum = self.spectrum.join(&other.spectrum)?;
        if spectrum.dim() > MAX_DENSE_DIM {
            return Err(Error::Resource(format!(
                "dense register of dimension {} exceeds the cap of {MAX_DENSE_DIM}",
                spectrum.dim()
            )));
        }
        let entries = kron(self.entries.view(), other.entries.view());
        Ok(DensityMatrix { entries, spectrum })
    }

    /// Reduced state of one qubit, as (P_g, P_e) plus the g/e coherence.
    pub fn qubit_marginal(&self, qubit: usize) -> Result<[[Complex64; 2]; 2]> {
        let n = self.spectrum.n_qubits();
        if qubit >= n {
            return domain(format!("qubit {qubit} out of range for a {n}-qubit register"));
        }
        let shift = n - 1 - qubit;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        let dim = self.dim();
        for a in 0..dim {
            for b in 0..dim {
                // environment bits must agree
                if (a ^ b) & !(1 << shift) != 0 {
                    continue;
                }
                out[(a >> shift) & 1][(b >> shift) & 1] += self.entries[[a, b]];
            }
        }
        Ok(out)
    }
}

pub(crate) fn check_hermitian(m: ArrayView2<Complex64>) -> Result<()> {
    let (r, c) = m.dim();
    if r != c {
        return domain(format!("matrix must be square, got {r}x{c}"));
    }
    for i in 0..r {
        for j in i..r {
            let d = m[[i, j]] - m[[j, i]].conj();
            if d.norm() > HERMITIAN_TOL {
                return domain(format!("matrix is not Hermitian at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

pub fn kron(a: ArrayView2<Complex64>, b: ArrayView2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted in non-increasing order.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// a real plane rotation with `tan 2θ = 2|a_pq| / (a_qq - a_pp)`. Sweeps stop
/// once the off-diagonal Frobenius norm drops below [`JACOBI_TOL`] relative to
/// the matrix norm (or absolutely, for norms below one).
pub fn hermitian_eigenvalues(m: ArrayView2<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.to_owned();
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                let r = apq.norm();
                if r < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r;
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let cphase = phase.conj();

                // A <- A J, with J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on (p, q)
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * c - akq * cphase * s;
                    a[[k, q]] = akp * s + akq * cphase * c;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = apk * c - aqk * phase * s;
                    a[[q, k]] = apk * s + aqk * phase * c;
                }
                a[[p, q]] = Complex64::new(0.0, 0.0);
                a[[q, p]] = Complex64::new(0.0, 0.0);
                a[[p, p]] = Complex64::new(a[[p, p]].re, 0.0);
                a[[q, q]] = Complex64::new(a[[q, q]].re, 0.0);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

fn off_diagonal_norm(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[[i, j]].norm_sqr();
            }
        }
    }
    s.sqrt()
}
