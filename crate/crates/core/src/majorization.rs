//! Thermo-majorization curves and the preorder they define.
//!
//! A population vector is β-ordered against the bath by decreasing
//! `p_i / e^{-β_b E_i}`; its curve joins the cumulative points
//! `(Σ e^{-β_b E_x}, Σ p_x)`. One state thermo-majorizes another when its
//! curve lies on or above the other's everywhere.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::matrix::{check_hermitian, hermitian_eigenvalues, DensityMatrix};
use crate::spectrum::EnergySpectrum;

/// Absolute tolerance on curve heights when deciding dominance.
pub const CURVE_TOL: f64 = 1e-9;
pub const NORMALIZATION_TOL: f64 = 1e-12;
const ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    populations: Vec<f64>,
    level_energies: Vec<f64>,
    bath_beta: f64,
}

impl PopulationVector {
    pub fn new(populations: Vec<f64>, level_energies: Vec<f64>, bath_beta: f64) -> Result<Self> {
        if populations.len() != level_energies.len() {
            return domain(format!(
                "{} populations for {} levels",
                populations.len(),
                level_energies.len()
            ));
        }
        if populations.is_empty() {
            return domain("population vector is empty");
        }
        if !(bath_beta >= 0.0) || bath_beta.is_infinite() {
            return domain(format!("bath inverse temperature must be finite and >= 0, got {bath_beta}"));
        }
        // Tiny negative values come from eigenvalues of rank-deficient blocks.
        if let Some(p) = populations.iter().find(|p| !(**p >= -1e-12)) {
            return domain(format!("negative population {p}"));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return domain(format!("populations sum to {total}, expected 1"));
        }
        let populations = populations.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { populations, level_energies, bath_beta })
    }

    /// Gibbs populations of `spectrum` at inverse temperature `beta`.
    pub fn thermal(spectrum: &EnergySpectrum, beta: f64, bath_beta: f64) -> Result<Self> {
        let e = spectrum.energies();
        let emin = e.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = e.iter().map(|x| (-beta * (x - emin)).exp()).collect();
        let z: f64 = w.iter().sum();
        Self::new(w.into_iter().map(|x| x / z).collect(), e, bath_beta)
    }

    /// Diagonal of a density matrix (coherences discarded).
    pub fn from_diagonal(m: &DensityMatrix, bath_beta: f64) -> Result<Self> {
        Self::new(m.diagonal(), m.spectrum().energies(), bath_beta)
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn level_energies(&self) -> &[f64] {
        &self.level_energies
    }

    pub fn bath_beta(&self) -> f64 {
        self.bath_beta
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    /// Unnormalized bath weights `e^{-β_b E_i}`.
    pub fn bath_weights(&self) -> Vec<f64> {
        self.level_energies.iter().map(|e| (-self.bath_beta * e).exp()).collect()
    }

    /// `p_i / e^{-β_b E_i}` for every level.
    pub fn ratios(&self) -> Vec<f64> {
        self.populations
            .iter()
            .zip(self.bath_weights())
            .map(|(p, g)| p / g)
            .collect()
    }

    pub(crate) fn with_populations(&self, populations: Vec<f64>) -> Self {
        Self { populations, level_energies: self.level_energies.clone(), bath_beta: self.bath_beta }
    }

    fn compatible_with(&self, other: &PopulationVector) -> Result<()> {
        if (self.bath_beta - other.bath_beta).abs() > 1e-12 * self.bath_beta.max(1.0) {
            return domain(format!(
                "bath temperatures differ (β = {} vs {})",
                self.bath_beta, other.bath_beta
            ));
        }
        let mut a = self.level_energies.clone();
        let mut b = other.level_energies.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| (x - y).abs() > ENERGY_TOL) {
            return domain("population vectors live on different energy spectra");
        }
        Ok(())
    }
}

/// A β-ordered copy of a population vector. `permutation[k]` is the
/// original level index placed at position `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaOrdered {
    pub vector: PopulationVector,
    pub permutation: Vec<usize>,
}

/// Stable sort by non-increasing `p_i / e^{-β_b E_i}`.
pub fn beta_order(p: &PopulationVector) -> BetaOrdered {
    let permutation = beta_permutation(p);
    let vector = PopulationVector {
        populations: permutation.iter().map(|&i| p.populations[i]).collect(),
        level_energies: permutation.iter().map(|&i| p.level_energies[i]).collect(),
        bath_beta: p.bath_beta,
    };
    BetaOrdered { vector, permutation }
}

pub(crate) fn beta_permutation(p: &PopulationVector) -> Vec<usize> {
    let ratios = p.ratios();
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]));
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoCurve {
    pub vertices: Vec<(f64, f64)>,
    pub normalized: bool,
}

impl ThermoCurve {
    pub fn final_x(&self) -> f64 {
        self.vertices.last().map_or(0.0, |v| v.0)
    }

    /// Curve with x rescaled to end at one.
    pub fn normalize(&self) -> ThermoCurve {
        if self.normalized {
            return self.clone();
        }
        let z = self.final_x();
        ThermoCurve {
            vertices: self.vertices.iter().map(|&(x, y)| (x / z, y)).collect(),
            normalized: true,
        }
    }

    /// Drops interior vertices where the slope does not change.
    pub fn simplified(&self) -> ThermoCurve {
        let v = &self.vertices;
        if v.len() <= 2 {
            return self.clone();
        }
        let mut out = vec![v[0]];
        for k in 1..v.len() - 1 {
            let prev = *out.last().unwrap();
            let (x, y) = v[k];
            let next = v[k + 1];
            let cross = (x - prev.0) * (next.1 - prev.1) - (y - prev.1) * (next.0 - prev.0);
            let scale = (next.0 - prev.0).abs().max(next.1 - prev.1).max(1e-300);
            if cross.abs() > 1e-12 * scale {
                out.push((x, y));
            }
        }
        out.push(*v.last().unwrap());
        ThermoCurve { vertices: out, normalized: self.normalized }
    }

    /// Segment slopes, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }
}

/// Curve of `p`, β-ordering it first.
pub fn build_curve(p: &PopulationVector, normalize: bool) -> ThermoCurve {
    let ordered = beta_order(p);
    let weights = ordered.vector.bath_weights();
    let mut vertices = Vec::with_capacity(p.len() + 1);
    let (mut x, mut y) = (0.0, 0.0);
    vertices.push((x, y));
    for (g, q) in weights.iter().zip(ordered.vector.populations()) {
        x += g;
        y += q;
        vertices.push((x, y));
    }
    let curve = ThermoCurve { vertices, normalized: false };
    if normalize {
        curve.normalize()
    } else {
        curve
    }
}

/// Linear interpolation of the curve at `x`.
pub fn curve_height_at(c: &ThermoCurve, x: f64) -> Result<f64> {
    let end = c.final_x();
    let slack = 1e-12 * end.max(1.0);
    if !(x >= -slack && x <= end + slack) {
        return domain(format!("x = {x} outside the curve's range [0, {end}]"));
    }
    Ok(height_unchecked(&c.vertices, x.clamp(0.0, end)))
}

pub(crate) fn height_unchecked(v: &[(f64, f64)], x: f64) -> f64 {
    // first vertex with vx >= x
    let k = v.partition_point(|&(vx, _)| vx < x);
    if k == 0 {
        return v[0].1;
    }
    if k >= v.len() {
        return v[v.len() - 1].1;
    }
    let (x0, y0) = v[k - 1];
    let (x1, y1) = v[k];
    if x1 <= x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Largest amount by which `lower` rises above `upper`, and where.
/// Evaluated at the union of both curves' vertices; both must share an x scale.
pub fn curve_deficit(upper: &ThermoCurve, lower: &ThermoCurve) -> (f64, f64) {
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for &(x, y) in &lower.vertices {
        let d = y - height_unchecked(&upper.vertices, x);
        if d > worst.0 {
            worst = (d, x);
        }
    }
    for &(x, y) in &upper.vertices {
        let d = height_unchecked(&lower.vertices, x) - y;
        if d > worst.0 {
            worst = (d, x);
        }
    }
    worst
}

/// Outcome of a thermo-majorization test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Majorization {
    pub holds: bool,
    /// Normalized x of the worst violation when `holds` is false.
    pub witness: Option<f64>,
    /// Largest height by which the second curve exceeds the first (≤ 0 when
    /// the first strictly dominates).
    pub max_deficit: f64,
}

/// Decides `p ≻_th q` with tolerance [`CURVE_TOL`] on heights.
pub fn thermo_majorizes(p: &PopulationVector, q: &PopulationVector) -> Result<Majorization> {
    p.compatible_with(q)?;
    let cp = build_curve(p, false);
    let cq = build_curve(q, false);
    Ok(compare_curves(&cp, &cq))
}

pub(crate) fn compare_curves(upper: &ThermoCurve, lower: &ThermoCurve) -> Majorization {
    let (deficit, x) = curve_deficit(upper, lower);
    let holds = deficit <= CURVE_TOL;
    Majorization {
        holds,
        witness: (!holds).then(|| x / upper.final_x()),
        max_deficit: deficit,
    }
}

/// Replaces every degenerate-energy principal submatrix with its eigenvalues.
///
/// Levels outside degenerate subspaces keep their diagonal entry. Blocks with
/// no off-diagonal weight are passed through unchanged. Eigenvalues are placed
/// in non-increasing order at the block's levels, in label order.
pub fn block_diagonalize_zero_mode(m: &DensityMatrix, bath_beta: f64) -> Result<PopulationVector> {
    check_hermitian(m.entries().view())?;
    let populations = zero_mode_populations(m.entries(), m.spectrum());
    PopulationVector::new(populations, m.spectrum().energies(), bath_beta)
}

pub(crate) fn zero_mode_populations(
    entries: &ndarray::Array2<num_complex::Complex64>,
    spectrum: &EnergySpectrum,
) -> Vec<f64> {
    let mut populations: Vec<f64> = (0..spectrum.dim()).map(|i| entries[[i, i]].re).collect();
    for group in spectrum.degenerate_groups() {
        if group.len() < 2 {
            continue;
        }
        let coherent = group
            .iter()
            .any(|&a| group.iter().any(|&b| a != b && entries[[a, b]].norm() > 0.0));
        if !coherent {
            continue;
        }
        let block = ndarray::Array2::from_shape_fn((group.len(), group.len()), |(w, v)| {
            entries[[group[w], group[v]]]
        });
        for (&level, value) in group.iter().zip(hermitian_eigenvalues(block.view())) {
            populations[level] = value;
        }
    }
    populations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{gibbs_weights, QubitLevels};
    use crate::states::{build_pair, CorrelationSpec, Strength};
    use crate::temperature::Temperature;

    // mpmath values, E_g = 0, E_e = 0.05 eV, bath 0 °C, local 60 °C
    const PE_60: f64 = 0.149_105_299_813_940;
    const W_EE_0C: f64 = 0.014_287_004_226_077;
    const W_GE_0C: f64 = 0.119_528_257_019_320;
    const Z_PAIR_0C: f64 = 1.253_343_518_264_717;

    fn qubit() -> QubitLevels {
        QubitLevels::new(0.0, 0.05).unwrap()
    }
    fn beta(c: f64) -> f64 {
        Temperature::celsius(c).to_beta().unwrap()
    }
    fn pair(corr: CorrelationSpec, c: f64) -> DensityMatrix {
        build_pair(qubit(), beta(c), corr).unwrap()
    }
    fn diag(m: &DensityMatrix) -> PopulationVector {
        PopulationVector::from_diagonal(m, beta(0.0)).unwrap()
    }

    #[test]
    fn bath_weight_constants() {
        let s = EnergySpectrum::new(qubit(), 2).unwrap();
        let g = gibbs_weights(&s, beta(0.0)).unwrap();
        assert!((g.weights[1] - W_GE_0C).abs() < 1e-14);
        assert!((g.weights[3] - W_EE_0C).abs() < 1e-14);
        assert!((g.partition_function - Z_PAIR_0C).abs() < 1e-14);
    }

    #[test]
    fn gibbs_order_is_identity() {
        let s = EnergySpectrum::new(qubit(), 3).unwrap();
        let g = PopulationVector::thermal(&s, beta(0.0), beta(0.0)).unwrap();
        let o = beta_order(&g);
        let r = g.ratios();
        assert!(r.iter().all(|x| (x - r[0]).abs() < 1e-12));
        // equal ratios up to rounding; sort is stable only on exact ties, so
        // compare curves rather than the permutation.
        let c = build_curve(&g, true).simplified();
        assert_eq!(c.vertices.len(), 2);
        assert!((c.vertices[1].0 - 1.0).abs() < 1e-12 && (c.vertices[1].1 - 1.0).abs() < 1e-12);
        assert_eq!(o.permutation.len(), 8);
    }

    #[test]
    fn classical_pair_order_and_ratios() {
        let p = diag(&pair(CorrelationSpec::classical(), 60.0));
        let o = beta_order(&p);
        assert_eq!(o.permutation, [3, 0, 1, 2]); // ee, gg, ge, eg
        let r = o.vector.ratios();
        assert!((r[0] - PE_60 / W_EE_0C).abs() < 1e-9);
        assert!((r[0] - 10.4364).abs() < 1e-3);
        assert!((r[1] - (1.0 - PE_60)).abs() < 1e-12);
        assert_eq!(&r[2..], [0.0, 0.0]);
    }

    #[test]
    fn hot_product_orders_by_descending_energy() {
        let p = diag(&pair(CorrelationSpec::product(), 136.7));
        assert_eq!(beta_order(&p).permutation, [3, 1, 2, 0]);
    }

    #[test]
    fn classical_pair_first_vertex() {
        let c = build_curve(&diag(&pair(CorrelationSpec::classical(), 60.0)), true);
        let (x, y) = c.vertices[1];
        assert!((x - W_EE_0C / Z_PAIR_0C).abs() < 1e-12);
        assert!((x - 0.011_399_112_867_203).abs() < 1e-12);
        assert!((y - PE_60).abs() < 1e-12);
        let last = *c.vertices.last().unwrap();
        assert!((last.0 - 1.0).abs() < 1e-12 && (last.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discord_first_vertex_and_binding_height() {
        let m = pair(CorrelationSpec::discord(Strength::Max), 60.0);
        let p = block_diagonalize_zero_mode(&m, beta(0.0)).unwrap();
        let c = build_curve(&p, false);
        let (x, y) = c.vertices[1];
        assert!((x - W_GE_0C).abs() < 1e-12);
        assert!((y - 2.0 * PE_60 * (1.0 - PE_60)).abs() < 1e-12);
        assert!((y - 0.253_745_818_762_670).abs() < 1e-12);
        // height at the product curve's first x
        let h = curve_height_at(&c, W_EE_0C).unwrap();
        assert!((h - 0.030_329_795_442_642).abs() < 1e-12);
    }

    #[test]
    fn curve_endpoints_and_range() {
        let c = build_curve(&diag(&pair(CorrelationSpec::classical(), 60.0)), true);
        assert_eq!(curve_height_at(&c, 0.0).unwrap(), 0.0);
        assert!((curve_height_at(&c, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(curve_height_at(&c, 1.01).is_err());
        assert!(curve_height_at(&c, -0.1).is_err());
    }

    #[test]
    fn classical_versus_products() {
        let c = diag(&pair(CorrelationSpec::classical(), 60.0));
        assert!(thermo_majorizes(&c, &c).unwrap().holds);
        let at = diag(&pair(CorrelationSpec::product(), 136.70));
        let m = thermo_majorizes(&c, &at).unwrap();
        assert!(m.holds, "{m:?}");
        // contact: the margin is close to zero
        assert!(m.max_deficit > -1e-4);
        let hot = diag(&pair(CorrelationSpec::product(), 138.0));
        let m = thermo_majorizes(&c, &hot).unwrap();
        assert!(!m.holds);
        // third product vertex, x = (w_ee + 2 w_ge) / Z
        let x3 = (W_EE_0C + 2.0 * W_GE_0C) / Z_PAIR_0C;
        assert!((m.witness.unwrap() - x3).abs() < 1e-9);
        // product height 0.353649 exceeds the classical curve's 0.352517
        assert!((m.max_deficit - (0.353_649_326_760_354 - 0.352_517_220_654_374)).abs() < 1e-9);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let c = diag(&pair(CorrelationSpec::classical(), 60.0));
        let other_bath = PopulationVector::from_diagonal(&pair(CorrelationSpec::classical(), 60.0), beta(10.0)).unwrap();
        assert!(thermo_majorizes(&c, &other_bath).is_err());
        let s3 = EnergySpectrum::new(qubit(), 3).unwrap();
        let g3 = PopulationVector::thermal(&s3, 1.0, beta(0.0)).unwrap();
        assert!(thermo_majorizes(&c, &g3).is_err());
    }

    #[test]
    fn block_diagonalization_examples() {
        // diagonal input passes through
        let c = pair(CorrelationSpec::classical(), 60.0);
        assert_eq!(block_diagonalize_zero_mode(&c, beta(0.0)).unwrap().populations(), c.diagonal());
        // discord block gives P_gP_e ± λ
        let lam = 0.05;
        let d = pair(CorrelationSpec::discord(Strength::Value(lam)), 60.0);
        let p = block_diagonalize_zero_mode(&d, beta(0.0)).unwrap();
        let pgpe = PE_60 * (1.0 - PE_60);
        assert!((p.populations()[1] - (pgpe + lam)).abs() < 1e-14);
        assert!((p.populations()[2] - (pgpe - lam)).abs() < 1e-14);
        // entangled coherence is not in the zero mode
        let e = pair(CorrelationSpec::entangled(Strength::Max), 60.0);
        let p = block_diagonalize_zero_mode(&e, beta(0.0)).unwrap();
        assert_eq!(p.populations(), c.diagonal());
    }

    #[test]
    fn slopes_of_built_curves_are_non_increasing() {
        for corr in [CorrelationSpec::classical(), CorrelationSpec::product(), CorrelationSpec::discord(Strength::Max)] {
            let p = block_diagonalize_zero_mode(&pair(corr, 60.0), beta(0.0)).unwrap();
            let s = build_curve(&p, false).slopes();
            assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{s:?}");
        }
    }
}
