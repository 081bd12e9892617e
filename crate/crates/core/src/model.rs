//! Spin network, static disorder and the single-excitation Hamiltonian.
//!
//! The Hilbert space is spanned by `|i⟩ = σ_i^+|⇓⟩`, one basis state per
//! site. Hopping enters as `⟨i|H|j⟩ = J_ij` (each unordered pair counted
//! once) and the on-site term as `⟨i|H|i⟩ = 2(B_i + W_i)`, the σ^z splitting
//! with the constant offset dropped. All energies are angular frequencies
//! with ħ = 1.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Geometry and time scales of the network. Site indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSpec {
    pub n_sites: usize,
    /// Nearest-neighbour hopping rate (rad/s).
    pub j_max: f64,
    pub alpha: f64,
    pub source_site: usize,
    pub target_sites: Vec<usize>,
    /// Evolution time (s).
    pub t_max: f64,
}

/// `(2π)·31 Hz`, inside the quoted 28–33 Hz range and consistent with
/// `t_max = 60 ms ≈ 11.7 / J_max`.
pub const DEFAULT_J_MAX: f64 = 2.0 * std::f64::consts::PI * 31.0;
pub const DEFAULT_ALPHA: f64 = 1.22;
pub const DEFAULT_T_MAX: f64 = 0.060;

impl Default for NetworkSpec {
    /// The ten-ion network: source 3, target 8.
    fn default() -> Self {
        Self {
            n_sites: 10,
            j_max: DEFAULT_J_MAX,
            alpha: DEFAULT_ALPHA,
            source_site: 3,
            target_sites: vec![8],
            t_max: DEFAULT_T_MAX,
        }
    }
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(invalid("n_sites", format!("{} < 2", self.n_sites)));
        }
        if !(self.j_max > 0.0 && self.j_max.is_finite()) {
            return Err(invalid("j_max", format!("{} must be positive", self.j_max)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", format!("{} must be positive", self.alpha)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", format!("{} must be positive", self.t_max)));
        }
        if !(1..=self.n_sites).contains(&self.source_site) {
            return Err(invalid(
                "source_site",
                format!("{} outside 1..={}", self.source_site, self.n_sites),
            ));
        }
        for (k, &t) in self.target_sites.iter().enumerate() {
            if !(1..=self.n_sites).contains(&t) {
                return Err(invalid(
                    "target_sites",
                    format!("{t} outside 1..={}", self.n_sites),
                ));
            }
            if self.target_sites[..k].contains(&t) {
                return Err(invalid("target_sites", format!("duplicate site {t}")));
            }
        }
        Ok(())
    }

    /// 0-based index of the source site.
    pub fn source_index(&self) -> usize {
        self.source_site - 1
    }
}

/// Symmetric power-law hopping matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    values: DMatrix<f64>,
}

impl CouplingMatrix {
    /// Wraps an arbitrary symmetric, zero-diagonal matrix.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(invalid("coupling", "matrix is not square"));
        }
        let n = values.nrows();
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(invalid("coupling", format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if values[(i, j)] != values[(j, i)] {
                    return Err(invalid("coupling", format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn n_sites(&self) -> usize {
        self.values.nrows()
    }

    /// Hopping between 0-based sites `i` and `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Largest absolute coupling.
    pub fn max_coupling(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `J_ij = j_max / |i − j|^α`.
pub fn build_coupling_matrix(spec: &NetworkSpec) -> Result<CouplingMatrix> {
    spec.validate()?;
    let n = spec.n_sites;
    let values = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            spec.j_max / (i.abs_diff(j) as f64).powf(spec.alpha)
        }
    });
    Ok(CouplingMatrix { values })
}

/// Static on-site energies `B_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderProfile {
    pub b: Vec<f64>,
    pub b_max: f64,
    pub seed: u64,
}

impl DisorderProfile {
    pub fn zero(n: usize) -> Self {
        Self::uniform(n, 0.0)
    }

    /// Every site shifted by the same `value`.
    pub fn uniform(n: usize, value: f64) -> Self {
        Self {
            b: vec![value; n],
            b_max: value.abs(),
            seed: 0,
        }
    }

    pub fn from_values(b: Vec<f64>) -> Self {
        let b_max = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Self { b, b_max, seed: 0 }
    }

    pub fn n_sites(&self) -> usize {
        self.b.len()
    }
}

/// Draws `B_i` i.i.d. uniform on `[−b_max, b_max]`.
pub fn sample_disorder(n: usize, b_max: f64, seed: u64) -> Result<DisorderProfile> {
    if !(b_max >= 0.0 && b_max.is_finite()) {
        return Err(invalid("b_max", format!("{b_max} must be nonnegative")));
    }
    let mut rng = seed::rng(seed::derive(seed, seed::domain::DISORDER, 0));
    let b = (0..n)
        .map(|_| {
            if b_max == 0.0 {
                0.0
            } else {
                rng.random_range(-b_max..=b_max)
            }
        })
        .collect();
    Ok(DisorderProfile { b, b_max, seed })
}

/// Single-excitation Hamiltonian. Every Hamiltonian this model produces is
/// real symmetric, so it is stored as a real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    values: DMatrix<f64>,
}

pub const HERMITICITY_TOL: f64 = 1e-12;

impl HamiltonianMatrix {
    /// Accepts any real matrix that is symmetric to [`HERMITICITY_TOL`]
    /// relative to its largest entry.
    pub fn try_from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(invalid("hamiltonian", "matrix is not square"));
        }
        let asym = relative_asymmetry(&values);
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self { values })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.values.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn relative_asymmetry(&self) -> f64 {
        relative_asymmetry(&self.values)
    }
}

fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// `H_ij = J_ij` off the diagonal, `H_ii = 2(B_i + w_i)`.
pub fn assemble_hamiltonian(
    coupling: &CouplingMatrix,
    disorder: &DisorderProfile,
    w: &[f64],
) -> Result<HamiltonianMatrix> {
    let n = coupling.n_sites();
    if disorder.n_sites() != n {
        return Err(Error::Dimension {
            what: "disorder",
            expected: n,
            got: disorder.n_sites(),
        });
    }
    if w.len() != n {
        return Err(Error::Dimension {
            what: "noise vector",
            expected: n,
            got: w.len(),
        });
    }
    let mut values = coupling.values.clone();
    for i in 0..n {
        values[(i, i)] = 2.0 * (disorder.b[i] + w[i]);
    }
    Ok(HamiltonianMatrix { values })
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// (columns).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenSystem {
    /// `‖V Λ Vᵀ − H‖_F`.
    pub fn reconstruction_error(&self, h: &HamiltonianMatrix) -> f64 {
        let v = &self.eigenvectors;
        let recon = v * DMatrix::from_diagonal(&self.eigenvalues) * v.transpose();
        (recon - h.matrix()).norm()
    }

    /// `‖VᵀV − 1‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.eigenvectors.ncols();
        (self.eigenvectors.transpose() * &self.eigenvectors - DMatrix::identity(n, n)).norm()
    }
}

pub fn eigensystem(h: &HamiltonianMatrix) -> Result<EigenSystem> {
    let asym = h.relative_asymmetry();
    if asym > HERMITICITY_TOL {
        return Err(Error::NotHermitian(asym));
    }
    Ok(sorted_eigen(h.values.clone()))
}

pub(crate) fn sorted_eigen(m: DMatrix<f64>) -> EigenSystem {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

/// All `|λ_k − λ_l|`, `k < l`, sorted ascending. Degenerate pairs give zeros.
pub fn difference_frequencies(es: &EigenSystem) -> Vec<f64> {
    let ev = &es.eigenvalues;
    let n = ev.len();
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for k in 0..n {
        for l in (k + 1)..n {
            out.push((ev[k] - ev[l]).abs());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_spec(n: usize) -> NetworkSpec {
        NetworkSpec {
            n_sites: n,
            j_max: 1.0,
            alpha: 1.22,
            source_site: 1,
            target_sites: vec![],
            t_max: 1.0,
        }
    }

    #[test]
    fn coupling_values() {
        let c = build_coupling_matrix(&unit_spec(10)).unwrap();
        // 1-based (3,4), (1,3), (1,10)
        assert_eq!(c.get(2, 3), 1.0);
        // 2^-1.22 and 9^-1.22, evaluated independently
        assert_relative_eq!(c.get(0, 2), 0.429_282_718_218_876_87, max_relative = 1e-12);
        assert_relative_eq!(c.get(0, 9), 0.068_521_070_371_341_81, max_relative = 1e-12);
        let min = c
            .matrix()
            .iter()
            .filter(|v| **v > 0.0)
            .fold(f64::INFINITY, |a, &b| a.min(b));
        assert_eq!(min, c.get(0, 9));
    }

    #[test]
    fn coupling_invariants() {
        let c = build_coupling_matrix(&unit_spec(12)).unwrap();
        let n = c.n_sites();
        for i in 0..n {
            assert_eq!(c.get(i, i), 0.0);
            for j in 0..n {
                assert_eq!(c.get(i, j), c.get(j, i));
                for k in 0..n {
                    for l in 0..n {
                        if i != j && k != l && i.abs_diff(j) < k.abs_diff(l) {
                            assert!(c.get(i, j) > c.get(k, l));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = unit_spec(1);
        assert!(build_coupling_matrix(&s).is_err());
        s = unit_spec(4);
        s.j_max = 0.0;
        assert!(s.validate().is_err());
        s = unit_spec(4);
        s.source_site = 5;
        assert!(s.validate().is_err());
        s = unit_spec(4);
        s.target_sites = vec![2, 2];
        assert!(s.validate().is_err());
        s.target_sites = vec![2, 4];
        assert!(s.validate().is_ok());
        assert!(NetworkSpec::default().validate().is_ok());
    }

    #[test]
    fn disorder_degenerate_and_deterministic() {
        let d = sample_disorder(10, 0.0, 5).unwrap();
        assert!(d.b.iter().all(|&b| b == 0.0));
        let a = sample_disorder(10, 2.5, 99).unwrap();
        let b = sample_disorder(10, 2.5, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.b.iter().all(|b| b.abs() <= 2.5));
        assert_ne!(a.b, sample_disorder(10, 2.5, 100).unwrap().b);
        assert!(sample_disorder(3, -1.0, 0).is_err());
    }

    #[test]
    fn disorder_moments() {
        let n = 100_000;
        let d = sample_disorder(n, 1.0, 2024).unwrap();
        let mean = d.b.iter().sum::<f64>() / n as f64;
        let var = d.b.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 * (1.0 / 3f64.sqrt()) / (n as f64).sqrt());
        assert!((var - 1.0 / 3.0).abs() < 0.05 / 3.0);
    }

    #[test]
    fn hamiltonian_assembly() {
        let c = build_coupling_matrix(&unit_spec(4)).unwrap();
        let h = assemble_hamiltonian(&c, &DisorderProfile::zero(4), &[0.0; 4]).unwrap();
        assert_eq!(h.matrix(), c.matrix());

        let mut b = vec![0.0; 4];
        b[0] = 1.0;
        let h = assemble_hamiltonian(&c, &DisorderProfile::from_values(b), &[0.0; 4]).unwrap();
        assert_eq!(h.matrix()[(0, 0)], 2.0);

        let h = assemble_hamiltonian(&c, &DisorderProfile::zero(4), &[0.5, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.matrix()[(0, 0)], 1.0);
        assert_eq!(h.relative_asymmetry(), 0.0);

        assert!(assemble_hamiltonian(&c, &DisorderProfile::zero(3), &[0.0; 4]).is_err());
        assert!(assemble_hamiltonian(&c, &DisorderProfile::zero(4), &[0.0; 3]).is_err());
    }

    #[test]
    fn global_shift_moves_spectrum() {
        let c = build_coupling_matrix(&unit_spec(6)).unwrap();
        let h0 = assemble_hamiltonian(&c, &DisorderProfile::zero(6), &[0.0; 6]).unwrap();
        let hc = assemble_hamiltonian(&c, &DisorderProfile::uniform(6, 0.7), &[0.0; 6]).unwrap();
        let e0 = eigensystem(&h0).unwrap();
        let ec = eigensystem(&hc).unwrap();
        for k in 0..6 {
            assert_relative_eq!(ec.eigenvalues[k], e0.eigenvalues[k] + 1.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_site_spectrum() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, 0.8, 0.0]);
        let es = eigensystem(&HamiltonianMatrix::try_from_matrix(m).unwrap()).unwrap();
        assert_relative_eq!(es.eigenvalues[0], -0.8, epsilon = 1e-14);
        assert_relative_eq!(es.eigenvalues[1], 0.8, epsilon = 1e-14);
        let df = difference_frequencies(&es);
        assert_eq!(df.len(), 1);
        assert_relative_eq!(df[0], 1.6, epsilon = 1e-14);
    }

    #[test]
    fn diagonal_spectrum_is_sorted_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0, -1.0]));
        let es = eigensystem(&HamiltonianMatrix::try_from_matrix(m).unwrap()).unwrap();
        assert_eq!(es.eigenvalues.as_slice(), &[-1.0, -1.0, 2.0, 3.0]);
        let df = difference_frequencies(&es);
        assert_eq!(df.len(), 6);
        assert_eq!(df[0], 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(
            HamiltonianMatrix::try_from_matrix(m),
            Err(Error::NotHermitian(_))
        ));
        assert!(CouplingMatrix::from_matrix(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, 0.5, 0.0]
        ))
        .is_err());
    }

    #[test]
    fn default_network_reconstruction() {
        let spec = NetworkSpec::default();
        let c = build_coupling_matrix(&spec).unwrap();
        let d = sample_disorder(10, 2.5 * spec.j_max, 3).unwrap();
        let h = assemble_hamiltonian(&c, &d, &[0.0; 10]).unwrap();
        let es = eigensystem(&h).unwrap();
        assert!(es.reconstruction_error(&h) < 1e-9 * h.norm());
        assert!(es.orthonormality_error() < 1e-9);
        for k in 0..10 {
            let v = es.eigenvectors.column(k);
            let r = (h.matrix() * v - v * es.eigenvalues[k]).norm();
            assert!(r < 1e-9 * h.norm());
        }
        let sum: f64 = es.eigenvalues.iter().sum();
        assert_relative_eq!(sum, h.trace(), max_relative = 1e-9, epsilon = 1e-9 * h.norm());
        assert!(es.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(difference_frequencies(&es).len(), 45);
    }
}
