use nalgebra::{DMatrix, DVector};

use super::{validate_times, PopulationSeries};
use crate::error::{invalid, Error, Result};
use crate::model::{sorted_eigen, CouplingMatrix, DisorderProfile};

/// Classical hopping rates `Γ_ℓi` (rad/s), symmetric with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    values: DMatrix<f64>,
}

impl RateMatrix {
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(invalid("rates", "matrix is not square"));
        }
        let n = values.nrows();
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(invalid("rates", format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[(i, j)];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(invalid("rates", format!("entry ({i},{j}) = {v} must be ≥ 0")));
                }
                if v != values[(j, i)] {
                    return Err(invalid("rates", format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn n_sites(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// `Γ_ℓi = 2γ J_iℓ² / (4(B_i − B_ℓ)² + γ²)`, the adiabatic elimination of
/// coherences that dephase at rate `γ` under a detuning `2(B_i − B_ℓ)`.
pub fn classical_rates(coupling: &CouplingMatrix, disorder: &DisorderProfile, gamma: f64) -> Result<RateMatrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(
            "gamma",
            format!("{gamma}: rate equation needs a positive dephasing rate"),
        ));
    }
    let n = coupling.n_sites();
    if disorder.n_sites() != n {
        return Err(Error::Dimension { what: "disorder", expected: n, got: disorder.n_sites() });
    }
    let values = DMatrix::from_fn(n, n, |i, l| {
        if i == l {
            return 0.0;
        }
        let j = coupling.get(i, l);
        let db = disorder.b[i] - disorder.b[l];
        2.0 * gamma * j * j / (4.0 * db * db + gamma * gamma)
    });
    Ok(RateMatrix { values })
}

/// Solves `ṗ_i = Σ_{ℓ≠i} Γ_ℓi (p_ℓ − p_i)` by diagonalizing the symmetric
/// generator: `p(t) = V e^{Λt} Vᵀ p(0)`.
pub fn rate_equation_evolve(rates: &RateMatrix, p0: &[f64], output_times: &[f64]) -> Result<PopulationSeries> {
    let n = rates.n_sites();
    if p0.len() != n {
        return Err(Error::Dimension { what: "initial populations", expected: n, got: p0.len() });
    }
    if let Some(p) = p0.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(invalid("p0", format!("entry {p} must be ≥ 0")));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid("p0", format!("sums to {total}, not 1")));
    }
    validate_times(output_times)?;

    let mut generator = rates.values.clone();
    for i in 0..n {
        generator[(i, i)] = -rates.values.row(i).sum();
    }
    let eig = sorted_eigen(generator);
    let v = &eig.eigenvectors;
    let c0 = v.transpose() * DVector::from_column_slice(p0);

    let mut values = DMatrix::zeros(n, output_times.len());
    for (k, &t) in output_times.iter().enumerate() {
        let ct = DVector::from_iterator(n, (0..n).map(|m| c0[m] * (eig.eigenvalues[m] * t).exp()));
        let p = v * ct;
        for i in 0..n {
            values[(i, k)] = p[i].clamp(0.0, 1.0);
        }
    }
    PopulationSeries::new(output_times.to_vec(), values)
}
