//! Propagation of the single excitation.
//!
//! Three levels of description share the [`PopulationSeries`] output type:
//! pure-state trajectories under a piecewise-constant noisy Hamiltonian,
//! the Lindblad dephasing master equation, and the classical rate equation
//! obtained by eliminating coherences.

mod coherence;
mod ensemble;
mod lindblad;
mod rates;
mod trajectory;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use coherence::{coherence_envelope, phase_factor, CoherenceEnvelope};
pub use ensemble::{
    run_ensemble, DisorderPolicy, EnsembleDiagnostics, EnsembleMetadata, EnsembleOptions,
    EnsembleResult, Evolution,
};
pub use lindblad::{lindblad_evolve, lindblad_evolve_rates, LindbladDiagnostics, LindbladRun};
pub use rates::{classical_rates, rate_equation_evolve, RateMatrix};
pub use trajectory::{propagate_states, propagate_trajectory, TrajectoryOutput};

pub const NORM_TOL: f64 = 1e-9;

/// Single-excitation amplitudes `ψ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let amplitudes = DVector::from_vec(amplitudes);
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { amplitudes })
    }

    /// `|site⟩`, 0-based.
    pub fn basis(n: usize, site: usize) -> Self {
        let mut amplitudes = DVector::zeros(n);
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub(crate) fn from_raw(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Single-excitation density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    values: DMatrix<Complex64>,
}

pub const DENSITY_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self {
            values: a * a.adjoint(),
        }
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(values: DMatrix<Complex64>) -> Result<Self> {
        if !values.is_square() {
            return Err(invalid("density matrix", "not square"));
        }
        let rho = Self { values };
        let herm = rho.hermiticity_error();
        if herm > DENSITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace_error();
        if tr > DENSITY_TOL {
            return Err(invalid("density matrix", format!("trace deviates from 1 by {tr:e}")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(invalid("density matrix", format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(values: DMatrix<Complex64>) -> Self {
        Self { values }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[(i, j)]
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.values[(i, i)].re).collect()
    }

    /// `|tr ρ − 1|`.
    pub fn trace_error(&self) -> f64 {
        (self.values.trace() - Complex64::new(1.0, 0.0)).norm()
    }

    /// `max |ρ_ij − ρ_ji*|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.values[(i, j)] - self.values[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.values + self.values.adjoint()) * Complex64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// `p_i(t)` on a time grid: `values[(site, time_index)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSeries {
    pub times: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl PopulationSeries {
    pub fn new(times: Vec<f64>, values: DMatrix<f64>) -> Result<Self> {
        if values.ncols() != times.len() {
            return Err(Error::Dimension {
                what: "population columns",
                expected: times.len(),
                got: values.ncols(),
            });
        }
        Ok(Self { times, values })
    }

    /// Builds a series from per-time population vectors.
    pub fn from_columns(times: Vec<f64>, columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let mut values = DMatrix::zeros(n, columns.len());
        for (k, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Dimension {
                    what: "population vector",
                    expected: n,
                    got: col.len(),
                });
            }
            for (i, &p) in col.iter().enumerate() {
                values[(i, k)] = p;
            }
        }
        Self::new(times, values)
    }

    pub fn n_sites(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Populations of 0-based `site` over time.
    pub fn site(&self, site: usize) -> Vec<f64> {
        self.values.row(site).iter().copied().collect()
    }

    /// Populations at time index `k`.
    pub fn at(&self, k: usize) -> Vec<f64> {
        self.values.column(k).iter().copied().collect()
    }

    /// `max_t |Σ_i p_i(t) − 1|`.
    pub fn max_total_deviation(&self) -> f64 {
        (0..self.n_times())
            .map(|k| (self.values.column(k).sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |p − q|` over all sites and times.
    pub fn max_abs_diff(&self, other: &PopulationSeries) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Columns: `time_s`, `site` (1-based), `p`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time_s", "site", "p"])?;
        for (k, t) in self.times.iter().enumerate() {
            for i in 0..self.n_sites() {
                w.write_record([t.to_string(), (i + 1).to_string(), self.values[(i, k)].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `0, step, 2·step, …` up to `t_end`; `t_end` itself is always included.
pub fn uniform_times(t_end: f64, step: f64) -> Result<Vec<f64>> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("{t_end} must be nonnegative")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("output step", format!("{step} must be positive")));
    }
    let ratio = t_end / step;
    let n = ratio.round();
    if (ratio - n).abs() < 1e-9 * ratio.max(1.0) {
        return Ok((0..=n as usize).map(|k| k as f64 * step).collect());
    }
    let mut times: Vec<f64> = (0..=ratio.floor() as usize).map(|k| k as f64 * step).collect();
    times.push(t_end);
    Ok(times)
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::TimeGrid("no output times".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::TimeGrid("output times must be finite and ≥ 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::TimeGrid("output times must be nondecreasing".into()));
    }
    Ok(())
}
