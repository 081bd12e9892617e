use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use super::{validate_times, DensityMatrix, PopulationSeries, DENSITY_TOL, POSITIVITY_TOL};
use crate::error::{invalid, Error, Result};
use crate::model::{CouplingMatrix, DisorderProfile};

/// Worst invariant deviations observed at the output times.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct LindbladDiagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Integration step actually used (s).
    pub step: f64,
}

impl LindbladDiagnostics {
    pub fn passes(&self) -> bool {
        self.max_trace_error <= DENSITY_TOL
            && self.max_hermiticity_error <= DENSITY_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

#[derive(Debug, Clone)]
pub struct LindbladRun {
    pub states: Vec<DensityMatrix>,
    pub populations: PopulationSeries,
    pub diagnostics: LindbladDiagnostics,
}

/// `ρ̇ = −i[H, ρ] + ℒρ` with uniform dephasing rate `gamma` on every site.
pub fn lindblad_evolve(
    coupling: &CouplingMatrix,
    disorder: &DisorderProfile,
    gamma: f64,
    rho0: &DensityMatrix,
    output_times: &[f64],
) -> Result<LindbladRun> {
    let rates = vec![gamma; coupling.n_sites()];
    lindblad_evolve_rates(coupling, disorder, &rates, rho0, output_times)
}

const MAX_REFINEMENTS: usize = 3;

/// Per-site dephasing rates `γ_i`: populations are untouched by ℒ and each
/// coherence `ρ_ij` decays at `(γ_i + γ_j)/2`.
///
/// Fixed-step RK4 with `h ≤ 1/(50·max(J_max, γ_max, 2B_max, R))`, where `R`
/// is the Gershgorin bound on the spectrum of `H`. If an invariant check
/// fails the step is halved, up to three times.
pub fn lindblad_evolve_rates(
    coupling: &CouplingMatrix,
    disorder: &DisorderProfile,
    gammas: &[f64],
    rho0: &DensityMatrix,
    output_times: &[f64],
) -> Result<LindbladRun> {
    let n = coupling.n_sites();
    if disorder.n_sites() != n {
        return Err(Error::Dimension { what: "disorder", expected: n, got: disorder.n_sites() });
    }
    if gammas.len() != n {
        return Err(Error::Dimension { what: "dephasing rates", expected: n, got: gammas.len() });
    }
    if rho0.dim() != n {
        return Err(Error::Dimension { what: "initial density matrix", expected: n, got: rho0.dim() });
    }
    if let Some(g) = gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(invalid("gamma", format!("{g} must be nonnegative")));
    }
    validate_times(output_times)?;

    let mut h = DMatrix::from_fn(n, n, |i, j| Complex64::new(coupling.get(i, j), 0.0));
    for i in 0..n {
        h[(i, i)] = Complex64::new(2.0 * disorder.b[i], 0.0);
    }
    let damping = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.5 * (gammas[i] + gammas[j]) });

    let gershgorin = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let gamma_max = gammas.iter().copied().fold(0.0, f64::max);
    let b_max = disorder.b.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
    let scale = coupling.max_coupling().max(gamma_max).max(2.0 * b_max).max(gershgorin);
    let mut h_max = if scale > 0.0 { 1.0 / (50.0 * scale) } else { f64::INFINITY };

    let mut last_diag = LindbladDiagnostics::default();
    for _ in 0..=MAX_REFINEMENTS {
        let run = integrate(&h, &damping, rho0, output_times, h_max);
        if run.diagnostics.passes() {
            return Ok(run);
        }
        last_diag = run.diagnostics;
        h_max *= 0.5;
    }
    Err(Error::Invariant(format!(
        "Lindblad invariants not met after refinement: trace {:e}, hermiticity {:e}, min eigenvalue {:e}",
        last_diag.max_trace_error, last_diag.max_hermiticity_error, last_diag.min_eigenvalue
    )))
}

fn rhs(h: &DMatrix<Complex64>, damping: &DMatrix<f64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let comm = h * rho - rho * h;
    let mut out = comm * Complex64::new(0.0, -1.0);
    let n = rho.nrows();
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] -= rho[(i, j)] * damping[(i, j)];
        }
    }
    out
}

fn integrate(
    h: &DMatrix<Complex64>,
    damping: &DMatrix<f64>,
    rho0: &DensityMatrix,
    output_times: &[f64],
    h_max: f64,
) -> LindbladRun {
    let mut rho = rho0.matrix().clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(output_times.len());
    let mut diag = LindbladDiagnostics { min_eigenvalue: f64::INFINITY, step: 0.0, ..Default::default() };
    let half = Complex64::new(0.5, 0.0);
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    for &t_out in output_times {
        let span = t_out - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            diag.step = diag.step.max(dt);
            let cdt = Complex64::new(dt, 0.0);
            for _ in 0..steps {
                let k1 = rhs(h, damping, &rho);
                let k2 = rhs(h, damping, &(&rho + &k1 * (cdt * half)));
                let k3 = rhs(h, damping, &(&rho + &k2 * (cdt * half)));
                let k4 = rhs(h, damping, &(&rho + &k3 * cdt));
                rho += (k1 + k2 * two + k3 * two + k4) * (cdt * sixth);
            }
            t = t_out;
        }
        let state = DensityMatrix::from_raw(rho.clone());
        diag.max_trace_error = diag.max_trace_error.max(state.trace_error());
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(state.hermiticity_error());
        diag.min_eigenvalue = diag.min_eigenvalue.min(state.min_eigenvalue());
        states.push(state);
    }
    let columns: Vec<Vec<f64>> = states.iter().map(DensityMatrix::populations).collect();
    let populations = PopulationSeries::from_columns(output_times.to_vec(), &columns)
        .expect("columns built from states of equal dimension");
    LindbladRun { states, populations, diagnostics: diag }
}
