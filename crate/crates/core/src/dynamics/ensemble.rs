use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    classical_rates, lindblad_evolve, propagate_trajectory, rate_equation_evolve, validate_times, DensityMatrix,
    PopulationSeries, StateVector,
};
use crate::error::{invalid, Result};
use crate::model::{build_coupling_matrix, sample_disorder, DisorderProfile, NetworkSpec};
use crate::noise::{
    energy_cost, generate_telegraph, synthesize_gaussian, EnergyCost, NoiseTrajectory, SpectrumSpec, TelegraphSpec,
};
use crate::parallel::{map_indexed, Workers};
use crate::seed;

/// How static disorder is chosen for each realization.
#[derive(Debug, Clone, PartialEq)]
pub enum DisorderPolicy {
    /// The same profile for every realization.
    Fixed(DisorderProfile),
    /// Fresh uniform draw on `[−b_max, b_max]` per realization, seeded by
    /// `(seed, realization index)`.
    Resample { b_max: f64, seed: u64 },
}

impl DisorderPolicy {
    pub fn profile(&self, n_sites: usize, realization: usize) -> Result<DisorderProfile> {
        match self {
            DisorderPolicy::Fixed(p) => Ok(p.clone()),
            DisorderPolicy::Resample { b_max, seed } => sample_disorder(
                n_sites,
                *b_max,
                seed::derive(*seed, seed::domain::DISORDER, realization as u64),
            ),
        }
    }
}

/// What drives the excitation in each realization. Rates are in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evolution {
    /// Static disorder only.
    Coherent,
    /// Coin-toss noise with white-noise rate `gamma`, flipping every `dt_flip`.
    Telegraph { gamma: f64, dt_flip: f64 },
    /// Gaussian noise on `n_samples` grid points over `t_max`.
    Gaussian { spectrum: SpectrumSpec, n_samples: usize },
    /// Ideal Markovian dephasing via the Lindblad equation.
    Lindblad { gamma: f64 },
    /// Adiabatically eliminated rate equation.
    RateEquation { gamma: f64 },
}

impl Evolution {
    pub fn label(&self) -> &'static str {
        match self {
            Evolution::Coherent => "coherent",
            Evolution::Telegraph { .. } => "telegraph",
            Evolution::Gaussian { .. } => "gaussian",
            Evolution::Lindblad { .. } => "lindblad",
            Evolution::RateEquation { .. } => "rate_equation",
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(self, Evolution::Telegraph { .. } | Evolution::Gaussian { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleOptions {
    pub n_realizations: usize,
    pub master_seed: u64,
    pub workers: Workers,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleMetadata {
    pub network: NetworkSpec,
    pub evolution: Evolution,
    pub master_seed: u64,
    /// Seed of each realization's disorder profile.
    pub disorder_seeds: Vec<u64>,
    /// Seed of each realization's noise trajectory (empty for
    /// deterministic evolutions).
    pub noise_seeds: Vec<u64>,
}

/// Worst-case invariant deviations over all realizations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnsembleDiagnostics {
    pub max_norm_error: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// `max_t |Σ_i p_mean − 1|`.
    pub max_total_deviation: f64,
    /// Combined stderr of `Σ_i p_i` at the worst time, `√Σ_i se_i²`.
    pub combined_stderr_at_worst: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub time_grid: Vec<f64>,
    pub p_mean: DMatrix<f64>,
    pub p_stderr: DMatrix<f64>,
    pub n_realizations: usize,
    /// Per-realization populations in realization order.
    pub samples: Vec<PopulationSeries>,
    /// Per-realization disorder profiles.
    pub disorders: Vec<DisorderProfile>,
    /// Per-realization noise energy cost (stochastic evolutions only).
    pub energy_costs: Vec<EnergyCost>,
    pub metadata: EnsembleMetadata,
    pub diagnostics: EnsembleDiagnostics,
}

struct Realization {
    populations: PopulationSeries,
    disorder: DisorderProfile,
    cost: Option<EnergyCost>,
    noise_seed: Option<u64>,
    norm_error: f64,
    lindblad: Option<super::LindbladDiagnostics>,
}

/// Runs `n_realizations` independent realizations and aggregates mean and
/// standard error of `p_i(t)`.
///
/// Each realization's randomness is a pure function of `master_seed` (noise)
/// or of the disorder policy's seed (disorder) and the realization index,
/// and results are reduced in index order, so the output is identical for
/// any worker count.
pub fn run_ensemble(
    network: &NetworkSpec,
    disorder: &DisorderPolicy,
    evolution: &Evolution,
    options: &EnsembleOptions,
    output_times: &[f64],
) -> Result<EnsembleResult> {
    network.validate()?;
    validate_times(output_times)?;
    if options.n_realizations == 0 {
        return Err(invalid("n_realizations", "must be ≥ 1"));
    }
    validate_evolution(evolution)?;
    let coupling = build_coupling_matrix(network)?;
    let n = network.n_sites;
    let source = network.source_index();
    let t_noise = network.t_max.max(*output_times.last().unwrap());

    let realizations = map_indexed(options.n_realizations, options.workers, |r| {
        let profile = disorder.profile(n, r)?;
        let psi0 = StateVector::basis(n, source);
        let mut noise_seed = None;
        let mut noise: Option<NoiseTrajectory> = None;
        match evolution {
            Evolution::Telegraph { gamma, dt_flip } => {
                let s = seed::derive(options.master_seed, seed::domain::TELEGRAPH, r as u64);
                noise_seed = Some(s);
                let spec = TelegraphSpec::from_gamma(*gamma, *dt_flip, s)?;
                noise = Some(generate_telegraph(&spec, n, t_noise)?);
            }
            Evolution::Gaussian { spectrum, n_samples } => {
                let s = seed::derive(options.master_seed, seed::domain::GAUSSIAN, r as u64);
                noise_seed = Some(s);
                noise = Some(synthesize_gaussian(spectrum, *n_samples, t_noise, n, s)?);
            }
            _ => {}
        }
        let (populations, norm_error, lindblad) = match evolution {
            Evolution::Coherent | Evolution::Telegraph { .. } | Evolution::Gaussian { .. } => {
                let out = propagate_trajectory(&coupling, &profile, noise.as_ref(), &psi0, output_times)?;
                (out.populations, out.max_norm_error, None)
            }
            Evolution::Lindblad { gamma } => {
                let run = lindblad_evolve(&coupling, &profile, *gamma, &DensityMatrix::pure(&psi0), output_times)?;
                (run.populations, 0.0, Some(run.diagnostics))
            }
            Evolution::RateEquation { gamma } => {
                let rates = classical_rates(&coupling, &profile, *gamma)?;
                let mut p0 = vec![0.0; n];
                p0[source] = 1.0;
                (rate_equation_evolve(&rates, &p0, output_times)?, 0.0, None)
            }
        };
        Ok(Realization {
            populations,
            disorder: profile,
            cost: noise.as_ref().map(energy_cost),
            noise_seed,
            norm_error,
            lindblad,
        })
    })?;

    Ok(aggregate(network, evolution, options, output_times, realizations))
}

fn validate_evolution(evolution: &Evolution) -> Result<()> {
    match evolution {
        Evolution::Coherent => Ok(()),
        Evolution::Telegraph { gamma, dt_flip } => TelegraphSpec::from_gamma(*gamma, *dt_flip, 0).map(|_| ()),
        Evolution::Gaussian { spectrum, n_samples } => {
            spectrum.validate()?;
            if *n_samples < 2 {
                return Err(invalid("n_samples", format!("{n_samples} < 2")));
            }
            Ok(())
        }
        Evolution::Lindblad { gamma } => {
            if !(*gamma >= 0.0 && gamma.is_finite()) {
                return Err(invalid("gamma", format!("{gamma} must be nonnegative")));
            }
            Ok(())
        }
        Evolution::RateEquation { gamma } => {
            if !(*gamma > 0.0 && gamma.is_finite()) {
                return Err(invalid("gamma", format!("{gamma}: rate equation needs γ > 0")));
            }
            Ok(())
        }
    }
}

fn aggregate(
    network: &NetworkSpec,
    evolution: &Evolution,
    options: &EnsembleOptions,
    output_times: &[f64],
    realizations: Vec<Realization>,
) -> EnsembleResult {
    let n_sites = network.n_sites;
    let n_times = output_times.len();
    let count = realizations.len() as f64;

    let mut mean = DMatrix::zeros(n_sites, n_times);
    for r in &realizations {
        mean += &r.populations.values;
    }
    mean /= count;
    let mut stderr = DMatrix::zeros(n_sites, n_times);
    if realizations.len() > 1 {
        for r in &realizations {
            let d = &r.populations.values - &mean;
            stderr += d.component_mul(&d);
        }
        stderr = stderr.map(|v: f64| (v / (count - 1.0) / count).sqrt());
    }

    let mut diagnostics = EnsembleDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
    for r in &realizations {
        diagnostics.max_norm_error = diagnostics.max_norm_error.max(r.norm_error);
        if let Some(l) = r.lindblad {
            diagnostics.max_trace_error = diagnostics.max_trace_error.max(l.max_trace_error);
            diagnostics.max_hermiticity_error = diagnostics.max_hermiticity_error.max(l.max_hermiticity_error);
            diagnostics.min_eigenvalue = diagnostics.min_eigenvalue.min(l.min_eigenvalue);
        }
    }
    if !diagnostics.min_eigenvalue.is_finite() {
        diagnostics.min_eigenvalue = 0.0;
    }
    for k in 0..n_times {
        let dev = (mean.column(k).sum() - 1.0).abs();
        if dev >= diagnostics.max_total_deviation {
            diagnostics.max_total_deviation = dev;
            diagnostics.combined_stderr_at_worst = stderr.column(k).norm();
        }
    }

    let disorder_seeds = realizations.iter().map(|r| r.disorder.seed).collect();
    let noise_seeds = realizations.iter().filter_map(|r| r.noise_seed).collect();
    let energy_costs = if evolution.is_stochastic() {
        realizations.iter().filter_map(|r| r.cost).collect()
    } else {
        Vec::new()
    };
    let (samples, disorders) = realizations.into_iter().map(|r| (r.populations, r.disorder)).unzip();

    EnsembleResult {
        time_grid: output_times.to_vec(),
        p_mean: mean,
        p_stderr: stderr,
        n_realizations: options.n_realizations,
        samples,
        disorders,
        energy_costs,
        metadata: EnsembleMetadata {
            network: network.clone(),
            evolution: evolution.clone(),
            master_seed: options.master_seed,
            disorder_seeds,
            noise_seeds,
        },
        diagnostics,
    }
}

impl EnsembleResult {
    pub fn n_sites(&self) -> usize {
        self.p_mean.nrows()
    }

    pub fn mean_series(&self) -> PopulationSeries {
        PopulationSeries { times: self.time_grid.clone(), values: self.p_mean.clone() }
    }

    /// Columns: `time_s`, `site` (1-based), `p_mean`, `p_stderr`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time_s", "site", "p_mean", "p_stderr"])?;
        for (k, t) in self.time_grid.iter().enumerate() {
            for i in 0..self.n_sites() {
                w.write_record([
                    t.to_string(),
                    (i + 1).to_string(),
                    self.p_mean[(i, k)].to_string(),
                    self.p_stderr[(i, k)].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// JSON summary: specs, seeds, diagnostics and normalized efficiencies
    /// of the mean populations, integrated up to `t_max` or the end of the
    /// grid, whichever comes first.
    pub fn summary_json(&self) -> Result<serde_json::Value> {
        let t_end = self.time_grid.last().copied().unwrap_or(0.0);
        let window = self.metadata.network.t_max.min(t_end);
        let eta = if window > 0.0 {
            Some(crate::analysis::transport_efficiency(&self.mean_series(), window)?)
        } else {
            None
        };
        Ok(serde_json::json!({
            "metadata": self.metadata,
            "n_realizations": self.n_realizations,
            "diagnostics": self.diagnostics,
            "eta_window_s": window,
            "eta_normalized": eta.as_ref().map(|e| e.eta_normalized.clone()),
            "eta_raw_s": eta.as_ref().map(|e| e.eta_raw.clone()),
        }))
    }
}
