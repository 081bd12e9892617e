//! Checks that synthesized Gaussian noise reproduces its target spectrum.

use anyhow::Result;
use serde::Serialize;

use enaqt::noise::{estimate_spectrum, synthesize_gaussian, SpectrumEstimate, SpectrumKind, SpectrumSpec};
use enaqt::seed;

use crate::config::ExperimentConfig;

/// Realizations behind each estimated spectrum.
pub const SPECTRUM_REALIZATIONS: usize = 100;
/// Largest accepted relative error at a probe frequency.
pub const SPECTRUM_TOLERANCE: f64 = 0.10;

/// Ensemble periodogram of `SPECTRUM_REALIZATIONS` synthesized records.
/// Seeds are derived from `(master_seed, model index, realization)`.
pub fn ensemble_estimate(
    spec: &SpectrumSpec,
    n_samples: usize,
    t_total: f64,
    n_sites: usize,
    master_seed: u64,
    model: usize,
) -> Result<SpectrumEstimate> {
    let root = seed::derive(master_seed, seed::domain::GAUSSIAN, u64::MAX - model as u64);
    let trajs = (0..SPECTRUM_REALIZATIONS)
        .map(|r| synthesize_gaussian(spec, n_samples, t_total, n_sites, seed::derive(root, seed::domain::GAUSSIAN, r as u64)))
        .collect::<enaqt::Result<Vec<_>>>()?;
    Ok(estimate_spectrum(&trajs)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub omega: f64,
    pub target: f64,
    pub estimate: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub name: String,
    pub probes: Vec<Probe>,
    pub passed: bool,
}

/// Probe frequencies: `ω₀` and `ω₀ ± κ/2` for Lorentzians, a spread of
/// in-band points otherwise. Points where the target vanishes are skipped.
fn probe_frequencies(spec: &SpectrumSpec, nyquist: f64) -> Vec<f64> {
    let raw: Vec<f64> = match spec.kind {
        SpectrumKind::Lorentzian => vec![spec.omega0 - spec.kappa / 2.0, spec.omega0, spec.omega0 + spec.kappa / 2.0],
        SpectrumKind::Flat => vec![0.1 * nyquist, 0.5 * nyquist, 0.9 * nyquist],
        SpectrumKind::Tabulated => spec.table.iter().flatten().map(|p| p.0).collect(),
    };
    raw.into_iter().filter(|w| *w >= 0.0 && *w <= nyquist && spec.density(*w) > 0.0).collect()
}

pub fn validate_spectra(cfg: &ExperimentConfig) -> Result<Vec<ModelReport>> {
    let net = &cfg.network;
    let n_samples = cfg.noise.parameters.n_samples;
    let nyquist = std::f64::consts::PI * n_samples as f64 / net.t_max;
    let mut reports = Vec::new();
    for (k, model) in cfg.noise.spectra.iter().flatten().enumerate() {
        let spec = model.to_spec(net.j_max);
        let est = ensemble_estimate(&spec, n_samples, net.t_max, net.n_sites, cfg.run.master_seed, k)?;
        let mut probes: Vec<Probe> = Vec::new();
        for w in probe_frequencies(&spec, nyquist) {
            let (at, s) = est.nearest(w);
            if probes.iter().any(|p| p.omega == at) {
                continue;
            }
            let target = spec.density(at);
            probes.push(Probe { omega: at, target, estimate: s, relative_error: (s / target - 1.0).abs() });
        }
        let passed = probes.iter().all(|p| p.relative_error < SPECTRUM_TOLERANCE);
        reports.push(ModelReport { name: model.name.clone(), probes, passed });
    }
    Ok(reports)
}
