//! Experiment configuration file (TOML).
//!
//! Rates and amplitudes are given in units of `j_max`; times in seconds.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use enaqt::dynamics::{uniform_times, Evolution};
use enaqt::model::NetworkSpec;
use enaqt::noise::{SpectrumKind, SpectrumSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub network: NetworkSpec,
    pub disorder: DisorderConfig,
    pub noise: NoiseConfig,
    pub run: RunConfig,
    pub outputs: OutputConfig,
    pub analysis: AnalysisConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            network: NetworkSpec::default(),
            disorder: DisorderConfig::default(),
            noise: NoiseConfig::default(),
            run: RunConfig::default(),
            outputs: OutputConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderPolicyKind {
    /// Fresh draw per realization.
    Resample,
    /// One draw shared by every realization.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderConfig {
    pub b_max_over_jmax: Vec<f64>,
    pub policy: DisorderPolicyKind,
    pub seed: u64,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        Self { b_max_over_jmax: vec![0.0], policy: DisorderPolicyKind::Resample, seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Telegraph,
    Gaussian,
    /// Lindblad dephasing.
    Markovian,
    RateEquation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParameters {
    /// Telegraph flip interval (s). When absent, `min(100 µs, 0.1/γ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_flip: Option<f64>,
    /// Gaussian grid points over `t_max`.
    pub n_samples: usize,
}

impl Default for NoiseParameters {
    fn default() -> Self {
        Self { dt_flip: None, n_samples: 600 }
    }
}

/// A named spectral density with `s0`, `omega0` and `kappa` in units of
/// `j_max`. Tables are `(ω/j_max, S/j_max)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumModel {
    pub name: String,
    pub kind: SpectrumKind,
    #[serde(default)]
    pub s0_over_jmax: f64,
    #[serde(default)]
    pub omega0_over_jmax: f64,
    #[serde(default)]
    pub kappa_over_jmax: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

impl SpectrumModel {
    pub fn to_spec(&self, j_max: f64) -> SpectrumSpec {
        SpectrumSpec {
            kind: self.kind,
            s0: self.s0_over_jmax * j_max,
            omega0: self.omega0_over_jmax * j_max,
            kappa: self.kappa_over_jmax * j_max,
            table: self.table.as_ref().map(|t| t.iter().map(|&(w, s)| (w * j_max, s * j_max)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub parameters: NoiseParameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_over_jmax: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectra: Option<Vec<SpectrumModel>>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { kind: NoiseKind::None, parameters: NoiseParameters::default(), gamma_over_jmax: None, spectra: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Every `b_max` with every noise point.
    Product,
    /// `b_max[k]` with noise point `k`.
    Zip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Output grid step (s), used unless `output_times` is given.
    pub output_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_times: Option<Vec<f64>>,
    /// 0 = all available processors.
    pub workers: usize,
    pub pairing: Pairing,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_realizations: 300,
            master_seed: 1,
            output_step: 1e-3,
            output_times: None,
            workers: 0,
            pairing: Pairing::Product,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Falls back to `$ENAQT_OUT_DIR`, then `./out`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: None, formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// 1-based sites whose efficiency is reported.
    pub targets: Vec<usize>,
    pub efficiency_resamples: usize,
    pub width_resamples: usize,
    pub width_fits: bool,
    /// Waypoints after the source that end the fit window.
    pub fit_path: Vec<usize>,
    /// Also solve the rate equation for every `γ > 0` case.
    pub rate_overlay: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            targets: vec![8],
            efficiency_resamples: enaqt::analysis::DEFAULT_EFFICIENCY_RESAMPLES,
            width_resamples: enaqt::analysis::DEFAULT_WIDTH_RESAMPLES,
            width_fits: false,
            fit_path: vec![1, 2],
            rate_overlay: false,
        }
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub label: String,
    pub b_max_over_jmax: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_over_jmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<String>,
    pub evolution: Evolution,
}

/// Default flip interval: 100 µs, shortened so that `γ·ΔT ≤ 0.1`.
pub fn default_dt_flip(gamma: f64) -> f64 {
    if gamma > 0.0 {
        1e-4_f64.min(0.1 / gamma)
    } else {
        1e-4
    }
}

fn tag(x: f64) -> String {
    let s = format!("{x}");
    s.replace('-', "m")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate().context("network")?;
        let d = &self.disorder;
        if d.b_max_over_jmax.is_empty() {
            bail!("disorder.b_max_over_jmax: at least one value required");
        }
        if let Some(b) = d.b_max_over_jmax.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            bail!("disorder.b_max_over_jmax: {b} must be ≥ 0");
        }

        let noise = &self.noise;
        let gammas = noise.gamma_over_jmax.as_deref();
        let spectra = noise.spectra.as_deref();
        match noise.kind {
            NoiseKind::None => {
                if gammas.is_some() || spectra.is_some() {
                    bail!("noise: kind = \"none\" takes neither gamma_over_jmax nor spectra");
                }
            }
            NoiseKind::Telegraph | NoiseKind::Markovian | NoiseKind::RateEquation => {
                if spectra.is_some() {
                    bail!("noise.spectra: only valid with kind = \"gaussian\"");
                }
                let g = gammas.with_context(|| "noise.gamma_over_jmax: required for this noise kind")?;
                if g.is_empty() {
                    bail!("noise.gamma_over_jmax: at least one value required");
                }
                if let Some(x) = g.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                    bail!("noise.gamma_over_jmax: {x} must be ≥ 0");
                }
                if noise.kind == NoiseKind::RateEquation && g.contains(&0.0) {
                    bail!("noise.gamma_over_jmax: the rate equation needs γ > 0");
                }
            }
            NoiseKind::Gaussian => {
                if gammas.is_some() {
                    bail!("noise.gamma_over_jmax: not valid with kind = \"gaussian\"; use noise.spectra");
                }
                let s = spectra.with_context(|| "noise.spectra: required with kind = \"gaussian\"")?;
                if s.is_empty() {
                    bail!("noise.spectra: at least one model required");
                }
                for (k, m) in s.iter().enumerate() {
                    m.to_spec(self.network.j_max)
                        .validate()
                        .with_context(|| format!("noise.spectra[{k}] ({})", m.name))?;
                    if s[..k].iter().any(|o| o.name == m.name) {
                        bail!("noise.spectra[{k}]: duplicate name {:?}", m.name);
                    }
                    if m.name.is_empty() || !m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                        bail!("noise.spectra[{k}].name: {:?} must be non-empty [A-Za-z0-9_-]", m.name);
                    }
                }
                if noise.parameters.n_samples < 2 {
                    bail!("noise.parameters.n_samples: {} < 2", noise.parameters.n_samples);
                }
            }
        }
        if let Some(dt) = noise.parameters.dt_flip {
            if !(dt > 0.0 && dt.is_finite()) {
                bail!("noise.parameters.dt_flip: {dt} must be positive");
            }
        }

        let r = &self.run;
        if r.n_realizations == 0 {
            bail!("run.n_realizations: must be ≥ 1");
        }
        self.output_times().context("run.output_times")?;
        if r.pairing == Pairing::Zip && d.b_max_over_jmax.len() != self.noise_points() {
            bail!(
                "run.pairing = \"zip\": {} disorder values but {} noise points",
                d.b_max_over_jmax.len(),
                self.noise_points()
            );
        }
        if self.outputs.formats.is_empty() {
            bail!("outputs.formats: at least one format required");
        }

        let a = &self.analysis;
        for &t in &a.targets {
            if !(1..=self.network.n_sites).contains(&t) {
                bail!("analysis.targets: site {t} outside 1..={}", self.network.n_sites);
            }
        }
        for &t in &a.fit_path {
            if !(1..=self.network.n_sites).contains(&t) {
                bail!("analysis.fit_path: site {t} outside 1..={}", self.network.n_sites);
            }
        }
        if a.width_fits && self.network.source_site >= self.network.n_sites {
            bail!("analysis.width_fits: source site has no sites to its right");
        }
        if a.efficiency_resamples < 1 || a.width_resamples < 1 {
            bail!("analysis: resample counts must be ≥ 1");
        }
        Ok(())
    }

    fn noise_points(&self) -> usize {
        match self.noise.kind {
            NoiseKind::None => 1,
            NoiseKind::Gaussian => self.noise.spectra.as_ref().map_or(0, Vec::len),
            _ => self.noise.gamma_over_jmax.as_ref().map_or(0, Vec::len),
        }
    }

    /// Output grid; always covers `[0, t_max]`.
    pub fn output_times(&self) -> Result<Vec<f64>> {
        let times = match &self.run.output_times {
            Some(t) => t.clone(),
            None => {
                if !(self.run.output_step > 0.0) {
                    bail!("run.output_step: {} must be positive", self.run.output_step);
                }
                uniform_times(self.network.t_max, self.run.output_step)?
            }
        };
        if times.first() != Some(&0.0) {
            bail!("output grid must start at 0");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            bail!("output grid must be strictly increasing");
        }
        if *times.last().unwrap() < self.network.t_max * (1.0 - 1e-12) {
            bail!("output grid must reach t_max = {}", self.network.t_max);
        }
        Ok(times)
    }

    /// Sweep points in run order.
    pub fn cases(&self) -> Vec<Case> {
        let j = self.network.j_max;
        let p = &self.noise.parameters;
        let noise: Vec<(Option<f64>, Option<String>, Evolution)> = match self.noise.kind {
            NoiseKind::None => vec![(None, None, Evolution::Coherent)],
            NoiseKind::Gaussian => self
                .noise
                .spectra
                .iter()
                .flatten()
                .map(|m| {
                    let e = Evolution::Gaussian { spectrum: m.to_spec(j), n_samples: p.n_samples };
                    (None, Some(m.name.clone()), e)
                })
                .collect(),
            kind => self
                .noise
                .gamma_over_jmax
                .iter()
                .flatten()
                .map(|&g| {
                    let gamma = g * j;
                    let e = match kind {
                        _ if g == 0.0 => Evolution::Coherent,
                        NoiseKind::Telegraph => {
                            Evolution::Telegraph { gamma, dt_flip: p.dt_flip.unwrap_or_else(|| default_dt_flip(gamma)) }
                        }
                        NoiseKind::Markovian => Evolution::Lindblad { gamma },
                        _ => Evolution::RateEquation { gamma },
                    };
                    (Some(g), None, e)
                })
                .collect(),
        };
        let bs = &self.disorder.b_max_over_jmax;
        let pairs: Vec<(f64, usize)> = match self.run.pairing {
            Pairing::Product => bs.iter().flat_map(|&b| (0..noise.len()).map(move |k| (b, k))).collect(),
            Pairing::Zip => bs.iter().copied().zip(0..noise.len()).collect(),
        };
        pairs
            .into_iter()
            .map(|(b, k)| {
                let (g, s, evolution) = noise[k].clone();
                let label = match (&g, &s) {
                    (Some(g), _) => format!("b{}_g{}", tag(b), tag(*g)),
                    (None, Some(s)) => format!("b{}_{s}", tag(b)),
                    (None, None) => format!("b{}_coherent", tag(b)),
                };
                Case { label, b_max_over_jmax: b, gamma_over_jmax: g, spectrum: s, evolution }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
        assert_eq!(ExperimentConfig::default().cases().len(), 1);
    }

    #[test]
    fn labels_are_file_safe() {
        let mut cfg = ExperimentConfig::default();
        cfg.disorder.b_max_over_jmax = vec![0.5, 2.5];
        cfg.noise.kind = NoiseKind::Telegraph;
        cfg.noise.gamma_over_jmax = Some(vec![0.0, 0.23]);
        let labels: Vec<String> = cfg.cases().into_iter().map(|c| c.label).collect();
        assert_eq!(labels, ["b0.5_g0", "b0.5_g0.23", "b2.5_g0", "b2.5_g0.23"]);
    }

    #[test]
    fn dt_flip_default_keeps_noise_white() {
        assert_eq!(default_dt_flip(0.0), 1e-4);
        assert_eq!(default_dt_flip(100.0), 1e-4);
        assert!((default_dt_flip(1e4) - 1e-5).abs() < 1e-18);
    }
}
