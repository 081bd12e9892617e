use anyhow::{bail, Result};

use enaqt::noise::SpectrumKind;

use crate::config::{
    AnalysisConfig, DisorderConfig, DisorderPolicyKind, ExperimentConfig, NoiseConfig, NoiseKind, Pairing,
    RunConfig, SpectrumModel,
};

pub const PRESETS: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fig1" => fig1(),
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4" => fig4(),
        other => bail!("unknown preset {other:?}; expected one of {}", PRESETS.join(", ")),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `n` log-spaced values from `lo` to `hi`, rounded to 4 significant digits.
fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let x = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
            let digits = 3 - x.log10().floor() as i32;
            let scale = 10f64.powi(digits);
            (x * scale).round() / scale
        })
        .collect()
}

/// Efficiency at site 8 against the dephasing rate, weak and strong
/// disorder. The γ = 0 point is the localized reference.
fn fig1() -> ExperimentConfig {
    let mut gammas = vec![0.0];
    gammas.extend(log_space(0.03, 100.0, 12));
    ExperimentConfig {
        name: "fig1".into(),
        disorder: DisorderConfig { b_max_over_jmax: vec![0.5, 2.5], policy: DisorderPolicyKind::Resample, seed: 101 },
        noise: NoiseConfig { kind: NoiseKind::Telegraph, gamma_over_jmax: Some(gammas), ..Default::default() },
        run: RunConfig { n_realizations: 300, master_seed: 102, ..Default::default() },
        ..Default::default()
    }
}

/// Site-8 time traces with the rate-equation overlay.
fn fig2() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig2".into(),
        disorder: DisorderConfig { b_max_over_jmax: vec![2.5], policy: DisorderPolicyKind::Resample, seed: 201 },
        noise: NoiseConfig {
            kind: NoiseKind::Telegraph,
            gamma_over_jmax: Some(vec![0.0, 0.23, 1.0, 3.9]),
            ..Default::default()
        },
        run: RunConfig { n_realizations: 300, master_seed: 202, ..Default::default() },
        analysis: AnalysisConfig { rate_overlay: true, ..Default::default() },
        ..Default::default()
    }
}

/// Heat maps and width fits: clean, ENAQT and Zeno-side subdiffusion.
fn fig3() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig3".into(),
        disorder: DisorderConfig {
            b_max_over_jmax: vec![0.0, 2.5, 2.5],
            policy: DisorderPolicyKind::Resample,
            seed: 301,
        },
        noise: NoiseConfig {
            kind: NoiseKind::Telegraph,
            gamma_over_jmax: Some(vec![0.0, 1.0, 18.4]),
            ..Default::default()
        },
        run: RunConfig {
            n_realizations: 300,
            master_seed: 302,
            output_step: 1e-4,
            pairing: Pairing::Zip,
            ..Default::default()
        },
        analysis: AnalysisConfig { width_fits: true, ..Default::default() },
        ..Default::default()
    }
}

fn lorentzian(name: &str, s0: f64, omega0: f64, kappa: f64) -> SpectrumModel {
    SpectrumModel {
        name: name.into(),
        kind: SpectrumKind::Lorentzian,
        s0_over_jmax: s0,
        omega0_over_jmax: omega0,
        kappa_over_jmax: kappa,
        table: None,
    }
}

/// One disorder draw under six noise spectra; efficiencies at sites 8-10.
///
/// The flat model has the same white level as telegraph noise at γ = J
/// (`S_W = γ/4`). Broadband Lorentzians span the difference frequencies
/// of the disordered Hamiltonian, narrowband ones hit only a few.
fn fig4() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig4".into(),
        disorder: DisorderConfig { b_max_over_jmax: vec![2.5], policy: DisorderPolicyKind::Fixed, seed: 401 },
        noise: NoiseConfig {
            kind: NoiseKind::Gaussian,
            spectra: Some(vec![
                SpectrumModel {
                    name: "white".into(),
                    kind: SpectrumKind::Flat,
                    s0_over_jmax: 0.25,
                    omega0_over_jmax: 0.0,
                    kappa_over_jmax: 0.0,
                    table: None,
                },
                lorentzian("broad_low", 0.25, 0.0, 20.0),
                lorentzian("broad_mid", 0.25, 6.0, 12.0),
                lorentzian("narrow_low", 1.0, 1.0, 1.0),
                lorentzian("narrow_mid", 1.0, 4.0, 1.0),
                lorentzian("narrow_high", 1.0, 12.0, 1.0),
            ]),
            ..Default::default()
        },
        run: RunConfig { n_realizations: 300, master_seed: 402, ..Default::default() },
        analysis: AnalysisConfig { targets: vec![8, 9, 10], ..Default::default() },
        ..Default::default()
    }
}
