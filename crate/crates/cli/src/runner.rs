use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use enaqt::analysis::{
    bootstrap_ci, bootstrap_power_law, boundary_time, efficiency_samples, mean_of, wavepacket_width, FitWindow,
};
use enaqt::dynamics::{run_ensemble, DisorderPolicy, EnsembleOptions, EnsembleResult, Evolution, PopulationSeries};
use enaqt::model::{
    assemble_hamiltonian, build_coupling_matrix, difference_frequencies, eigensystem, sample_disorder,
};
use enaqt::noise::{write_spectrum_csv, SpectrumSpec};
use enaqt::{seed, Workers};

use crate::config::{DisorderPolicyKind, ExperimentConfig, Format};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    pub checks: Vec<Check>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Bundle {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Bundle {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.files.push(PathBuf::from(name));
        Ok(BufWriter::new(f))
    }

    fn checksums(&self) -> Result<Vec<Value>> {
        self.files
            .iter()
            .map(|name| {
                let bytes = std::fs::read(self.dir.join(name))?;
                Ok(json!({ "path": name, "bytes": bytes.len(), "sha256": sha256_hex(&bytes) }))
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
struct EfficiencyRow {
    gamma_over_jmax: Option<f64>,
    b_max_over_jmax: f64,
    site: usize,
    eta_norm: f64,
    ci_lo: f64,
    ci_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ModelEfficiencyRow {
    model: String,
    b_max_over_jmax: f64,
    site: usize,
    eta_norm: f64,
    ci_lo: f64,
    ci_hi: f64,
    energy_cost: f64,
}

/// Realization-unit bootstrap of a normalized efficiency.
fn efficiency_ci(samples: &[f64], n_boot: usize, seed: u64) -> Result<(f64, f64, f64)> {
    if samples.len() < 2 {
        let x = samples[0];
        return Ok((x, x, x));
    }
    let ci = bootstrap_ci(samples, mean_of, n_boot, seed)?;
    Ok((ci.estimate, ci.lower, ci.upper))
}

fn mean_width_at(picks: &[&PopulationSeries], k: usize, src: usize) -> f64 {
    let n = picks[0].n_sites();
    let mut acc = 0.0;
    for i in src..n {
        let p = picks.iter().map(|s| s.values[(i, k)]).sum::<f64>() / picks.len() as f64;
        let d = (i + 1 - src) as f64;
        acc += p * d * d;
    }
    (2.0 * acc).sqrt()
}

fn write_width_csv<W: Write>(w: W, res: &EnsembleResult, source_site: usize, n_boot: usize, seed: u64) -> Result<()> {
    let mean = wavepacket_width(&res.mean_series(), source_site)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_s", "sigma_wp", "ci_lo", "ci_hi"])?;
    for (k, (&t, &s)) in mean.times.iter().zip(&mean.sigma_wp).enumerate() {
        let (lo, hi) = if res.samples.len() >= 2 {
            let ci = bootstrap_ci(&res.samples, |p| mean_width_at(p, k, source_site), n_boot, seed)?;
            (ci.lower, ci.upper)
        } else {
            (s, s)
        };
        out.write_record([t.to_string(), s.to_string(), lo.to_string(), hi.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn write_populations(bundle: &mut Bundle, name: &str, res: &EnsembleResult) -> Result<()> {
    let w = bundle.create(name)?;
    res.write_csv(w)?;
    Ok(())
}

fn ensemble_checks(label: &str, res: &EnsembleResult, checks: &mut Vec<Check>) {
    let d = &res.diagnostics;
    let (passed, detail) = match res.metadata.evolution {
        Evolution::Lindblad { .. } => (
            d.max_trace_error <= 1e-9 && d.max_hermiticity_error <= 1e-9 && d.min_eigenvalue >= -1e-8,
            format!(
                "trace {:.1e}, hermiticity {:.1e}, min eigenvalue {:.1e}",
                d.max_trace_error, d.max_hermiticity_error, d.min_eigenvalue
            ),
        ),
        Evolution::RateEquation { .. } => {
            (d.max_total_deviation <= 1e-9, format!("Σp deviation {:.1e}", d.max_total_deviation))
        }
        _ => (d.max_norm_error <= 1e-9, format!("norm deviation {:.1e}", d.max_norm_error)),
    };
    checks.push(Check { name: format!("{label}: conservation"), passed, detail });
}

pub(crate) fn spectrum_grid(spec: &SpectrumSpec, n_samples: usize, t_total: f64) -> Vec<(f64, f64)> {
    let domega = 2.0 * std::f64::consts::PI / t_total;
    (0..=n_samples / 2).map(|k| (k as f64 * domega, spec.density(k as f64 * domega))).collect()
}

/// Executes every case of `cfg`, writes the bundle into `out_dir` and
/// returns the invariant checks. A failed check is reported, not raised.
pub fn run_config(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut bundle = Bundle { dir: out_dir.to_path_buf(), files: Vec::new() };
    let csv_out = cfg.outputs.formats.contains(&Format::Csv);
    let json_out = cfg.outputs.formats.contains(&Format::Json);

    let net = &cfg.network;
    let j = net.j_max;
    let times = cfg.output_times()?;
    let workers = Workers::from_count(cfg.run.workers);
    let coupling = build_coupling_matrix(net)?;
    let a = &cfg.analysis;

    let mut checks = Vec::new();
    let mut case_entries = Vec::new();
    let mut eff_rows = Vec::new();
    let mut model_rows = Vec::new();
    let mut spectra = Vec::new();
    let mut fixed_profiles = Vec::new();

    for (idx, case) in cfg.cases().iter().enumerate() {
        let b_max = case.b_max_over_jmax * j;
        let policy = match cfg.disorder.policy {
            DisorderPolicyKind::Resample => DisorderPolicy::Resample { b_max, seed: cfg.disorder.seed },
            DisorderPolicyKind::Fixed => {
                let p = sample_disorder(net.n_sites, b_max, cfg.disorder.seed)?;
                if !fixed_profiles.iter().any(|(b, _)| *b == case.b_max_over_jmax) {
                    fixed_profiles.push((case.b_max_over_jmax, p.clone()));
                }
                DisorderPolicy::Fixed(p)
            }
        };
        let options = EnsembleOptions { n_realizations: cfg.run.n_realizations, master_seed: cfg.run.master_seed, workers };
        let res = run_ensemble(net, &policy, &case.evolution, &options, &times)
            .with_context(|| format!("case {}", case.label))?;
        ensemble_checks(&case.label, &res, &mut checks);
        let mut files = Vec::new();
        if csv_out {
            let name = format!("populations_{}.csv", case.label);
            write_populations(&mut bundle, &name, &res)?;
            files.push(name);
        }
        if json_out {
            let name = format!("summary_{}.json", case.label);
            let mut w = bundle.create(&name)?;
            serde_json::to_writer_pretty(&mut w, &res.summary_json()?)?;
            w.flush()?;
            files.push(name);
        }

        let boot_seed = seed::derive(cfg.run.master_seed, seed::domain::BOOTSTRAP, idx as u64);
        let cost = if res.energy_costs.is_empty() {
            0.0
        } else {
            res.energy_costs.iter().map(|c| c.normalized(j, net.t_max)).sum::<f64>() / res.energy_costs.len() as f64
        };
        let mut eta_table = serde_json::Map::new();
        for &site in &a.targets {
            let samples = efficiency_samples(&res.samples, site - 1, net.t_max)?;
            let (eta, lo, hi) = efficiency_ci(&samples, a.efficiency_resamples, boot_seed)?;
            eta_table.insert(site.to_string(), json!({ "eta_norm": eta, "ci_lo": lo, "ci_hi": hi }));
            match &case.spectrum {
                Some(model) => model_rows.push(ModelEfficiencyRow {
                    model: model.clone(),
                    b_max_over_jmax: case.b_max_over_jmax,
                    site,
                    eta_norm: eta,
                    ci_lo: lo,
                    ci_hi: hi,
                    energy_cost: cost,
                }),
                None => eff_rows.push(EfficiencyRow {
                    gamma_over_jmax: case.gamma_over_jmax,
                    b_max_over_jmax: case.b_max_over_jmax,
                    site,
                    eta_norm: eta,
                    ci_lo: lo,
                    ci_hi: hi,
                }),
            }
        }

        let mut fit_entry = Value::Null;
        if a.width_fits {
            if csv_out {
                let name = format!("width_{}.csv", case.label);
                let w = bundle.create(&name)?;
                write_width_csv(w, &res, net.source_site, a.width_resamples, boot_seed)?;
                files.push(name);
            }
            let gamma = case.gamma_over_jmax.unwrap_or(0.0) * j;
            let cone = boundary_time(&coupling, b_max, gamma, net.source_site, &a.fit_path);
            let t_hi = cone.time.min(*times.last().unwrap());
            let window = FitWindow::from_first_positive(&times, t_hi)?;
            fit_entry = match bootstrap_power_law(&res.samples, net.source_site, window, a.width_resamples, boot_seed) {
                Ok(f) => json!({
                    "A": f.amplitude, "C": f.exponent, "sigma_A": f.amplitude_err, "sigma_C": f.exponent_err,
                    "t_lo": f.window.t_lo, "t_hi": f.window.t_hi, "n_points": f.n_points,
                    "residual_rms": f.residual_rms, "boundary_time_s": cone.time,
                }),
                Err(e) => json!({ "error": e.to_string(), "boundary_time_s": cone.time }),
            };
        }

        let mut overlay = Value::Null;
        if a.rate_overlay {
            if let Some(g) = case.gamma_over_jmax.filter(|g| *g > 0.0) {
                let rate = run_ensemble(net, &policy, &Evolution::RateEquation { gamma: g * j }, &options, &times)?;
                ensemble_checks(&format!("{} rate overlay", case.label), &rate, &mut checks);
                let mut rate_eta = serde_json::Map::new();
                for &site in &a.targets {
                    let s = efficiency_samples(&rate.samples, site - 1, net.t_max)?;
                    rate_eta.insert(site.to_string(), json!(s.iter().sum::<f64>() / s.len() as f64));
                }
                let mut file = Value::Null;
                if csv_out {
                    let name = format!("populations_{}_rate.csv", case.label);
                    write_populations(&mut bundle, &name, &rate)?;
                    file = json!(name);
                }
                overlay = json!({ "file": file, "eta_norm": rate_eta });
            }
        }

        if let Evolution::Gaussian { spectrum, n_samples } = &case.evolution {
            let name = case.spectrum.clone().unwrap_or_default();
            if !spectra.iter().any(|(n, _, _)| *n == name) {
                spectra.push((name, spectrum.clone(), *n_samples));
            }
        }

        case_entries.push(json!({
            "case": case,
            "disorder_seeds": res.metadata.disorder_seeds,
            "noise_seeds": res.metadata.noise_seeds,
            "files": files,
            "eta": eta_table,
            "fit": fit_entry,
            "rate_overlay": overlay,
            "energy_cost_normalized": cost,
            "diagnostics": res.diagnostics,
        }));
    }

    if csv_out && !eff_rows.is_empty() {
        let mut w = csv::Writer::from_writer(bundle.create("efficiency.csv")?);
        for r in &eff_rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    if csv_out && !model_rows.is_empty() {
        let mut w = csv::Writer::from_writer(bundle.create("efficiency_models.csv")?);
        for r in &model_rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }

    let mut spectrum_entries = Vec::new();
    for (k, (name, spec, n_samples)) in spectra.iter().enumerate() {
        let est = crate::spectrum::ensemble_estimate(spec, *n_samples, net.t_max, net.n_sites, cfg.run.master_seed, k)?;
        if csv_out {
            write_spectrum_csv(bundle.create(&format!("spectrum_{name}.csv"))?, spectrum_grid(spec, *n_samples, net.t_max))?;
            est.write_csv(bundle.create(&format!("spectrum_{name}_estimate.csv"))?)?;
        }
        spectrum_entries.push(json!({ "name": name, "spec": spec, "n_samples": n_samples, "n_records": est.n_records }));
    }

    let mut fixed_entries = Vec::new();
    for (b, profile) in &fixed_profiles {
        let h = assemble_hamiltonian(&coupling, profile, &vec![0.0; net.n_sites])?;
        let freqs = difference_frequencies(&eigensystem(&h)?);
        if csv_out {
            let mut w = csv::Writer::from_writer(bundle.create(&format!("difference_frequencies_b{b}.csv"))?);
            w.write_record(["omega_rad_s"])?;
            for f in &freqs {
                w.write_record([f.to_string()])?;
            }
            w.flush()?;
        }
        fixed_entries.push(json!({ "b_max_over_jmax": b, "b": profile.b, "difference_frequencies_rad_s": freqs }));
    }

    let checksums = bundle.checksums()?;
    let manifest = json!({
        "tool": "enaqt",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": enaqt::VERSION,
        "config": cfg,
        "time_grid": { "n_points": times.len(), "t_end_s": times.last() },
        "master_seed": cfg.run.master_seed,
        "disorder_seed": cfg.disorder.seed,
        "workers": cfg.run.workers,
        "cases": case_entries,
        "efficiency": eff_rows,
        "efficiency_models": model_rows,
        "spectra": spectrum_entries,
        "fixed_disorder": fixed_entries,
        "checks": checks,
        "files": checksums,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    let manifest_path = out_dir.join("manifest.json");
    let mut w = BufWriter::new(File::create(&manifest_path)?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), manifest: manifest_path, checks })
}
