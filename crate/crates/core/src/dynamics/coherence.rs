//! Coherence of a single spin under its own on-site noise.
//!
//! With `H = W(t) σ^z` the `|↑⟩⟨↓|` coherence picks up the phase
//! `e^{−2i∫W dt}`. Averaging that phase over noise realizations gives the
//! dephasing envelope; for telegraph noise it is `cos(w_max ΔT)^{t/ΔT}`,
//! which approaches `e^{−γt/2}` in the white-noise limit.

use rustfft::num_complex::Complex64;

use super::validate_times;
use crate::error::Result;
use crate::noise::{generate_telegraph, NoiseTrajectory, TelegraphSpec};
use crate::parallel::{map_indexed, Workers};
use crate::seed;

/// `e^{−2i∫₀^t W_site dt'}` at each time, integrating the piecewise-constant
/// trajectory exactly.
pub fn phase_factor(noise: &NoiseTrajectory, site: usize, times: &[f64]) -> Result<Vec<Complex64>> {
    validate_times(times)?;
    let mut out = Vec::with_capacity(times.len());
    let mut phase = 0.0;
    let mut t = 0.0;
    let mut k = 0usize;
    let last = noise.n_steps().saturating_sub(1);
    for &t_out in times {
        while t < t_out {
            let seg_end = if k >= last { f64::INFINITY } else { (k + 1) as f64 * noise.dt };
            let stop = seg_end.min(t_out);
            phase += 2.0 * noise.values[(site, k.min(last))] * (stop - t);
            t = stop;
            if t >= seg_end {
                k += 1;
            }
        }
        out.push(Complex64::new(0.0, -phase).exp());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CoherenceEnvelope {
    pub times: Vec<f64>,
    /// `Re⟨e^{−2i∫W}⟩` across realizations.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
}

/// Telegraph-ensemble coherence envelope of a single site.
pub fn coherence_envelope(
    spec: &TelegraphSpec,
    n_realizations: usize,
    master_seed: u64,
    times: &[f64],
    workers: Workers,
) -> Result<CoherenceEnvelope> {
    validate_times(times)?;
    let t_total = times.last().copied().unwrap_or(0.0).max(spec.dt_flip);
    let samples = map_indexed(n_realizations, workers, |r| {
        let s = TelegraphSpec {
            seed: seed::derive(master_seed, seed::domain::TELEGRAPH, r as u64),
            ..*spec
        };
        let noise = generate_telegraph(&s, 1, t_total)?;
        Ok(phase_factor(&noise, 0, times)?.into_iter().map(|c| c.re).collect::<Vec<f64>>())
    })?;
    let n = samples.len() as f64;
    let mut mean = vec![0.0; times.len()];
    for s in &samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let stderr = (0..times.len())
        .map(|k| {
            if samples.len() < 2 {
                return 0.0;
            }
            let var = samples.iter().map(|s| (s[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        })
        .collect();
    Ok(CoherenceEnvelope { times: times.to_vec(), mean, stderr, n_realizations })
}
