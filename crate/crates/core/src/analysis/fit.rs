use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::width::{wavepacket_width, WidthSeries};
use crate::dynamics::PopulationSeries;
use crate::error::{invalid, Error, Result};
use crate::seed;

/// Inclusive fit window in seconds, `t_lo > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    /// From the first recorded time after zero up to `t_hi`.
    pub fn from_first_positive(times: &[f64], t_hi: f64) -> Result<Self> {
        let t_lo = times
            .iter()
            .copied()
            .find(|&t| t > 0.0)
            .ok_or_else(|| Error::InsufficientData("no positive times".into()))?;
        Ok(Self { t_lo, t_hi })
    }
}

/// `σ_WP(t) = A·t^C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub amplitude_err: f64,
    pub exponent_err: f64,
    pub window: FitWindow,
    pub n_points: usize,
    /// RMS residual of `ln σ`.
    pub residual_rms: f64,
}

const MIN_POINTS: usize = 4;

/// Ordinary least squares on `(ln t, ln σ)`. Points with `σ ≤ 0` are
/// dropped. The uncertainties are the regression standard errors
/// (`σ_A` propagated from the intercept).
pub fn fit_power_law(series: &WidthSeries, window: FitWindow) -> Result<PowerLawFit> {
    if !(window.t_lo > 0.0) || window.t_hi < window.t_lo {
        return Err(invalid("window", format!("[{}, {}] must satisfy 0 < t_lo ≤ t_hi", window.t_lo, window.t_hi)));
    }
    let tol = 1e-12 * window.t_hi.abs().max(1e-300);
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.sigma_wp)
        .filter(|(&t, &s)| t >= window.t_lo - tol && t <= window.t_hi + tol && s > 0.0)
        .map(|(&t, &s)| (t.ln(), s.ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable points in fit window, need {MIN_POINTS}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("fit window has no spread in time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    let slope_err = (s2 / sxx).sqrt();
    let intercept_err = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    let amplitude = intercept.exp();
    Ok(PowerLawFit {
        amplitude,
        exponent: slope,
        amplitude_err: amplitude * intercept_err,
        exponent_err: slope_err,
        window,
        n_points: pts.len(),
        residual_rms: (rss / n).sqrt(),
    })
}

/// Fits the width of the realization-averaged populations and replaces the
/// uncertainties with the standard deviation of `(A, C)` over `n_boot`
/// bootstrap resamples of the realizations.
pub fn bootstrap_power_law(
    samples: &[PopulationSeries],
    source_site: usize,
    window: FitWindow,
    n_boot: usize,
    seed: u64,
) -> Result<PowerLawFit> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InsufficientData("no realizations".into()))?;
    let mean_of = |picks: &mut dyn Iterator<Item = &PopulationSeries>| -> PopulationSeries {
        let mut acc = DMatrix::zeros(first.n_sites(), first.n_times());
        let mut count = 0.0;
        for s in picks {
            acc += &s.values;
            count += 1.0;
        }
        PopulationSeries { times: first.times.clone(), values: acc / count }
    };
    let mean = mean_of(&mut samples.iter());
    let mut fit = fit_power_law(&wavepacket_width(&mean, source_site)?, window)?;
    if samples.len() < 2 || n_boot < 2 {
        return Ok(fit);
    }
    let mut rng = seed::rng(seed::derive(seed, seed::domain::BOOTSTRAP, 1));
    let mut amps = Vec::with_capacity(n_boot);
    let mut exps = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let idx: Vec<usize> = (0..samples.len()).map(|_| rng.random_range(0..samples.len())).collect();
        let resampled = mean_of(&mut idx.iter().map(|&i| &samples[i]));
        if let Ok(f) = fit_power_law(&wavepacket_width(&resampled, source_site)?, window) {
            amps.push(f.amplitude);
            exps.push(f.exponent);
        }
    }
    fit.amplitude_err = std_dev(&amps);
    fit.exponent_err = std_dev(&exps);
    Ok(fit)
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, c: f64) -> WidthSeries {
        let times: Vec<f64> = (0..=30).map(|k| k as f64 * 0.1).collect();
        WidthSeries { sigma_wp: times.iter().map(|t| a * t.powf(c)).collect(), times, source_site: 3 }
    }

    #[test]
    fn exact_power_law_recovered() {
        let s = synthetic(0.5, 0.44);
        let f = fit_power_law(&s, FitWindow { t_lo: 0.1, t_hi: 3.0 }).unwrap();
        assert!((f.exponent - 0.44).abs() < 1e-6);
        assert!((f.amplitude - 0.5).abs() < 1e-6);
        assert!(f.residual_rms < 1e-10);
        assert_eq!(f.n_points, 30);
    }

    #[test]
    fn time_rescaling_is_covariant() {
        let s = synthetic(0.5, 0.7);
        let scale = 1e-3;
        let scaled = WidthSeries { times: s.times.iter().map(|t| t * scale).collect(), ..s.clone() };
        let f = fit_power_law(&s, FitWindow { t_lo: 0.1, t_hi: 3.0 }).unwrap();
        let g = fit_power_law(&scaled, FitWindow { t_lo: 0.1 * scale, t_hi: 3.0 * scale }).unwrap();
        assert!((f.exponent - g.exponent).abs() < 1e-9);
        assert!((g.amplitude - f.amplitude * scale.powf(-f.exponent)).abs() < 1e-9 * g.amplitude);
    }

    #[test]
    fn drops_nonpositive_and_requires_four() {
        let mut s = synthetic(1.0, 1.0);
        for v in s.sigma_wp.iter_mut().skip(5) {
            *v = 0.0;
        }
        let err = fit_power_law(&s, FitWindow { t_lo: 0.1, t_hi: 3.0 });
        assert!(err.is_ok(), "4 positive points remain");
        s.sigma_wp[4] = -1.0;
        assert!(matches!(fit_power_law(&s, FitWindow { t_lo: 0.1, t_hi: 3.0 }), Err(Error::InsufficientData(_))));
        assert!(fit_power_law(&s, FitWindow { t_lo: 0.0, t_hi: 3.0 }).is_err());
    }
}
