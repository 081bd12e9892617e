use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::seed;

/// Resamples for efficiency error bars.
pub const DEFAULT_EFFICIENCY_RESAMPLES: usize = 1000;
/// Resamples for wave-packet width fits.
pub const DEFAULT_WIDTH_RESAMPLES: usize = 100;

/// Percentile bootstrap interval (2.5 % / 97.5 %).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapInterval {
    /// Statistic of the full sample.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_boot: usize,
}

impl BootstrapInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Resamples whole items (realizations) with replacement, so anything
/// correlated within an item, such as a time series, stays intact.
pub fn bootstrap_ci<T, F>(samples: &[T], statistic: F, n_boot: usize, seed: u64) -> Result<BootstrapInterval>
where
    F: Fn(&[&T]) -> f64,
{
    if samples.len() < 2 {
        return Err(invalid("samples", format!("bootstrap needs ≥ 2 samples, got {}", samples.len())));
    }
    if n_boot == 0 {
        return Err(invalid("n_boot", "must be ≥ 1"));
    }
    let all: Vec<&T> = samples.iter().collect();
    let estimate = statistic(&all);
    let mut rng = seed::rng(seed::derive(seed, seed::domain::BOOTSTRAP, 0));
    let mut resample: Vec<&T> = Vec::with_capacity(samples.len());
    let mut stats: Vec<f64> = (0..n_boot)
        .map(|_| {
            resample.clear();
            resample.extend((0..samples.len()).map(|_| &samples[rng.random_range(0..samples.len())]));
            statistic(&resample)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok(BootstrapInterval {
        estimate,
        lower: quantile_sorted(&stats, 0.025),
        upper: quantile_sorted(&stats, 0.975),
        n_boot,
    })
}

/// Linear interpolation between order statistics.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Sample mean, usable as a bootstrap statistic.
pub fn mean_of(xs: &[&f64]) -> f64 {
    xs.iter().copied().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_samples_give_zero_width() {
        let ci = bootstrap_ci(&[0.3; 25], mean_of, 1000, 1).unwrap();
        assert!(ci.width().abs() < 1e-15);
        assert!((ci.estimate - 0.3).abs() < 1e-15);
    }

    #[test]
    fn normal_mean_matches_clt() {
        let mut rng = seed::rng(123);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let ci = bootstrap_ci(&xs, mean_of, 1000, 7).unwrap();
        let half = 0.5 * ci.width();
        assert!((half / 0.0196 - 1.0).abs() < 0.15, "half-width {half}");
        assert!(ci.contains(ci.estimate));
    }

    #[test]
    fn deterministic_under_seed() {
        let xs: Vec<f64> = (0..50).map(|k| (k as f64).sin()).collect();
        let a = bootstrap_ci(&xs, mean_of, 500, 3).unwrap();
        let b = bootstrap_ci(&xs, mean_of, 500, 3).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_ci(&xs, mean_of, 500, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_few_samples() {
        assert!(bootstrap_ci(&[1.0], mean_of, 10, 0).is_err());
    }

    #[test]
    fn quantiles() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 0.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.0);
        assert_eq!(quantile_sorted(&s, 0.875), 3.5);
    }
}
