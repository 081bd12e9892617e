use serde::Serialize;

use crate::dynamics::PopulationSeries;
use crate::error::{invalid, Error, Result};

/// `η_i = ∫₀^{t_max} p_i dt`, raw (s) and divided by `t_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub eta_raw: Vec<f64>,
    pub eta_normalized: Vec<f64>,
    pub t_max: f64,
}

/// Trapezoidal integral over the recorded grid, truncated at `t_max` by
/// linear interpolation.
pub fn transport_efficiency(populations: &PopulationSeries, t_max: f64) -> Result<EfficiencyReport> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", format!("{t_max} must be positive")));
    }
    let times = &populations.times;
    let (first, last) = match (times.first(), times.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::TimeGrid("empty population series".into())),
    };
    let tol = 1e-9 * t_max;
    if first > tol {
        return Err(Error::TimeGrid(format!("grid starts at {first:e} s, not 0")));
    }
    if last < t_max - tol {
        return Err(Error::TimeGrid(format!("grid ends at {last:e} s, before t_max = {t_max:e} s")));
    }
    let n = populations.n_sites();
    let mut eta = vec![0.0; n];
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        if t0 >= t_max {
            break;
        }
        let dt = t1 - t0;
        if dt <= 0.0 {
            continue;
        }
        let end = t1.min(t_max);
        let frac = (end - t0) / dt;
        for (i, e) in eta.iter_mut().enumerate() {
            let p0 = populations.values[(i, k - 1)];
            let p1 = populations.values[(i, k)];
            let p_end = p0 + (p1 - p0) * frac;
            *e += 0.5 * (p0 + p_end) * (end - t0);
        }
    }
    let eta_normalized = eta.iter().map(|e| e / t_max).collect();
    Ok(EfficiencyReport { eta_raw: eta, eta_normalized, t_max })
}

/// Normalized efficiency of 0-based `site` for each realization.
pub fn efficiency_samples(samples: &[PopulationSeries], site: usize, t_max: f64) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| transport_efficiency(s, t_max).map(|r| r.eta_normalized[site]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn constant_populations() {
        let times: Vec<f64> = (0..=60).map(|k| k as f64 * 1e-3).collect();
        let p = PopulationSeries::new(times, DMatrix::from_element(10, 61, 0.1)).unwrap();
        let r = transport_efficiency(&p, 0.06).unwrap();
        for e in &r.eta_normalized {
            assert!((e - 0.1).abs() < 1e-12);
        }
        assert!((r.eta_raw[0] - 0.006).abs() < 1e-14);
        assert!((r.eta_normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_excitation() {
        let mut v = DMatrix::zeros(3, 11);
        v.row_mut(1).fill(1.0);
        let p = PopulationSeries::new((0..=10).map(|k| k as f64 * 0.1).collect(), v).unwrap();
        let r = transport_efficiency(&p, 1.0).unwrap();
        assert!((r.eta_normalized[1] - 1.0).abs() < 1e-12);
        assert_eq!(r.eta_normalized[0], 0.0);
    }

    #[test]
    fn linear_ramp_truncated_midsegment() {
        // p(t) = t integrates to t_max²/2 exactly under the trapezoid rule.
        let times = vec![0.0, 1.0, 2.0];
        let v = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 2.0]);
        let p = PopulationSeries::new(times, v).unwrap();
        let r = transport_efficiency(&p, 1.5).unwrap();
        assert!((r.eta_raw[0] - 1.125).abs() < 1e-14);
    }

    #[test]
    fn short_grid_rejected() {
        let p = PopulationSeries::new(vec![0.0, 0.5], DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(transport_efficiency(&p, 1.0), Err(Error::TimeGrid(_))));
        let p = PopulationSeries::new(vec![0.1, 1.0], DMatrix::zeros(2, 2)).unwrap();
        assert!(transport_efficiency(&p, 1.0).is_err());
    }
}
