use serde::Serialize;

use crate::dynamics::PopulationSeries;
use crate::error::{invalid, Result};

/// Mirror-symmetrized wave-packet width in site units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthSeries {
    pub times: Vec<f64>,
    pub sigma_wp: Vec<f64>,
    /// 1-based.
    pub source_site: usize,
}

/// `σ_WP(t) = √(2 Σ_{i > i₀} p_i(t) (i − i₀)²)`.
///
/// Only the side between the source and the farther boundary enters; it is
/// mirrored about the source, which keeps the near boundary out of the
/// estimate for as long as it is not reached.
pub fn wavepacket_width(populations: &PopulationSeries, source_site: usize) -> Result<WidthSeries> {
    let n = populations.n_sites();
    if source_site == 0 || source_site > n {
        return Err(invalid("source_site", format!("{source_site} outside 1..={n}")));
    }
    if source_site == n {
        return Err(invalid("source_site", "source at the right edge leaves no sites to evaluate"));
    }
    let sigma_wp = (0..populations.n_times())
        .map(|k| {
            let s: f64 = (source_site..n)
                .map(|i| {
                    let d = (i + 1 - source_site) as f64;
                    populations.values[(i, k)] * d * d
                })
                .sum();
            (2.0 * s.max(0.0)).sqrt()
        })
        .collect();
    Ok(WidthSeries { times: populations.times.clone(), sigma_wp, source_site })
}

/// `√(2 (N − i₀)²)`, reached with all weight on the far edge.
pub fn width_bound(n_sites: usize, source_site: usize) -> f64 {
    (2.0 * ((n_sites - source_site) as f64).powi(2)).sqrt()
}
