use serde::Serialize;

use crate::model::CouplingMatrix;

/// Effective spreading speed and the traversal time it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LightCone {
    /// `J_eff(r)` for distances `r = 1..N−1` (rad/s).
    pub j_eff: Vec<f64>,
    /// `max_k |dω/dk|` in sites per second.
    pub max_velocity: f64,
    /// Path length in sites.
    pub distance: f64,
    /// `distance / max_velocity` (s).
    pub time: f64,
}

/// `J_eff = min{J²/(B_max² + γ²), J}` for each distance, with `J(r)` the
/// mean coupling along the `r`-th off-diagonal.
pub fn effective_couplings(coupling: &CouplingMatrix, b_max: f64, gamma: f64) -> Vec<f64> {
    let n = coupling.n_sites();
    let damp = b_max * b_max + gamma * gamma;
    (1..n)
        .map(|r| {
            let j = (0..n - r).map(|i| coupling.get(i, i + r)).sum::<f64>() / (n - r) as f64;
            if damp == 0.0 {
                j
            } else {
                (j * j / damp).min(j)
            }
        })
        .collect()
}

/// Maximum of `|dω/dk|` for the band `ω(k) = 2 Σ_r J(r) cos(kr)`.
pub fn max_group_velocity(j_by_distance: &[f64]) -> f64 {
    let v = |k: f64| -> f64 {
        j_by_distance
            .iter()
            .enumerate()
            .map(|(m, &j)| {
                let r = (m + 1) as f64;
                2.0 * r * j * (k * r).sin()
            })
            .sum::<f64>()
            .abs()
    };
    let pi = std::f64::consts::PI;
    let grid = 4096;
    let (mut best_k, mut best_v) = (0.0, 0.0);
    for s in 0..=grid {
        let k = pi * s as f64 / grid as f64;
        let val = v(k);
        if val > best_v {
            best_v = val;
            best_k = k;
        }
    }
    // golden-section refinement around the grid maximum
    let h = pi / grid as f64;
    let (mut a, mut b) = ((best_k - h).max(0.0), (best_k + h).min(pi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if v(c) > v(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best_v.max(v(0.5 * (a + b)))
}

/// Time for an excitation to travel from `from_site` through each waypoint
/// of `path` in turn (1-based sites) at the effective maximal speed.
pub fn boundary_time(coupling: &CouplingMatrix, b_max: f64, gamma: f64, from_site: usize, path: &[usize]) -> LightCone {
    let j_eff = effective_couplings(coupling, b_max, gamma);
    let max_velocity = max_group_velocity(&j_eff);
    let mut distance = 0.0;
    let mut at = from_site;
    for &next in path {
        distance += at.abs_diff(next) as f64;
        at = next;
    }
    let time = if max_velocity > 0.0 { distance / max_velocity } else { f64::INFINITY };
    LightCone { j_eff, max_velocity, distance, time }
}
