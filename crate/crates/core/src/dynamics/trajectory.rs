use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use super::{validate_times, PopulationSeries, StateVector, NORM_TOL};
use crate::error::{Error, Result};
use crate::model::{sorted_eigen, CouplingMatrix, DisorderProfile, EigenSystem};
use crate::noise::NoiseTrajectory;

/// Result of one pure-state trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryOutput {
    pub populations: PopulationSeries,
    /// `max_t |‖ψ(t)‖² − 1|`.
    pub max_norm_error: f64,
}

/// Segment-wise exact propagator `ψ ← V e^{−iΛτ} Vᵀ ψ` for a real symmetric
/// segment Hamiltonian.
struct Segment {
    eig: EigenSystem,
}

impl Segment {
    fn new(coupling: &CouplingMatrix, disorder: &DisorderProfile, w: Option<&NoiseTrajectory>, k: usize) -> Self {
        let mut h: DMatrix<f64> = coupling.matrix().clone();
        for i in 0..h.nrows() {
            let wi = w.map_or(0.0, |w| w.values[(i, k)]);
            h[(i, i)] = 2.0 * (disorder.b[i] + wi);
        }
        Self { eig: sorted_eigen(h) }
    }

    fn apply(&self, psi: &mut DVector<Complex64>, tau: f64, scratch: &mut DVector<Complex64>) {
        let v = &self.eig.eigenvectors;
        let n = psi.len();
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += psi[i] * v[(i, k)];
            }
            let phase = -self.eig.eigenvalues[k] * tau;
            scratch[k] = acc * Complex64::new(phase.cos(), phase.sin());
        }
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += scratch[k] * v[(i, k)];
            }
            psi[i] = acc;
        }
    }
}

/// States `ψ(t)` at each output time, plus the worst norm deviation.
///
/// Noise, when given, is piecewise constant on its grid; each constant
/// stretch is exponentiated exactly through the segment eigendecomposition,
/// and output times inside a segment split it.
pub fn propagate_states(
    coupling: &CouplingMatrix,
    disorder: &DisorderProfile,
    noise: Option<&NoiseTrajectory>,
    psi0: &StateVector,
    output_times: &[f64],
) -> Result<(Vec<StateVector>, f64)> {
    let n = coupling.n_sites();
    check_dims(n, disorder, psi0, noise)?;
    validate_times(output_times)?;
    let norm0 = psi0.norm_squared();
    if (norm0 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm0));
    }
    let t_last = *output_times.last().unwrap();
    if let Some(w) = noise {
        if w.duration() < t_last * (1.0 - 1e-12) {
            return Err(Error::TimeGrid(format!(
                "noise grid covers {:.6e} s but output runs to {t_last:.6e} s",
                w.duration()
            )));
        }
    }

    let mut psi = psi0.amplitudes().clone();
    let mut scratch = DVector::zeros(n);
    let mut states = Vec::with_capacity(output_times.len());
    let mut max_err = 0.0_f64;

    let mut t = 0.0;
    let mut seg_index = 0usize;
    let mut seg_end = match noise {
        Some(w) if w.n_steps() > 1 => w.dt,
        _ => f64::INFINITY,
    };
    let mut segment = Segment::new(coupling, disorder, noise, 0);

    for &t_out in output_times {
        while t < t_out {
            let stop = seg_end.min(t_out);
            segment.apply(&mut psi, stop - t, &mut scratch);
            t = stop;
            if t >= seg_end {
                if let Some(w) = noise {
                    seg_index += 1;
                    // Final segment extends past the grid end by round-off at most.
                    let k = seg_index.min(w.n_steps() - 1);
                    seg_end = if seg_index + 1 >= w.n_steps() {
                        f64::INFINITY
                    } else {
                        (seg_index + 1) as f64 * w.dt
                    };
                    segment = Segment::new(coupling, disorder, noise, k);
                }
            }
        }
        max_err = max_err.max((psi.norm_squared() - 1.0).abs());
        states.push(StateVector::from_raw(psi.clone()));
    }
    Ok((states, max_err))
}

/// `p_i(t) = |ψ_i(t)|²` at each output time.
pub fn propagate_trajectory(
    coupling: &CouplingMatrix,
    disorder: &DisorderProfile,
    noise: Option<&NoiseTrajectory>,
    psi0: &StateVector,
    output_times: &[f64],
) -> Result<TrajectoryOutput> {
    let (states, max_norm_error) = propagate_states(coupling, disorder, noise, psi0, output_times)?;
    let columns: Vec<Vec<f64>> = states.iter().map(StateVector::populations).collect();
    Ok(TrajectoryOutput {
        populations: PopulationSeries::from_columns(output_times.to_vec(), &columns)?,
        max_norm_error,
    })
}

fn check_dims(n: usize, disorder: &DisorderProfile, psi0: &StateVector, noise: Option<&NoiseTrajectory>) -> Result<()> {
    if disorder.n_sites() != n {
        return Err(Error::Dimension { what: "disorder", expected: n, got: disorder.n_sites() });
    }
    if psi0.dim() != n {
        return Err(Error::Dimension { what: "initial state", expected: n, got: psi0.dim() });
    }
    if let Some(w) = noise {
        if w.n_sites() != n {
            return Err(Error::Dimension { what: "noise sites", expected: n, got: w.n_sites() });
        }
        if w.n_steps() == 0 {
            return Err(Error::TimeGrid("empty noise trajectory".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_coupling_matrix, sample_disorder, NetworkSpec};
    use crate::noise::{generate_telegraph, TelegraphSpec};

    fn spec(n: usize) -> NetworkSpec {
        NetworkSpec { n_sites: n, j_max: 1.0, alpha: 1.22, source_site: 1, target_sites: vec![], t_max: 5.0 }
    }

    #[test]
    fn frozen_without_hopping() {
        let c = CouplingMatrix::from_matrix(DMatrix::zeros(4, 4)).unwrap();
        let d = sample_disorder(4, 3.0, 1).unwrap();
        let w = generate_telegraph(&TelegraphSpec { w_max: 5.0, dt_flip: 0.1, seed: 2 }, 4, 3.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi0 = StateVector::new(vec![
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let out = propagate_trajectory(&c, &d, Some(&w), &psi0, &[0.0, 0.55, 1.0, 2.95]).unwrap();
        for k in 0..4 {
            let p = out.populations.at(k);
            for (a, b) in p.iter().zip([0.5, 0.0, 0.5, 0.0]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_site_rabi() {
        let c = build_coupling_matrix(&NetworkSpec { j_max: 0.7, ..spec(2) }).unwrap();
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.13).collect();
        let out =
            propagate_trajectory(&c, &DisorderProfile::zero(2), None, &StateVector::basis(2, 0), &times).unwrap();
        for (k, t) in times.iter().enumerate() {
            let expected = (0.7 * t).sin().powi(2);
            assert!((out.populations.values[(1, k)] - expected).abs() < 1e-12);
        }
        assert!(out.max_norm_error < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = build_coupling_matrix(&spec(3)).unwrap();
        let d = DisorderProfile::zero(3);
        let psi = StateVector::basis(3, 0);
        assert!(propagate_trajectory(&c, &DisorderProfile::zero(2), None, &psi, &[0.0]).is_err());
        assert!(propagate_trajectory(&c, &d, None, &StateVector::basis(2, 0), &[0.0]).is_err());
        assert!(propagate_trajectory(&c, &d, None, &psi, &[1.0, 0.5]).is_err());
        let short = NoiseTrajectory::zeros(3, 10, 0.1);
        assert!(matches!(
            propagate_trajectory(&c, &d, Some(&short), &psi, &[0.0, 2.0]),
            Err(Error::TimeGrid(_))
        ));
        assert!(propagate_trajectory(&c, &d, Some(&short), &psi, &[0.0, 1.0]).is_ok());
    }

    #[test]
    fn segment_splitting_is_consistent() {
        // Output grid misaligned with the noise grid must not change the state.
        let c = build_coupling_matrix(&spec(5)).unwrap();
        let d = sample_disorder(5, 1.0, 4).unwrap();
        let w = generate_telegraph(&TelegraphSpec { w_max: 4.0, dt_flip: 0.1, seed: 3 }, 5, 3.0).unwrap();
        let psi0 = StateVector::basis(5, 2);
        let coarse = propagate_states(&c, &d, Some(&w), &psi0, &[3.0]).unwrap().0;
        let fine_times: Vec<f64> = (0..=73).map(|k| k as f64 * 3.0 / 73.0).collect();
        let fine = propagate_states(&c, &d, Some(&w), &psi0, &fine_times).unwrap().0;
        let a = coarse[0].amplitudes();
        let b = fine.last().unwrap().amplitudes();
        assert!((a - b).norm() < 1e-12);
    }
}
