//! Stochastic on-site energies `W_i(t)`.
//!
//! Two generators are provided: coin-toss telegraph noise, which is white
//! for flip rates far above the hopping, and stationary Gaussian noise with
//! a prescribed two-sided spectral density, synthesized in the frequency
//! domain. Both produce piecewise-constant trajectories on a uniform grid.
//!
//! Spectral densities here are those of `W` itself. The Hamiltonian's
//! diagonal carries `2W`, so the phase-noise spectrum seen by a coherence is
//! `4·S_W`; the dephasing rate of telegraph noise `γ = w_max²·ΔT` is the
//! zero-frequency density of `2W`.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed;

/// Coin-toss noise: every `dt_flip` each site independently takes
/// `±w_max/2` with equal probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelegraphSpec {
    /// Full jump span (rad/s).
    pub w_max: f64,
    /// Resampling interval ΔT = 1/λ (s).
    pub dt_flip: f64,
    pub seed: u64,
}

impl TelegraphSpec {
    /// Spec whose white-noise dephasing rate equals `gamma`.
    pub fn from_gamma(gamma: f64, dt_flip: f64, seed: u64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("{gamma} must be nonnegative")));
        }
        let spec = Self {
            w_max: (gamma / dt_flip).sqrt(),
            dt_flip,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_max >= 0.0 && self.w_max.is_finite()) {
            return Err(invalid("w_max", format!("{} must be nonnegative", self.w_max)));
        }
        if !(self.dt_flip > 0.0 && self.dt_flip.is_finite()) {
            return Err(invalid("dt_flip", format!("{} must be positive", self.dt_flip)));
        }
        Ok(())
    }

    /// Coin-tossing rate λ = 1/ΔT.
    pub fn flip_rate(&self) -> f64 {
        1.0 / self.dt_flip
    }
}

/// `γ = w_max² / λ = w_max²·ΔT`.
pub fn dephasing_rate(spec: &TelegraphSpec) -> f64 {
    spec.w_max * spec.w_max * spec.dt_flip
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Flat,
    Lorentzian,
    Tabulated,
}

/// Two-sided spectral density, symmetric in ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    /// Peak (Lorentzian) or constant (flat) density, rad/s.
    #[serde(default)]
    pub s0: f64,
    /// Lorentzian centre (rad/s).
    #[serde(default)]
    pub omega0: f64,
    /// Lorentzian full width at half maximum (rad/s).
    #[serde(default)]
    pub kappa: f64,
    /// `(ω, S(ω))` pairs with ω ≥ 0 strictly increasing; linear
    /// interpolation inside, zero outside.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

impl SpectrumSpec {
    pub fn flat(s0: f64) -> Self {
        Self {
            kind: SpectrumKind::Flat,
            s0,
            omega0: 0.0,
            kappa: 0.0,
            table: None,
        }
    }

    pub fn lorentzian(s0: f64, omega0: f64, kappa: f64) -> Self {
        Self {
            kind: SpectrumKind::Lorentzian,
            s0,
            omega0,
            kappa,
            table: None,
        }
    }

    pub fn tabulated(table: Vec<(f64, f64)>) -> Self {
        Self {
            kind: SpectrumKind::Tabulated,
            s0: 0.0,
            omega0: 0.0,
            kappa: 0.0,
            table: Some(table),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 >= 0.0 && self.s0.is_finite()) {
            return Err(invalid("spectrum.s0", format!("{} must be nonnegative", self.s0)));
        }
        match self.kind {
            SpectrumKind::Flat => Ok(()),
            SpectrumKind::Lorentzian => {
                if !(self.kappa > 0.0 && self.kappa.is_finite()) {
                    return Err(invalid("spectrum.kappa", format!("{} must be positive", self.kappa)));
                }
                if !self.omega0.is_finite() {
                    return Err(invalid("spectrum.omega0", "must be finite"));
                }
                Ok(())
            }
            SpectrumKind::Tabulated => {
                let table = self
                    .table
                    .as_ref()
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| invalid("spectrum.table", "tabulated spectrum needs a table"))?;
                for (k, &(w, s)) in table.iter().enumerate() {
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(invalid("spectrum.table", format!("frequency {w} must be ≥ 0")));
                    }
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(invalid("spectrum.table", format!("negative density {s} at ω = {w}")));
                    }
                    if k > 0 && w <= table[k - 1].0 {
                        return Err(invalid("spectrum.table", "frequencies must increase strictly"));
                    }
                }
                Ok(())
            }
        }
    }

    /// `S(ω)`, evaluated at `|ω|`.
    pub fn density(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match self.kind {
            SpectrumKind::Flat => self.s0,
            SpectrumKind::Lorentzian => {
                let hw = 0.5 * self.kappa;
                self.s0 * hw * hw / ((w - self.omega0).powi(2) + hw * hw)
            }
            SpectrumKind::Tabulated => {
                let table = match &self.table {
                    Some(t) if !t.is_empty() => t,
                    _ => return 0.0,
                };
                if table.len() == 1 {
                    return if w == table[0].0 { table[0].1 } else { 0.0 };
                }
                if w < table[0].0 || w > table[table.len() - 1].0 {
                    return 0.0;
                }
                let k = table.partition_point(|&(x, _)| x <= w).clamp(1, table.len() - 1);
                let (x0, y0) = table[k - 1];
                let (x1, y1) = table[k];
                y0 + (y1 - y0) * (w - x0) / (x1 - x0)
            }
        }
    }
}

/// Piecewise-constant `W_i(t) = values[(i, ⌊t/dt⌋)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub dt: f64,
    /// `n_sites × n_steps`, rad/s.
    pub values: DMatrix<f64>,
    pub seed: u64,
}

impl NoiseTrajectory {
    pub fn zeros(n_sites: usize, n_steps: usize, dt: f64) -> Self {
        Self {
            dt,
            values: DMatrix::zeros(n_sites, n_steps),
            seed: 0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_steps(&self) -> usize {
        self.values.ncols()
    }

    /// Time span covered by the grid.
    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    /// Value at time `t`; the last segment extends to the end of the grid.
    pub fn value_at(&self, site: usize, t: f64) -> f64 {
        let k = ((t / self.dt).floor() as usize).min(self.n_steps().saturating_sub(1));
        self.values[(site, k)]
    }

    /// Noise vector of segment `k`.
    pub fn segment(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.column(k).into_iter().copied()
    }

    /// Columns: `site` (1-based), `step_index`, `time_s`, `w_rad_per_s`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["site", "step_index", "time_s", "w_rad_per_s"])?;
        for i in 0..self.n_sites() {
            for k in 0..self.n_steps() {
                w.write_record([
                    (i + 1).to_string(),
                    k.to_string(),
                    format!("{:e}", k as f64 * self.dt),
                    format!("{:e}", self.values[(i, k)]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn n_grid_steps(t_total: f64, dt: f64) -> usize {
    // Tolerate t_total being an exact multiple of dt up to round-off.
    ((t_total / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

pub fn generate_telegraph(spec: &TelegraphSpec, n_sites: usize, t_total: f64) -> Result<NoiseTrajectory> {
    spec.validate()?;
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(invalid("t_total", format!("{t_total} must be positive")));
    }
    let n_steps = n_grid_steps(t_total, spec.dt_flip);
    let half = 0.5 * spec.w_max;
    let mut values = DMatrix::zeros(n_sites, n_steps);
    if half > 0.0 {
        for i in 0..n_sites {
            let mut rng = seed::rng(seed::derive(spec.seed, seed::domain::SITE, i as u64));
            for k in 0..n_steps {
                values[(i, k)] = if rng.random::<bool>() { half } else { -half };
            }
        }
    }
    Ok(NoiseTrajectory {
        dt: spec.dt_flip,
        values,
        seed: spec.seed,
    })
}

/// Stationary zero-mean real Gaussian noise with two-sided density `S`.
///
/// On the grid `ω_k = 2πk/T` each Fourier coefficient `X_k` is drawn
/// circular complex Gaussian with `E|X_k|² = T·S(ω_k)` (real for `k = 0`
/// and the Nyquist bin), Hermitian symmetry makes the signal real, and
/// `W_n = (1/T) Σ_k X_k e^{iω_k t_n}`. The expected periodogram on the grid
/// is then exactly `S(ω_k)`.
pub fn synthesize_gaussian(
    spec: &SpectrumSpec,
    n_samples: usize,
    t_total: f64,
    n_sites: usize,
    seed: u64,
) -> Result<NoiseTrajectory> {
    spec.validate()?;
    if n_samples < 2 {
        return Err(invalid("n_samples", format!("{n_samples} < 2")));
    }
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(invalid("t_total", format!("{t_total} must be positive")));
    }
    let n = n_samples;
    let dt = t_total / n as f64;
    let domega = 2.0 * std::f64::consts::PI / t_total;
    let sqrt_ts: Vec<f64> = (0..=n / 2)
        .map(|k| (t_total * spec.density(k as f64 * domega)).sqrt())
        .collect();

    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut values = DMatrix::zeros(n_sites, n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n_sites {
        let mut rng = seed::rng(seed::derive(seed, seed::domain::SITE, i as u64));
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for k in 0..=n / 2 {
            let amp = sqrt_ts[k];
            let self_conjugate = k == 0 || 2 * k == n;
            let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            if self_conjugate {
                buf[k] = Complex64::new(amp * re, 0.0);
            } else {
                let c = Complex64::new(re, im) * (amp * std::f64::consts::FRAC_1_SQRT_2);
                buf[k] = c;
                buf[n - k] = c.conj();
            }
        }
        fft.process(&mut buf);
        for (k, c) in buf.iter().enumerate() {
            values[(i, k)] = c.re / t_total;
        }
    }
    Ok(NoiseTrajectory { dt, values, seed })
}

/// Tabulated one-sided view `(ω_k, Ŝ(ω_k))`, `k = 0..=n/2`, of a two-sided
/// spectrum estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub omega: Vec<f64>,
    pub s: Vec<f64>,
    /// Number of site rows averaged.
    pub n_records: usize,
}

impl SpectrumEstimate {
    /// Estimate at the grid frequency closest to `omega`.
    pub fn nearest(&self, omega: f64) -> (f64, f64) {
        let k = self
            .omega
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - omega).abs().total_cmp(&(b.1 - omega).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        (self.omega[k], self.s[k])
    }

    pub fn as_spectrum(&self) -> SpectrumSpec {
        SpectrumSpec::tabulated(self.omega.iter().copied().zip(self.s.iter().copied()).collect())
    }

    /// Columns: `omega_rad_s`, `s_value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_spectrum_csv(writer, self.omega.iter().copied().zip(self.s.iter().copied()))
    }
}

pub fn write_spectrum_csv<W: Write>(writer: W, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["omega_rad_s", "s_value"])?;
    for (omega, s) in rows {
        w.write_record([format!("{omega:e}"), format!("{s:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Periodogram `|Σ_n W_n e^{−iω_k t_n} dt|² / T`, averaged over every site
/// row of every trajectory. All trajectories must share `dt` and length.
pub fn estimate_spectrum(trajectories: &[NoiseTrajectory]) -> Result<SpectrumEstimate> {
    let first = trajectories
        .first()
        .ok_or_else(|| invalid("trajectories", "need at least one trajectory"))?;
    let n = first.n_steps();
    if n == 0 || first.n_sites() == 0 {
        return Err(invalid("trajectories", "empty trajectory"));
    }
    let dt = first.dt;
    for t in trajectories {
        if t.n_steps() != n || (t.dt - dt).abs() > 1e-12 * dt {
            return Err(invalid("trajectories", "grids differ between trajectories"));
        }
    }
    let t_total = dt * n as f64;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let n_out = n / 2 + 1;
    let mut acc = vec![0.0; n_out];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut records = 0usize;
    for traj in trajectories {
        for i in 0..traj.n_sites() {
            for (k, c) in buf.iter_mut().enumerate() {
                *c = Complex64::new(traj.values[(i, k)], 0.0);
            }
            fft.process(&mut buf);
            for k in 0..n_out {
                acc[k] += (buf[k] * dt).norm_sqr() / t_total;
            }
            records += 1;
        }
    }
    let domega = 2.0 * std::f64::consts::PI / t_total;
    Ok(SpectrumEstimate {
        omega: (0..n_out).map(|k| k as f64 * domega).collect(),
        s: acc.into_iter().map(|a| a / records as f64).collect(),
        n_records: records,
    })
}

/// Integrated magnitude of the applied shifts, summed over sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCost {
    /// `Σ_i ∫|W_i| dt` (rad).
    pub abs_integral: f64,
    /// `Σ_i ∫W_i² dt` (rad²/s).
    pub square_integral: f64,
    pub duration: f64,
}

impl EnergyCost {
    /// `abs_integral / (j_max·t_max)`.
    pub fn normalized(&self, j_max: f64, t_max: f64) -> f64 {
        self.abs_integral / (j_max * t_max)
    }

    /// `square_integral / (j_max²·t_max)`.
    pub fn normalized_square(&self, j_max: f64, t_max: f64) -> f64 {
        self.square_integral / (j_max * j_max * t_max)
    }
}

/// Exact integrals of the piecewise-constant trajectory over its full grid.
pub fn energy_cost(traj: &NoiseTrajectory) -> EnergyCost {
    let (abs, sq) = traj
        .values
        .iter()
        .fold((0.0, 0.0), |(a, s), &w| (a + w.abs(), s + w * w));
    EnergyCost {
        abs_integral: abs * traj.dt,
        square_integral: sq * traj.dt,
        duration: traj.duration(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_amplitude_telegraph() {
        let spec = TelegraphSpec { w_max: 0.0, dt_flip: 1e-4, seed: 1 };
        let t = generate_telegraph(&spec, 3, 0.06).unwrap();
        assert_eq!(t.n_steps(), 600);
        assert!(t.values.iter().all(|&v| v == 0.0));
        assert_eq!(dephasing_rate(&spec), 0.0);
    }

    #[test]
    fn telegraph_values_and_balance() {
        let spec = TelegraphSpec { w_max: 3.0, dt_flip: 1.0, seed: 11 };
        let n = 100_000;
        let t = generate_telegraph(&spec, 1, n as f64).unwrap();
        assert_eq!(t.n_steps(), n);
        assert!(t.values.iter().all(|&v| v == 1.5 || v == -1.5));
        let plus = t.values.iter().filter(|&&v| v > 0.0).count() as f64 / n as f64;
        assert!((plus - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn telegraph_lagged_autocorrelation_vanishes() {
        let spec = TelegraphSpec { w_max: 2.0, dt_flip: 1.0, seed: 5 };
        let n = 50_000;
        let t = generate_telegraph(&spec, 2, n as f64).unwrap();
        let row: Vec<f64> = t.values.row(0).iter().copied().collect();
        let var: f64 = row.iter().map(|x| x * x).sum::<f64>() / n as f64;
        for lag in 1..5 {
            let c: f64 = (0..n - lag).map(|k| row[k] * row[k + lag]).sum::<f64>() / ((n - lag) as f64 * var);
            assert!(c.abs() < 3.0 / (n as f64).sqrt(), "lag {lag}: {c}");
        }
        let other: Vec<f64> = t.values.row(1).iter().copied().collect();
        let cross: f64 = row.iter().zip(&other).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * var);
        assert!(cross.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn dephasing_rate_law() {
        let jmax = 2.0 * std::f64::consts::PI * 30.0;
        let spec = TelegraphSpec::from_gamma(jmax, 100e-6, 0).unwrap();
        // √(γ/ΔT) with γ = 2π·30 rad/s, ΔT = 100 µs
        assert_relative_eq!(spec.w_max, 1372.936_849_295_653_5, max_relative = 1e-12);
        assert_relative_eq!(dephasing_rate(&spec), jmax, max_relative = 1e-12);
        let doubled = TelegraphSpec { w_max: 2.0 * spec.w_max, ..spec };
        assert_relative_eq!(dephasing_rate(&doubled), 4.0 * jmax, max_relative = 1e-12);
    }

    #[test]
    fn telegraph_is_deterministic() {
        let spec = TelegraphSpec { w_max: 1.0, dt_flip: 0.1, seed: 77 };
        assert_eq!(
            generate_telegraph(&spec, 4, 10.0).unwrap(),
            generate_telegraph(&spec, 4, 10.0).unwrap()
        );
    }

    #[test]
    fn lorentzian_shape() {
        let s = SpectrumSpec::lorentzian(2.0, 10.0, 4.0);
        assert_eq!(s.density(10.0), 2.0);
        assert_relative_eq!(s.density(12.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.density(-8.0), 1.0, epsilon = 1e-12);
        assert!(SpectrumSpec::lorentzian(1.0, 0.0, 0.0).validate().is_err());
        assert!(SpectrumSpec::flat(-1.0).validate().is_err());
    }

    #[test]
    fn tabulated_interpolation() {
        let s = SpectrumSpec::tabulated(vec![(1.0, 2.0), (3.0, 4.0)]);
        s.validate().unwrap();
        assert_eq!(s.density(2.0), 3.0);
        assert_eq!(s.density(-3.0), 4.0);
        assert_eq!(s.density(0.5), 0.0);
        assert_eq!(s.density(3.5), 0.0);
        assert!(SpectrumSpec::tabulated(vec![(1.0, -2.0)]).validate().is_err());
        assert!(SpectrumSpec::tabulated(vec![(1.0, 2.0), (1.0, 2.0)]).validate().is_err());
    }

    #[test]
    fn zero_weight_gaussian_is_zero() {
        let t = synthesize_gaussian(&SpectrumSpec::flat(0.0), 600, 0.06, 3, 9).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.0));
        assert_relative_eq!(t.dt, 1e-4, max_relative = 1e-12);
        assert!(synthesize_gaussian(&SpectrumSpec::flat(1.0), 1, 0.06, 3, 9).is_err());
    }

    #[test]
    fn gaussian_zero_mean() {
        let spec = SpectrumSpec::lorentzian(1.0, 50.0, 20.0);
        let reals: Vec<_> = (0..100)
            .map(|r| synthesize_gaussian(&spec, 600, 1.0, 1, r).unwrap())
            .collect();
        let var = reals.iter().flat_map(|t| t.values.iter()).map(|v| v * v).sum::<f64>()
            / (100.0 * 600.0);
        let std = var.sqrt();
        for k in [0, 137, 599] {
            let m = reals.iter().map(|t| t.values[(0, k)]).sum::<f64>() / 100.0;
            assert!(m.abs() < 3.0 * std / 10.0, "step {k}: {m}");
        }
    }

    #[test]
    fn gaussian_variance_matches_spectrum_integral() {
        // ⟨W²⟩ = (1/T²) Σ_k T S(ω_k) over the full two-sided grid.
        let spec = SpectrumSpec::flat(0.25);
        let t_total = 2.0;
        let n = 400;
        let trajs: Vec<_> = (0..200)
            .map(|r| synthesize_gaussian(&spec, n, t_total, 1, r).unwrap())
            .collect();
        let var = trajs.iter().flat_map(|t| t.values.iter()).map(|v| v * v).sum::<f64>()
            / (200.0 * n as f64);
        let expected = n as f64 * 0.25 / t_total;
        assert!((var / expected - 1.0).abs() < 0.02, "{var} vs {expected}");
    }

    #[test]
    fn spectrum_of_zero_is_zero() {
        let est = estimate_spectrum(&[NoiseTrajectory::zeros(2, 64, 0.1)]).unwrap();
        assert_eq!(est.omega.len(), 33);
        assert!(est.s.iter().all(|&s| s == 0.0));
        assert!(estimate_spectrum(&[]).is_err());
    }

    #[test]
    fn telegraph_low_frequency_spectrum() {
        let spec = TelegraphSpec { w_max: 2.0, dt_flip: 1e-3, seed: 3 };
        let trajs: Vec<_> = (0..20)
            .map(|r| generate_telegraph(&TelegraphSpec { seed: r, ..spec }, 10, 1.0).unwrap())
            .collect();
        let est = estimate_spectrum(&trajs).unwrap();
        let expected = spec.w_max.powi(2) * spec.dt_flip / 4.0;
        // first few bins, ω ≪ λ
        let low: f64 = est.s[1..11].iter().sum::<f64>() / 10.0;
        assert!((low / expected - 1.0).abs() < 0.15, "{low} vs {expected}");
    }

    #[test]
    fn energy_cost_exact() {
        assert_eq!(energy_cost(&NoiseTrajectory::zeros(3, 10, 0.1)).abs_integral, 0.0);
        let mut t = NoiseTrajectory::zeros(1, 10, 0.1);
        t.values.fill(-2.0);
        let c = energy_cost(&t);
        assert_relative_eq!(c.abs_integral, 2.0, epsilon = 1e-12);
        assert_relative_eq!(c.square_integral, 4.0, epsilon = 1e-12);
        assert_relative_eq!(c.normalized(0.5, 1.0), 4.0, epsilon = 1e-12);

        let spec = TelegraphSpec { w_max: 3.0, dt_flip: 1e-4, seed: 8 };
        let tele = generate_telegraph(&spec, 10, 0.06).unwrap();
        assert_relative_eq!(energy_cost(&tele).abs_integral, 1.5 * 0.06 * 10.0, max_relative = 1e-12);
    }

    #[test]
    fn csv_export_layout() {
        let mut t = NoiseTrajectory::zeros(2, 3, 0.5);
        t.values[(1, 2)] = 4.0;
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "site,step_index,time_s,w_rad_per_s");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[6], "2,2,1e0,4e0");
    }
}
