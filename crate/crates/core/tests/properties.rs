use nalgebra::DMatrix;
use proptest::prelude::*;

use enaqt::analysis::{
    bootstrap_ci, fit_power_law, mean_of, transport_efficiency, wavepacket_width, width_bound, FitWindow, WidthSeries,
};
use enaqt::dynamics::{classical_rates, rate_equation_evolve, uniform_times, PopulationSeries};
use enaqt::model::{
    assemble_hamiltonian, build_coupling_matrix, eigensystem, DisorderProfile, NetworkSpec,
};

fn spec(n: usize, alpha: f64) -> NetworkSpec {
    NetworkSpec { n_sites: n, j_max: 1.0, alpha, source_site: 1, target_sites: vec![], t_max: 1.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_is_hermitian_and_diagonalizes(
        n in 2usize..12,
        alpha in 0.0f64..3.0,
        b in prop::collection::vec(-3.0f64..3.0, 12),
    ) {
        let c = build_coupling_matrix(&spec(n, alpha)).unwrap();
        let d = DisorderProfile::from_values(b[..n].to_vec());
        let h = assemble_hamiltonian(&c, &d, &vec![0.0; n]).unwrap();
        prop_assert!(h.relative_asymmetry() < 1e-12);
        let es = eigensystem(&h).unwrap();
        prop_assert!(es.reconstruction_error(&h) < 1e-9 * h.norm().max(1.0));
        prop_assert!(es.orthonormality_error() < 1e-9);
    }

    #[test]
    fn rates_fall_in_zeno_regime(db in 0.01f64..5.0, g in 0.0f64..10.0, dg in 0.01f64..10.0) {
        let c = build_coupling_matrix(&spec(2, 1.22)).unwrap();
        let d = DisorderProfile::from_values(vec![db, 0.0]);
        let g1 = 2.0 * db + g;
        let r1 = classical_rates(&c, &d, g1).unwrap().get(0, 1);
        let r2 = classical_rates(&c, &d, g1 + dg).unwrap().get(0, 1);
        prop_assert!(r2 < r1);
    }

    #[test]
    fn efficiencies_sum_to_one_for_conserved_populations(
        b in prop::collection::vec(-2.0f64..2.0, 6),
        gamma in 0.05f64..5.0,
    ) {
        let c = build_coupling_matrix(&spec(6, 1.22)).unwrap();
        let r = classical_rates(&c, &DisorderProfile::from_values(b), gamma).unwrap();
        let times = uniform_times(3.0, 0.05).unwrap();
        let mut p0 = vec![0.0; 6];
        p0[2] = 1.0;
        let pop = rate_equation_evolve(&r, &p0, &times).unwrap();
        let eta = transport_efficiency(&pop, 3.0).unwrap();
        prop_assert!((eta.eta_normalized.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn width_never_exceeds_bound(p in prop::collection::vec(0.0f64..1.0, 10), src in 1usize..10) {
        let total: f64 = p.iter().sum();
        prop_assume!(total > 1e-6);
        let col: Vec<f64> = p.iter().map(|x| x / total).collect();
        let series = PopulationSeries::new(vec![0.0], DMatrix::from_column_slice(10, 1, &col)).unwrap();
        let w = wavepacket_width(&series, src).unwrap();
        prop_assert!(w.sigma_wp[0] <= width_bound(10, src) + 1e-12);
    }

    #[test]
    fn fit_exponent_is_unit_free(a in 0.1f64..10.0, c in 0.1f64..1.5, scale in 1e-4f64..1e3) {
        let times: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let base = WidthSeries { sigma_wp: times.iter().map(|t| a * t.powf(c)).collect(), times: times.clone(), source_site: 3 };
        let scaled = WidthSeries { times: times.iter().map(|t| t * scale).collect(), ..base.clone() };
        let f = fit_power_law(&base, FitWindow { t_lo: 1.0, t_hi: 20.0 }).unwrap();
        let g = fit_power_law(&scaled, FitWindow { t_lo: scale, t_hi: 20.0 * scale }).unwrap();
        prop_assert!((f.exponent - g.exponent).abs() < 1e-9);
        prop_assert!((g.amplitude / (f.amplitude * scale.powf(-f.exponent)) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bootstrap_interval_contains_mean(xs in prop::collection::vec(-5.0f64..5.0, 2..60), seed in any::<u64>()) {
        let ci = bootstrap_ci(&xs, mean_of, 200, seed).unwrap();
        prop_assert!(ci.lower <= ci.estimate + 1e-12 && ci.estimate <= ci.upper + 1e-12);
    }
}
