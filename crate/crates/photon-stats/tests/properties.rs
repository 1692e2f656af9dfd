//! Property-based checks of the analytic layer: invariants that must hold
//! across the whole parameter space, not just at hand-picked points.

use proptest::prelude::*;

use photon_stats::{
    bose_einstein_pmf, binomial_thinning, build_bounce_series, cavity_energy_series,
    default_i_max, einstein_second_moment, independent_cavity_second_moment,
    kirchhoff_mean_check, mean_occupancy, wave_cavity_second_moment, wave_transmit, Mean64,
    Pmf64, ReducedFrequency, Transmittance64, TransmissionModel,
};

const TAIL_TOL: f64 = 1e-14;

fn mean(m: f64) -> Mean64 {
    Mean64::new(m).unwrap()
}

fn tr(a: f64) -> Transmittance64 {
    Transmittance64::new(a).unwrap()
}

fn total_mass(p: &Pmf64) -> f64 {
    photon_stats::numerics::compensated_sum(p.probs().iter().copied()) + p.tail_mass()
}

proptest! {
    #[test]
    fn thermal_pmf_normalizes(m in 0.0..100.0f64) {
        let p = bose_einstein_pmf(mean(m), TAIL_TOL).unwrap();
        prop_assert!((total_mass(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_pmf_recovers_its_mean(m in 0.0..50.0f64) {
        let p = bose_einstein_pmf(mean(m), TAIL_TOL).unwrap();
        let r = p.moments();
        prop_assert!((r.mean - m).abs() < 1e-9 * (1.0 + m));
        let einstein = einstein_second_moment(mean(m));
        prop_assert!((r.second_moment - einstein).abs() < 1e-8 * (1.0 + einstein));
    }

    #[test]
    fn transforms_preserve_normalization(m in 0.01..20.0f64, a in 0.0..=1.0f64) {
        let p = bose_einstein_pmf(mean(m), TAIL_TOL).unwrap();
        let thinned = binomial_thinning(&p, tr(a));
        prop_assert!((total_mass(&thinned) - 1.0).abs() < 1e-11);
        let waved = wave_transmit(&p, tr(a));
        prop_assert!((total_mass(&waved) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_output_pins_the_zero_count(m in 0.01..20.0f64, a in 0.0..=1.0f64) {
        let p = bose_einstein_pmf(mean(m), TAIL_TOL).unwrap();
        let out = wave_transmit(&p, tr(a));
        let p0 = p.prob(0);
        prop_assert!((out.prob(0) - (1.0 - a * (1.0 - p0))).abs() <= 1e-15);
        // Every other stored entry scales by exactly a.
        for n in 1..=p.n_max() {
            prop_assert!((out.prob(n) - a * p.prob(n)).abs() <= 1e-15);
        }
    }

    #[test]
    fn both_models_scale_the_mean_identically(m in 0.01..10.0f64, a in 0.0..=1.0f64) {
        let p = bose_einstein_pmf(mean(m), TAIL_TOL).unwrap();
        let thinned = binomial_thinning(&p, tr(a));
        let waved = wave_transmit(&p, tr(a));
        // The thinned tail is shapeless, so grant it its reported slack.
        let slack = thinned.moments().mean_tail_error + a * p.moments().mean_tail_error;
        prop_assert!(kirchhoff_mean_check(&p, &thinned, tr(a)) <= 1e-10 + slack);
        prop_assert!(kirchhoff_mean_check(&p, &waved, tr(a)) <= 1e-10);
    }

    #[test]
    fn escape_weights_exhaust_the_cavity(a in 0.001..=1.0f64) {
        let i_max = default_i_max(tr(a)).unwrap();
        let series = build_bounce_series(
            TransmissionModel::Wave,
            mean(1.0),
            tr(a),
            i_max,
            TAIL_TOL,
        )
        .unwrap();
        let total =
            photon_stats::numerics::compensated_sum(series.weights().iter().copied())
                + series.residual_weight();
        prop_assert!((total - 1.0).abs() < 1e-15);
        prop_assert!(series.residual_weight() < 1e-12);
        let energy = cavity_energy_series(tr(a), i_max).unwrap();
        prop_assert!((energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_aggregate_grows_with_transmittance(m in 0.01..10.0f64, a in 0.01..0.99f64) {
        let i_max = 2000;
        let lo = independent_cavity_second_moment(mean(m), tr(a), i_max).unwrap();
        let hi = independent_cavity_second_moment(mean(m), tr(a + 0.01), i_max).unwrap();
        prop_assert!(lo.second_moment_closed < hi.second_moment_closed);
    }

    #[test]
    fn wave_beats_independent_below_unit_transmittance(
        m in 0.01..10.0f64,
        a in 0.01..1.0f64,
    ) {
        let i_max = default_i_max(tr(a)).unwrap();
        let ind = independent_cavity_second_moment(mean(m), tr(a), i_max).unwrap();
        let wav = wave_cavity_second_moment(mean(m), tr(a), i_max).unwrap();
        let gap = wav.second_moment_closed - ind.second_moment_closed;
        prop_assert!(gap > 0.0);
        let expect = 4.0 * m * m * (1.0 - a) / (2.0 - a);
        prop_assert!((gap - expect).abs() < 1e-10 * (1.0 + expect));
    }

    #[test]
    fn occupancy_decreases_with_reduced_frequency(
        x1 in 0.001..50.0f64,
        dx in 0.001..10.0f64,
    ) {
        let n1 = mean_occupancy(ReducedFrequency::new(x1).unwrap()).unwrap();
        let n2 = mean_occupancy(ReducedFrequency::new(x1 + dx).unwrap()).unwrap();
        prop_assert!(n1.value() > n2.value());
    }
}
