//! Property tests for the structural invariants: unitarity, composition,
//! purity, pathway cancellation and axis bookkeeping.

use mdcs_core::dynamics::{double_quantum_response, DelayAxis, EmitterPair, PairDephasing};
use mdcs_core::grid::TimeGrid;
use mdcs_core::quantum::{
    dipole_expectation, evolve_pure_state, DensityMatrix2, PureState, TwoLevelEmitter,
};
use mdcs_core::spectra::EnergyAxis;
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_state() -> impl Strategy<Value = PureState> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU).prop_map(|(p, ph0, ph1)| {
        let a0 = Complex64::from_polar(p.sqrt(), ph0);
        let a1 = Complex64::from_polar((1.0 - p).sqrt(), ph1);
        PureState::new(a0, a1).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evolution_preserves_norm(state in arb_state(), energy in 1.0..4000.0f64, t in 0.0..100.0f64) {
        let emitter = TwoLevelEmitter::new(energy, 1.0, 0.0).unwrap();
        let out = evolve_pure_state(&state, &emitter, t);
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_composes(state in arb_state(), energy in 1.0..2100.0f64,
                          t1 in 0.0..0.3f64, t2 in 0.0..0.3f64) {
        // Total phases stay below ~2000 rad so the 1e-12 amplitude bound is
        // meaningful; at larger ω·t the float rounding of t1+t2 alone
        // exceeds it.
        let emitter = TwoLevelEmitter::new(energy, 1.0, 0.0).unwrap();
        let stepwise = evolve_pure_state(&evolve_pure_state(&state, &emitter, t1), &emitter, t2);
        let direct = evolve_pure_state(&state, &emitter, t1 + t2);
        prop_assert!((stepwise.a0 - direct.a0).norm() < 1e-12);
        prop_assert!((stepwise.a1 - direct.a1).norm() < 1e-12);
    }

    #[test]
    fn dipole_expectation_is_periodic(state in arb_state(), energy in 10.0..4000.0f64, t in 0.0..5.0f64) {
        let emitter = TwoLevelEmitter::new(energy, 1.0, 0.0).unwrap();
        let period = std::f64::consts::TAU / emitter.angular_frequency();
        let a = dipole_expectation(&state, &emitter, t);
        let b = dipole_expectation(&state, &emitter, t + period);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn pure_states_give_pure_density_matrices(state in arb_state()) {
        let rho = DensityMatrix2::from_pure(&state);
        prop_assert!(rho.purity_defect() < 1e-12);
        prop_assert!((rho.rho00 + rho.rho11 - 1.0).abs() < 1e-12);
        prop_assert!(rho.rho00 * rho.rho11 - rho.rho01.norm_sqr() >= -1e-12);
    }

    #[test]
    fn double_quantum_cancellation_is_algebraic(
        gamma_a in 0.0..3.0f64,
        gamma_b in 0.0..3.0f64,
        e_a in 1500.0..1700.0f64,
        detune in -5.0..5.0f64,
        mu_a in 0.1..2.0f64,
        mu_b in 0.1..2.0f64,
    ) {
        let pair = EmitterPair::with_biexciton_shift(
            TwoLevelEmitter::new(e_a, mu_a, 0.0).unwrap(),
            TwoLevelEmitter::new(e_a + detune, mu_b, 0.0).unwrap(),
            0.0,
            0.0,
        );
        let deph = PairDephasing::new(gamma_a, gamma_b);
        let w_grid = TimeGrid::from_zero(0.02, 24).unwrap();
        let t_grid = TimeGrid::from_zero(0.03, 24).unwrap();
        let resp = double_quantum_response(&pair, &deph, DelayAxis::Fixed(0.15), &w_grid, &t_grid, e_a)
            .unwrap();
        let leak = resp.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = (mu_a * mu_b).powi(2);
        prop_assert!(leak <= 1e-11 * scale, "leak {} at scale {}", leak, scale);
    }

    #[test]
    fn energy_axis_roundtrip(min in -100.0..2000.0f64, step in 0.001..2.0f64, count in 4..512usize) {
        let axis = EnergyAxis::new(min, step, count).unwrap();
        for i in (0..count).step_by(7) {
            prop_assert_eq!(axis.nearest_index(axis.at(i)), Some(i));
        }
        prop_assert!(axis.nearest_index(axis.max_mev() + step).is_none());
    }
}
