//! Monte Carlo propagation against its closed-form oracles. For Gaussian
//! noise the second-order cumulant is exact, so exp(−g) is the reference
//! the trajectory average must reproduce.

use mdcs_core::bath::{kubo_lineshape, NoiseModel};
use mdcs_core::dynamics::{propagate_coherence_stochastic, INITIAL_COHERENCE};
use mdcs_core::grid::TimeGrid;
use mdcs_core::quantum::TwoLevelEmitter;

fn emitter() -> TwoLevelEmitter {
    TwoLevelEmitter::new(1945.0, 1.0, 0.0).unwrap()
}

fn ou(delta: f64, lambda: f64) -> NoiseModel {
    NoiseModel::OrnsteinUhlenbeck { amplitude_rad_ps: delta, inverse_correlation_time_ps_inv: lambda }
}

#[test]
fn kubo_oracle_bounds_monte_carlo() {
    // Δ = Λ = 1, 10⁴ trajectories, fixed seed: the trajectory average of
    // exp(−i∫δω) must match exp(−g_Kubo) within 0.02 on t ∈ [0, 5] ps.
    let grid = TimeGrid::from_zero(0.005, 1001).unwrap();
    let trace = propagate_coherence_stochastic(&emitter(), &ou(1.0, 1.0), &grid, 10_000, 2024).unwrap();
    let mut max_dev: f64 = 0.0;
    for (k, &t) in grid.times().iter().enumerate() {
        let expected = (-kubo_lineshape(1.0, 1.0, t)).exp();
        let got = trace.values[k].norm() / INITIAL_COHERENCE;
        max_dev = max_dev.max((got - expected).abs());
    }
    assert!(max_dev < 0.02, "max deviation {max_dev}");
}

#[test]
fn white_noise_rate_recovered() {
    // γ = 0.5 ps⁻¹: log-linear fit of the decay on t ∈ [0, 4] ps recovers
    // the rate within 0.02 ps⁻¹.
    let gamma = 0.5;
    let grid = TimeGrid::from_zero(0.01, 401).unwrap();
    let trace = propagate_coherence_stochastic(
        &emitter(),
        &NoiseModel::White { rate_ps_inv: gamma },
        &grid,
        10_000,
        7,
    )
    .unwrap();
    let times = grid.times();
    let n = times.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (k, &t) in times.iter().enumerate() {
        let y = (trace.values[k].norm() / INITIAL_COHERENCE).ln();
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let rate = -slope;
    assert!((rate - gamma).abs() < 0.02, "fitted rate {rate}");
}

#[test]
fn stochastic_matches_cumulant_within_sampling_error() {
    // For Gaussian noise the cumulant result is exact; the Monte Carlo
    // estimate must sit within 3 sample standard errors of it, for both
    // trajectory budgets.
    let (delta, lambda) = (0.9, 1.4);
    let grid = TimeGrid::from_zero(0.01, 301).unwrap();
    for (n_traj, seed) in [(1_000usize, 11u64), (10_000, 12)] {
        let trace =
            propagate_coherence_stochastic(&emitter(), &ou(delta, lambda), &grid, n_traj, seed).unwrap();
        for (k, &t) in grid.times().iter().enumerate() {
            let expected = (-kubo_lineshape(delta, lambda, t)).exp();
            let got = trace.values[k].norm() / INITIAL_COHERENCE;
            // Unit-modulus summands: Var(Re) + Var(Im) = 1 − |mean|².
            let se = ((1.0 - expected * expected).max(0.0) / n_traj as f64).sqrt();
            let dev = (got - expected).abs();
            assert!(
                dev <= 3.0 * se + 5e-4,
                "n={n_traj} t={t}: deviation {dev} exceeds 3×SE {se}"
            );
        }
    }
}
