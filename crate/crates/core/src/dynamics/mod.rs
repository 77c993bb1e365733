//! Coherence propagation and third-order response functions.
//!
//! Three propagation routes are provided for the optical coherence of a
//! two-level emitter: the Markovian closed form, the second-order cumulant
//! expression ρ₀₁(t) = ρ₀₁(0)·exp(−iω̄t)·exp(−g(t)), and direct Monte Carlo
//! averaging of the stochastic phase exp(−i∫δω dτ) over noise trajectories.
//! For Gaussian noise the cumulant expression is exact, which makes the two
//! numerical routes oracles for each other.
//!
//! All propagators start from the coherence of the equal superposition,
//! ρ₀₁(0) = 1/2.

mod pair;
mod response;

pub use pair::{double_quantum_response, EmitterPair, PairDephasing};
pub use response::{
    echo_decay_curve, photon_echo_response, zero_quantum_response, DelayAxis, Pathway, Response3,
    SpectralDiffusion, VibronicMode,
};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bath::{BathError, LineshapeTable, NoiseModel};
use crate::grid::TimeGrid;
use crate::quantum::{box_muller_pair, TwoLevelEmitter};

/// Initial coherence magnitude, ρ₀₁(0) of the equal superposition.
pub const INITIAL_COHERENCE: f64 = 0.5;

/// Trajectories per reduction batch. Batch sums are accumulated in batch
/// order, so results are bitwise identical for any rayon worker count.
const TRAJECTORY_BATCH: usize = 64;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("lineshape table grid does not match the requested grid")]
    GridMismatch,
    #[error("no trajectory sampler is defined for spectral-density noise models")]
    NoTrajectorySampler,
    #[error("stochastic propagation needs at least 100 trajectories, got {0}")]
    TooFewTrajectories(usize),
    #[error("response axis `{0}` must be a time grid")]
    ExpectedGridAxis(&'static str),
    #[error("response pathway {got:?} does not match required {want:?}")]
    WrongPathway { got: Pathway, want: Pathway },
    #[error("delay must be nonnegative, got {0} ps")]
    NegativeDelay(f64),
    #[error("spectral diffusion rate must be nonnegative, got {0} ps⁻¹")]
    NegativeDiffusionRate(f64),
    #[error("invalid vibronic mode: {0}")]
    InvalidMode(String),
    #[error("dephasing rate must be nonnegative, got {0} ps⁻¹")]
    NegativeDephasingRate(f64),
    #[error(transparent)]
    Bath(#[from] BathError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationMethod {
    AnalyticMarkov,
    Cumulant,
    Stochastic { n_traj: usize, seed: u64 },
}

/// Optical coherence ρ₀₁ sampled on a time grid.
#[derive(Debug, Clone)]
pub struct CoherenceTrace {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub method: PropagationMethod,
}

impl CoherenceTrace {
    /// Mirror element ρ₁₀(t) = conj(ρ₀₁(t)).
    pub fn rho10(&self, index: usize) -> Complex64 {
        self.values[index].conj()
    }
}

/// Markov limit: ρ₀₁(t) = ρ₀₁(0)·exp(−iω̄t)·exp(−γt), exponential
/// decoherence at the emitter's pure dephasing rate.
pub fn markovian_coherence(emitter: &TwoLevelEmitter, grid: &TimeGrid) -> CoherenceTrace {
    let omega = emitter.angular_frequency();
    let gamma = emitter.pure_dephasing_rate();
    let values = grid
        .times()
        .iter()
        .map(|&t| Complex64::from_polar(INITIAL_COHERENCE * (-gamma * t).exp(), -omega * t))
        .collect();
    CoherenceTrace { grid: *grid, values, method: PropagationMethod::AnalyticMarkov }
}

/// Cumulant route: ρ₀₁(t) = ρ₀₁(0)·exp(−iω̄t)·exp(−g(t)) with g taken from
/// the tabulated lineshape, whose grid must match.
pub fn propagate_coherence_cumulant(
    emitter: &TwoLevelEmitter,
    lineshape: &LineshapeTable,
    grid: &TimeGrid,
) -> Result<CoherenceTrace, DynamicsError> {
    if lineshape.grid() != grid {
        return Err(DynamicsError::GridMismatch);
    }
    let omega = emitter.angular_frequency();
    let values = grid
        .times()
        .iter()
        .zip(lineshape.g_values())
        .map(|(&t, &g)| Complex64::from_polar(INITIAL_COHERENCE, -omega * t) * (-g).exp())
        .collect();
    Ok(CoherenceTrace { grid: *grid, values, method: PropagationMethod::Cumulant })
}

/// Monte Carlo route: averages exp(−i∫₀ᵗ δω(τ)dτ) over `n_traj` noise
/// trajectories.
///
/// Ornstein–Uhlenbeck trajectories use the exact conditional update
/// x(t+h) = x(t)·e^{−Λh} + ξ·Δ·√(1−e^{−2Λh}) from the stationary initial
/// distribution, so there is no step-size bias in the process itself; white
/// noise uses Gaussian phase increments of variance 2γh per step. Trajectory
/// j draws from ChaCha8 stream j of the given seed and the reduction order
/// is fixed, making the result reproducible for any worker count.
pub fn propagate_coherence_stochastic(
    emitter: &TwoLevelEmitter,
    noise: &NoiseModel,
    grid: &TimeGrid,
    n_traj: usize,
    seed: u64,
) -> Result<CoherenceTrace, DynamicsError> {
    noise.validate()?;
    if n_traj < 100 {
        return Err(DynamicsError::TooFewTrajectories(n_traj));
    }
    let kind = match noise {
        NoiseModel::White { rate_ps_inv } => TrajectoryKind::White { rate: *rate_ps_inv },
        NoiseModel::OrnsteinUhlenbeck { amplitude_rad_ps, inverse_correlation_time_ps_inv } => {
            TrajectoryKind::OrnsteinUhlenbeck {
                delta: *amplitude_rad_ps,
                lambda: *inverse_correlation_time_ps_inv,
            }
        }
        NoiseModel::FromSpectralDensity { .. } => return Err(DynamicsError::NoTrajectorySampler),
    };

    let n_points = grid.count();
    let h = grid.step();
    let n_batches = n_traj.div_ceil(TRAJECTORY_BATCH);
    let batch_sums: Vec<Vec<Complex64>> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let lo = batch * TRAJECTORY_BATCH;
            let hi = ((batch + 1) * TRAJECTORY_BATCH).min(n_traj);
            let mut sum = vec![Complex64::new(0.0, 0.0); n_points];
            let mut phases = vec![0.0_f64; n_points];
            for traj in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(traj as u64);
                accumulate_phase(&kind, h, &mut rng, &mut phases);
                for (acc, &phi) in sum.iter_mut().zip(&phases) {
                    *acc += Complex64::from_polar(1.0, -phi);
                }
            }
            sum
        })
        .collect();

    let mut mean = vec![Complex64::new(0.0, 0.0); n_points];
    for batch in &batch_sums {
        for (acc, v) in mean.iter_mut().zip(batch) {
            *acc += v;
        }
    }
    let omega = emitter.angular_frequency();
    let norm = 1.0 / n_traj as f64;
    let values = grid
        .times()
        .iter()
        .zip(&mean)
        .map(|(&t, &m)| Complex64::from_polar(INITIAL_COHERENCE, -omega * t) * m * norm)
        .collect();
    Ok(CoherenceTrace { grid: *grid, values, method: PropagationMethod::Stochastic { n_traj, seed } })
}

enum TrajectoryKind {
    White { rate: f64 },
    OrnsteinUhlenbeck { delta: f64, lambda: f64 },
}

/// Accumulated phase φ(t_k) = ∫₀^{t_k} δω dτ for one trajectory.
fn accumulate_phase(kind: &TrajectoryKind, h: f64, rng: &mut ChaCha8Rng, phases: &mut [f64]) {
    match *kind {
        TrajectoryKind::White { rate } => {
            let sigma_step = (2.0 * rate * h).sqrt();
            let mut phi = 0.0;
            phases[0] = 0.0;
            let mut pending: Option<f64> = None;
            for p in phases.iter_mut().skip(1) {
                let z = match pending.take() {
                    Some(z) => z,
                    None => {
                        let (z0, z1) = box_muller_pair(rng);
                        pending = Some(z1);
                        z0
                    }
                };
                phi += sigma_step * z;
                *p = phi;
            }
        }
        TrajectoryKind::OrnsteinUhlenbeck { delta, lambda } => {
            let decay = (-lambda * h).exp();
            let kick = delta * (1.0 - decay * decay).sqrt();
            let mut pending: Option<f64> = None;
            let mut draw = |rng: &mut ChaCha8Rng| match pending.take() {
                Some(z) => z,
                None => {
                    let (z0, z1) = box_muller_pair(rng);
                    pending = Some(z1);
                    z0
                }
            };
            // Stationary initial value.
            let mut x = delta * draw(rng);
            let mut phi = 0.0;
            phases[0] = 0.0;
            for p in phases.iter_mut().skip(1) {
                let x_next = x * decay + kick * draw(rng);
                phi += 0.5 * h * (x + x_next);
                x = x_next;
                *p = phi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::lineshape_function;
    use crate::quantum::{evolve_pure_state, PureState};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn emitter(gamma: f64) -> TwoLevelEmitter {
        TwoLevelEmitter::new(1945.0, 1.0, gamma).unwrap()
    }

    #[test]
    fn markovian_without_dephasing_keeps_magnitude() {
        let grid = TimeGrid::from_zero(0.1, 64).unwrap();
        let trace = markovian_coherence(&emitter(0.0), &grid);
        for v in &trace.values {
            assert_relative_eq!(v.norm(), INITIAL_COHERENCE, max_relative = 1e-13);
        }
    }

    #[test]
    fn markovian_decay_closed_form() {
        let grid = TimeGrid::from_zero(1.0, 3).unwrap();
        let trace = markovian_coherence(&emitter(0.5), &grid);
        assert_relative_eq!(trace.values[2].norm(), INITIAL_COHERENCE * (-1.0_f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn markovian_phase_matches_pure_state_evolution() {
        let em = emitter(0.2);
        let grid = TimeGrid::from_zero(0.37, 8).unwrap();
        let trace = markovian_coherence(&em, &grid);
        let s0 = PureState::equal_superposition();
        for (k, &t) in grid.times().iter().enumerate() {
            let evolved = evolve_pure_state(&s0, &em, t);
            let rho01 = evolved.a1 * evolved.a0.conj();
            let dphi = (trace.values[k] * rho01.conj()).arg();
            assert_abs_diff_eq!(dphi, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cumulant_with_zero_g_is_pure_rotation() {
        let em = emitter(0.0);
        let grid = TimeGrid::from_zero(0.05, 32).unwrap();
        let table = lineshape_function(&NoiseModel::White { rate_ps_inv: 0.0 }, &grid).unwrap();
        let trace = propagate_coherence_cumulant(&em, &table, &grid).unwrap();
        for (k, &t) in grid.times().iter().enumerate() {
            let expected = Complex64::from_polar(INITIAL_COHERENCE, -em.angular_frequency() * t);
            assert!((trace.values[k] - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn cumulant_white_noise_equals_markovian() {
        let em = emitter(0.31);
        let grid = TimeGrid::from_zero(0.2, 50).unwrap();
        let table = lineshape_function(&NoiseModel::White { rate_ps_inv: 0.31 }, &grid).unwrap();
        let cumulant = propagate_coherence_cumulant(&em, &table, &grid).unwrap();
        let markov = markovian_coherence(&em, &grid);
        for k in 0..grid.count() {
            assert!((cumulant.values[k] - markov.values[k]).norm() <= 1e-12);
        }
    }

    #[test]
    fn cumulant_kubo_magnitude() {
        let em = emitter(0.0);
        let grid = TimeGrid::from_zero(0.01, 101).unwrap();
        let nm = NoiseModel::OrnsteinUhlenbeck { amplitude_rad_ps: 1.0, inverse_correlation_time_ps_inv: 1.0 };
        let table = lineshape_function(&nm, &grid).unwrap();
        let trace = propagate_coherence_cumulant(&em, &table, &grid).unwrap();
        let ratio = trace.values[100].norm() / INITIAL_COHERENCE;
        assert_relative_eq!(ratio, (-(-1.0_f64).exp()).exp(), max_relative = 1e-5);
    }

    #[test]
    fn cumulant_rejects_grid_mismatch() {
        let em = emitter(0.0);
        let grid = TimeGrid::from_zero(0.01, 101).unwrap();
        let other = TimeGrid::from_zero(0.02, 101).unwrap();
        let table = lineshape_function(&NoiseModel::White { rate_ps_inv: 0.1 }, &grid).unwrap();
        assert!(matches!(
            propagate_coherence_cumulant(&em, &table, &other),
            Err(DynamicsError::GridMismatch)
        ));
    }

    #[test]
    fn stochastic_zero_amplitude_is_pure_rotation() {
        let em = emitter(0.0);
        let grid = TimeGrid::from_zero(0.05, 40).unwrap();
        let nm = NoiseModel::OrnsteinUhlenbeck { amplitude_rad_ps: 0.0, inverse_correlation_time_ps_inv: 1.0 };
        let trace = propagate_coherence_stochastic(&em, &nm, &grid, 128, 5).unwrap();
        for v in &trace.values {
            assert_relative_eq!(v.norm(), INITIAL_COHERENCE, max_relative = 1e-12);
        }
    }

    #[test]
    fn stochastic_rejects_invalid_inputs() {
        let em = emitter(0.0);
        let grid = TimeGrid::from_zero(0.05, 16).unwrap();
        let nm = NoiseModel::OrnsteinUhlenbeck { amplitude_rad_ps: 1.0, inverse_correlation_time_ps_inv: 1.0 };
        assert!(matches!(
            propagate_coherence_stochastic(&em, &nm, &grid, 99, 0),
            Err(DynamicsError::TooFewTrajectories(99))
        ));
        let sd_noise = NoiseModel::FromSpectralDensity {
            density: crate::bath::SpectralDensity::Ohmic { coupling: 1.0, cutoff_mev: 1.0 },
            temperature_k: 10.0,
        };
        assert!(matches!(
            propagate_coherence_stochastic(&em, &sd_noise, &grid, 1000, 0),
            Err(DynamicsError::NoTrajectorySampler)
        ));
    }

    #[test]
    fn stochastic_is_deterministic_across_thread_counts() {
        let em = emitter(0.0);
        let grid = TimeGrid::from_zero(0.05, 33).unwrap();
        let nm = NoiseModel::OrnsteinUhlenbeck { amplitude_rad_ps: 0.8, inverse_correlation_time_ps_inv: 1.3 };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| propagate_coherence_stochastic(&em, &nm, &grid, 512, 77).unwrap().values)
        };
        let single = run(1);
        let multi = run(4);
        assert_eq!(single, multi);
        let repeat = run(4);
        assert_eq!(multi, repeat);
    }

    #[test]
    fn trace_is_hermitian() {
        let grid = TimeGrid::from_zero(0.1, 16).unwrap();
        let trace = markovian_coherence(&emitter(0.4), &grid);
        for k in 0..grid.count() {
            assert_eq!(trace.rho10(k), trace.values[k].conj());
        }
    }
}
