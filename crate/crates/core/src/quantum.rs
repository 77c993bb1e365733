//! Two-level emitters, their exact closed-form dynamics, and ensemble
//! sampling of static resonance-frequency disorder.
//!
//! The energy gauge puts the ground state at zero, so only the transition
//! energy E₁₀ appears anywhere. The coherence stored in [`DensityMatrix2`]
//! is the component that rotates as exp(−iω̄t) for a free emitter; its
//! mirror element is always the complex conjugate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::units::energy_to_angular_frequency;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("mean transition energy must be positive, got {0} meV")]
    NonPositiveEnergy(f64),
    #[error("transition dipole must be nonnegative, got {0}")]
    NegativeDipole(f64),
    #[error("pure dephasing rate must be nonnegative, got {0} ps⁻¹")]
    NegativeDephasingRate(f64),
    #[error("state norm² = {0} differs from 1 by more than 1e-12")]
    NotNormalized(f64),
    #[error("density matrix trace = {0} differs from 1 by more than 1e-12")]
    TraceNotOne(f64),
    #[error("occupations must lie in [0, 1], got rho00 = {rho00}, rho11 = {rho11}")]
    OccupationOutOfRange { rho00: f64, rho11: f64 },
    #[error("density matrix not positive: rho00·rho11 − |rho01|² = {0}")]
    NotPositive(f64),
    #[error("inhomogeneous sigma must be nonnegative, got {0} meV")]
    NegativeSigma(f64),
}

/// Isolated two-level emitter: transition energy E₁₀ (meV), transition
/// dipole magnitude μ₁₀ (arbitrary units), and pure dephasing rate γ (ps⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelEmitter {
    mean_energy_mev: f64,
    dipole: f64,
    pure_dephasing_rate: f64,
}

impl TwoLevelEmitter {
    pub fn new(mean_energy_mev: f64, dipole: f64, pure_dephasing_rate: f64) -> Result<Self, QuantumError> {
        if !(mean_energy_mev > 0.0) {
            return Err(QuantumError::NonPositiveEnergy(mean_energy_mev));
        }
        if !(dipole >= 0.0) {
            return Err(QuantumError::NegativeDipole(dipole));
        }
        if !(pure_dephasing_rate >= 0.0) {
            return Err(QuantumError::NegativeDephasingRate(pure_dephasing_rate));
        }
        Ok(Self { mean_energy_mev, dipole, pure_dephasing_rate })
    }

    pub fn mean_energy_mev(&self) -> f64 {
        self.mean_energy_mev
    }

    pub fn dipole(&self) -> f64 {
        self.dipole
    }

    pub fn pure_dephasing_rate(&self) -> f64 {
        self.pure_dephasing_rate
    }

    /// Mean angular transition frequency ω̄ = E₁₀/ħ in rad/ps.
    pub fn angular_frequency(&self) -> f64 {
        energy_to_angular_frequency(self.mean_energy_mev)
    }
}

/// Normalized pure state a₀|0⟩ + a₁|1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl PureState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self, QuantumError> {
        let norm2 = a0.norm_sqr() + a1.norm_sqr();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(norm2));
        }
        Ok(Self { a0, a1 })
    }

    pub fn ground() -> Self {
        Self { a0: Complex64::new(1.0, 0.0), a1: Complex64::new(0.0, 0.0) }
    }

    /// Equal superposition (|0⟩ + |1⟩)/√2, the state of maximal coherence.
    pub fn equal_superposition() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { a0: h, a1: h }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }
}

/// Two-level density matrix. `rho01` is the coherence amplitude that
/// rotates as exp(−iω̄t) under free evolution; the opposite element is
/// `rho10() = conj(rho01)` and is not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub rho00: f64,
    pub rho11: f64,
    pub rho01: Complex64,
}

impl DensityMatrix2 {
    pub fn new(rho00: f64, rho11: f64, rho01: Complex64) -> Result<Self, QuantumError> {
        let trace = rho00 + rho11;
        if (trace - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::TraceNotOne(trace));
        }
        if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&rho00) || !(-NORM_TOL..=1.0 + NORM_TOL).contains(&rho11) {
            return Err(QuantumError::OccupationOutOfRange { rho00, rho11 });
        }
        let det = rho00 * rho11 - rho01.norm_sqr();
        if det < -NORM_TOL {
            return Err(QuantumError::NotPositive(det));
        }
        Ok(Self { rho00, rho11, rho01 })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            rho00: state.a0.norm_sqr(),
            rho11: state.a1.norm_sqr(),
            rho01: state.a1 * state.a0.conj(),
        }
    }

    pub fn rho10(&self) -> Complex64 {
        self.rho01.conj()
    }

    /// Entrywise max |ρ² − ρ|; zero for pure states.
    pub fn purity_defect(&self) -> f64 {
        // ρ as [[rho00, conj(rho01)], [rho01, rho11]].
        let m00 = Complex64::new(self.rho00, 0.0);
        let m11 = Complex64::new(self.rho11, 0.0);
        let m01 = self.rho01.conj();
        let m10 = self.rho01;
        let sq00 = m00 * m00 + m01 * m10;
        let sq01 = m00 * m01 + m01 * m11;
        let sq10 = m10 * m00 + m11 * m10;
        let sq11 = m10 * m01 + m11 * m11;
        [(sq00 - m00), (sq01 - m01), (sq10 - m10), (sq11 - m11)]
            .iter()
            .map(|d| d.norm())
            .fold(0.0, f64::max)
    }
}

/// Free evolution of a pure state for a delay `t ≥ 0` ps.
///
/// With the E₀ = 0 gauge only the excited amplitude picks up a phase:
/// a₁ ↦ a₁·exp(−iω̄t). The norm is preserved exactly.
pub fn evolve_pure_state(state: &PureState, emitter: &TwoLevelEmitter, t_ps: f64) -> PureState {
    let phase = Complex64::from_polar(1.0, -emitter.angular_frequency() * t_ps);
    PureState { a0: state.a0, a1: state.a1 * phase }
}

/// Dipole expectation ⟨μ̂⟩(t) = μ₁₀·2·Re[a₀*·a₁·exp(−iω̄t)].
///
/// Zero whenever either amplitude vanishes: the dipole only radiates from a
/// superposition.
pub fn dipole_expectation(state: &PureState, emitter: &TwoLevelEmitter, t_ps: f64) -> f64 {
    let rotating = state.a0.conj() * state.a1 * Complex64::from_polar(1.0, -emitter.angular_frequency() * t_ps);
    emitter.dipole() * 2.0 * rotating.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Gaussian,
    Delta,
}

/// Static disorder of the resonance energy across an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InhomogeneousDistribution {
    kind: DistributionKind,
    center_mev: f64,
    sigma_mev: f64,
}

impl InhomogeneousDistribution {
    pub fn gaussian(center_mev: f64, sigma_mev: f64) -> Result<Self, QuantumError> {
        if !(sigma_mev >= 0.0) {
            return Err(QuantumError::NegativeSigma(sigma_mev));
        }
        // sigma = 0 is delta-equivalent by construction.
        let kind = if sigma_mev == 0.0 { DistributionKind::Delta } else { DistributionKind::Gaussian };
        Ok(Self { kind, center_mev, sigma_mev })
    }

    pub fn delta(center_mev: f64) -> Self {
        Self { kind: DistributionKind::Delta, center_mev, sigma_mev: 0.0 }
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn center_mev(&self) -> f64 {
        self.center_mev
    }

    pub fn sigma_mev(&self) -> f64 {
        self.sigma_mev
    }
}

/// Draw `n` resonance energies (meV), deterministically for a given seed.
///
/// Gaussian deviates come from the Box–Muller transform over a seeded
/// ChaCha8 stream; the algorithm is fixed so sampled sequences are
/// reproducible byte for byte across runs and platforms.
pub fn sample_frequencies(dist: &InhomogeneousDistribution, n: usize, seed: u64) -> Vec<f64> {
    match dist.kind {
        DistributionKind::Delta => vec![dist.center_mev; n],
        DistributionKind::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let (z0, z1) = box_muller_pair(&mut rng);
                out.push(dist.center_mev + dist.sigma_mev * z0);
                if out.len() < n {
                    out.push(dist.center_mev + dist.sigma_mev * z1);
                }
            }
            out
        }
    }
}

/// One Box–Muller pair of independent standard normal deviates.
pub(crate) fn box_muller_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    // u1 ∈ (0, 1] keeps the logarithm finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}
