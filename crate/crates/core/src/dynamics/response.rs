//! Third-order response functions in the impulsive (delta-pulse) limit.
//!
//! Responses are stored in a rotating frame at a configurable reference
//! energy so the FFT grids stay small; absolute energy axes are restored at
//! spectrum assembly. Signal values scale as μ⁴, the four field interactions
//! of four-wave mixing.

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;

use super::DynamicsError;
use crate::bath::LineshapeTable;
use crate::grid::TimeGrid;
use crate::quantum::{InhomogeneousDistribution, TwoLevelEmitter};
use crate::units::{energy_to_angular_frequency, HBAR_MEV_PS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathway {
    RephasingSingleQuantum,
    ZeroQuantum,
    DoubleQuantum,
}

/// A pulse delay that is either held fixed or scanned over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayAxis {
    Fixed(f64),
    Grid(TimeGrid),
}

impl DelayAxis {
    pub fn count(&self) -> usize {
        match self {
            DelayAxis::Fixed(_) => 1,
            DelayAxis::Grid(g) => g.count(),
        }
    }

    pub fn value_at(&self, i: usize) -> f64 {
        match self {
            DelayAxis::Fixed(t) => *t,
            DelayAxis::Grid(g) => g.at(i),
        }
    }

    pub fn as_grid(&self) -> Option<&TimeGrid> {
        match self {
            DelayAxis::Fixed(_) => None,
            DelayAxis::Grid(g) => Some(g),
        }
    }
}

/// Complex third-order signal S(τ, T, t) on its delay axes, tagged with the
/// phase-matching pathway it represents.
#[derive(Debug, Clone)]
pub struct Response3 {
    pub tau: DelayAxis,
    pub waiting: DelayAxis,
    pub t_grid: TimeGrid,
    /// Indexed [i_tau, i_T, i_t].
    pub values: Array3<Complex64>,
    pub pathway: Pathway,
    pub reference_energy_mev: f64,
}

impl Response3 {
    pub fn require_pathway(&self, want: Pathway) -> Result<(), DynamicsError> {
        if self.pathway != want {
            return Err(DynamicsError::WrongPathway { got: self.pathway, want });
        }
        Ok(())
    }
}

/// Waiting-time spectral diffusion: the frequency–frequency correlation of
/// the static disorder decays as r(T) = exp(−κT).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDiffusion {
    pub kappa_ps_inv: f64,
}

impl SpectralDiffusion {
    pub fn new(kappa_ps_inv: f64) -> Result<Self, DynamicsError> {
        if !(kappa_ps_inv >= 0.0) {
            return Err(DynamicsError::NegativeDiffusionRate(kappa_ps_inv));
        }
        Ok(Self { kappa_ps_inv })
    }

    pub fn correlation(&self, waiting_ps: f64) -> f64 {
        (-self.kappa_ps_inv * waiting_ps).exp()
    }
}

/// Rephasing (photon echo) response of an inhomogeneously broadened
/// ensemble:
///
/// ```text
/// S(τ, T, t) = μ⁴ · e^{+iω̄τ − iω̄t} · e^{−g(τ) − g(t)} · F(τ, T, t)
/// F = exp(−σ_ω²(t² + τ² − 2·r(T)·t·τ)/2)
/// ```
///
/// with σ_ω = σ/ħ and r(T) the waiting-time frequency correlation (1
/// without diffusion, exp(−κT) with it). The Gaussian ensemble average is
/// evaluated in closed form, no member sampling. ω̄ is taken from the
/// ensemble center, relative to the rotating-frame reference; the emitter
/// supplies dipole and lineshape inputs.
#[allow(clippy::too_many_arguments)]
pub fn photon_echo_response(
    ensemble: &InhomogeneousDistribution,
    emitter: &TwoLevelEmitter,
    lineshape: &LineshapeTable,
    tau_grid: &TimeGrid,
    waiting_ps: f64,
    t_grid: &TimeGrid,
    diffusion: Option<SpectralDiffusion>,
    reference_energy_mev: f64,
) -> Result<Response3, DynamicsError> {
    if waiting_ps < 0.0 {
        return Err(DynamicsError::NegativeDelay(waiting_ps));
    }
    let omega_rot = energy_to_angular_frequency(ensemble.center_mev() - reference_energy_mev);
    let sigma_omega = ensemble.sigma_mev() / HBAR_MEV_PS;
    let mu4 = emitter.dipole().powi(4);
    let r = diffusion.map(|d| d.correlation(waiting_ps)).unwrap_or(1.0);

    let taus = tau_grid.times();
    let ts = t_grid.times();
    let mut tau_factors = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let g = lineshape.g_at(tau)?;
        tau_factors.push(Complex64::from_polar(1.0, omega_rot * tau) * (-g).exp());
    }
    let mut t_factors = Vec::with_capacity(ts.len());
    for &t in &ts {
        let g = lineshape.g_at(t)?;
        t_factors.push(Complex64::from_polar(1.0, -omega_rot * t) * (-g).exp());
    }

    let mut values = Array3::zeros((taus.len(), 1, ts.len()));
    values
        .outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(i_tau, mut plane)| {
            let tau = taus[i_tau];
            let a = tau_factors[i_tau];
            for (i_t, &t) in ts.iter().enumerate() {
                let inhomogeneous =
                    (-0.5 * sigma_omega * sigma_omega * (t * t + tau * tau - 2.0 * r * t * tau)).exp();
                plane[[0, i_t]] = a * t_factors[i_t] * (mu4 * inhomogeneous);
            }
        });

    Ok(Response3 {
        tau: DelayAxis::Grid(*tau_grid),
        waiting: DelayAxis::Fixed(waiting_ps),
        t_grid: *t_grid,
        values,
        pathway: Pathway::RephasingSingleQuantum,
        reference_energy_mev,
    })
}

/// A discrete vibrational mode coupled to the optical transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibronicMode {
    pub mode_energy_mev: f64,
    pub huang_rhys: f64,
    pub damping_ps_inv: f64,
    /// Weight of the +ω_T sideband in [0, 1]; 0.5 produces both sidebands
    /// symmetrically. Left configurable because the vibronic detail that
    /// sets the asymmetry varies between systems.
    pub plus_weight: f64,
}

impl VibronicMode {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.mode_energy_mev > 0.0) {
            return Err(DynamicsError::InvalidMode(format!(
                "mode energy must be positive, got {} meV",
                self.mode_energy_mev
            )));
        }
        if !(self.huang_rhys >= 0.0) {
            return Err(DynamicsError::InvalidMode(format!(
                "Huang–Rhys factor must be nonnegative, got {}",
                self.huang_rhys
            )));
        }
        if !(self.damping_ps_inv >= 0.0) {
            return Err(DynamicsError::InvalidMode(format!(
                "mode damping must be nonnegative, got {} ps⁻¹",
                self.damping_ps_inv
            )));
        }
        if !(0.0..=1.0).contains(&self.plus_weight) {
            return Err(DynamicsError::InvalidMode(format!(
                "sideband weight must lie in [0, 1], got {}",
                self.plus_weight
            )));
        }
        Ok(())
    }
}

/// Zero-quantum response at a fixed first delay τ: the signal during the
/// waiting time is a population term plus vibrational-coherence terms
/// beating at ±ω_v,
///
/// ```text
/// S(T, t) = μ⁴ · e^{+iω̄τ − g(τ)} · e^{−iω̄t − g(t)}
///           · [1 + A(τ)·(p₊·e^{−(iω_v+κ_v)T} + p₋·e^{(+iω_v−κ_v)T})]
/// A(τ)    = S_HR · (1 − e^{−(iω_v+κ_v)τ})
/// ```
///
/// The two Liouville pathways that terminate in the phonon coherence enter
/// with opposite sign and a relative phase accumulated at ω_v during τ, so
/// A(0) = 0: the sideband needs finite evolution before the waiting time and
/// saturates once the launched coherence has dephased (τ ≫ 1/κ_v).
pub fn zero_quantum_response(
    emitter: &TwoLevelEmitter,
    lineshape: &LineshapeTable,
    mode: Option<&VibronicMode>,
    tau_ps: f64,
    waiting_grid: &TimeGrid,
    t_grid: &TimeGrid,
    reference_energy_mev: f64,
) -> Result<Response3, DynamicsError> {
    if tau_ps < 0.0 {
        return Err(DynamicsError::NegativeDelay(tau_ps));
    }
    if let Some(m) = mode {
        m.validate()?;
    }
    let omega_rot = energy_to_angular_frequency(emitter.mean_energy_mev() - reference_energy_mev);
    let mu4 = emitter.dipole().powi(4);
    let g_tau = lineshape.g_at(tau_ps)?;
    let prefactor = Complex64::from_polar(mu4, omega_rot * tau_ps) * (-g_tau).exp();

    let mut t_factors = Vec::with_capacity(t_grid.count());
    for &t in &t_grid.times() {
        let g = lineshape.g_at(t)?;
        t_factors.push(Complex64::from_polar(1.0, -omega_rot * t) * (-g).exp());
    }

    let waiting_factor: Vec<Complex64> = waiting_grid
        .times()
        .iter()
        .map(|&big_t| match mode {
            None => Complex64::new(1.0, 0.0),
            Some(m) => {
                let omega_v = energy_to_angular_frequency(m.mode_energy_mev);
                let kappa = m.damping_ps_inv;
                let launched = Complex64::new(1.0, 0.0)
                    - (Complex64::new(-kappa, -omega_v) * tau_ps).exp();
                let amplitude = m.huang_rhys * launched;
                let beat_plus = (Complex64::new(-kappa, -omega_v) * big_t).exp();
                let beat_minus = (Complex64::new(-kappa, omega_v) * big_t).exp();
                Complex64::new(1.0, 0.0)
                    + amplitude * (m.plus_weight * beat_plus + (1.0 - m.plus_weight) * beat_minus)
            }
        })
        .collect();

    let mut values = Array3::zeros((1, waiting_grid.count(), t_grid.count()));
    for (i_w, wf) in waiting_factor.iter().enumerate() {
        for (i_t, tf) in t_factors.iter().enumerate() {
            values[[0, i_w, i_t]] = prefactor * wf * tf;
        }
    }

    Ok(Response3 {
        tau: DelayAxis::Fixed(tau_ps),
        waiting: DelayAxis::Grid(*waiting_grid),
        t_grid: *t_grid,
        values,
        pathway: Pathway::ZeroQuantum,
        reference_energy_mev,
    })
}

/// Time-integrated photon echo amplitude per first delay τ:
/// A(τ) = ∫ |S(τ, T₀, t)| dt by trapezoid over the emission grid.
pub fn echo_decay_curve(resp: &Response3) -> Result<Vec<(f64, f64)>, DynamicsError> {
    resp.require_pathway(Pathway::RephasingSingleQuantum)?;
    let tau_grid = resp.tau.as_grid().ok_or(DynamicsError::ExpectedGridAxis("tau"))?;
    let h = resp.t_grid.step();
    let n_t = resp.t_grid.count();
    let mut out = Vec::with_capacity(tau_grid.count());
    for i_tau in 0..tau_grid.count() {
        let mut sum = 0.0;
        for i_t in 0..n_t {
            let w = if i_t == 0 || i_t == n_t - 1 { 0.5 } else { 1.0 };
            sum += w * resp.values[[i_tau, 0, i_t]].norm();
        }
        out.push((tau_grid.at(i_tau), sum * h));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{lineshape_function, NoiseModel};
    use approx::assert_relative_eq;

    fn white_table(gamma: f64, grid: &TimeGrid) -> LineshapeTable {
        lineshape_function(&NoiseModel::White { rate_ps_inv: gamma }, grid).unwrap()
    }

    fn emitter(gamma: f64) -> TwoLevelEmitter {
        TwoLevelEmitter::new(1945.0, 1.0, gamma).unwrap()
    }

    #[test]
    fn homogeneous_markovian_response_is_separable() {
        let gamma = 0.4;
        let grid = TimeGrid::from_zero(0.25, 32).unwrap();
        let table = white_table(gamma, &grid);
        let ensemble = InhomogeneousDistribution::delta(1945.0);
        let resp = photon_echo_response(&ensemble, &emitter(gamma), &table, &grid, 0.0, &grid, None, 1945.0)
            .unwrap();
        for (i_tau, &tau) in grid.times().iter().enumerate() {
            for (i_t, &t) in grid.times().iter().enumerate() {
                let expected = (-gamma * (tau + t)).exp();
                assert_relative_eq!(resp.values[[i_tau, 0, i_t]].norm(), expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn echo_forms_at_t_equal_tau() {
        // σ = 10ħγ: strong inhomogeneity localizes the echo on the ridge.
        let gamma = 0.5;
        let sigma = 10.0 * HBAR_MEV_PS * gamma;
        let grid = TimeGrid::from_zero(0.05, 128).unwrap();
        let table = white_table(gamma, &grid);
        let ensemble = InhomogeneousDistribution::gaussian(1945.0, sigma).unwrap();
        let resp = photon_echo_response(&ensemble, &emitter(gamma), &table, &grid, 0.0, &grid, None, 1945.0)
            .unwrap();
        for i_tau in (grid.count() / 4)..(3 * grid.count() / 4) {
            let row = resp.values.index_axis(ndarray::Axis(0), i_tau);
            let (argmax, _) = row
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
            assert!(
                (argmax as isize - i_tau as isize).unsigned_abs() <= 1,
                "echo ridge off t=tau at row {i_tau}: argmax {argmax}"
            );
        }
    }

    #[test]
    fn zero_diffusion_rate_is_waiting_time_independent() {
        let gamma = 0.2;
        let grid = TimeGrid::from_zero(0.1, 48).unwrap();
        let table = white_table(gamma, &grid);
        let ensemble = InhomogeneousDistribution::gaussian(1945.0, 1.0).unwrap();
        let diffusion = Some(SpectralDiffusion::new(0.0).unwrap());
        let early = photon_echo_response(&ensemble, &emitter(gamma), &table, &grid, 0.0, &grid, diffusion, 1945.0)
            .unwrap();
        let late = photon_echo_response(&ensemble, &emitter(gamma), &table, &grid, 7.0, &grid, diffusion, 1945.0)
            .unwrap();
        assert_eq!(early.values, late.values);
    }

    #[test]
    fn response_scales_as_dipole_to_the_fourth() {
        let gamma = 0.3;
        let grid = TimeGrid::from_zero(0.2, 24).unwrap();
        let table = white_table(gamma, &grid);
        let ensemble = InhomogeneousDistribution::gaussian(1945.0, 0.7).unwrap();
        let base = TwoLevelEmitter::new(1945.0, 1.0, gamma).unwrap();
        let scaled = TwoLevelEmitter::new(1945.0, 3.0, gamma).unwrap();
        let r1 = photon_echo_response(&ensemble, &base, &table, &grid, 0.0, &grid, None, 1945.0).unwrap();
        let r2 = photon_echo_response(&ensemble, &scaled, &table, &grid, 0.0, &grid, None, 1945.0).unwrap();
        for (a, b) in r1.values.iter().zip(r2.values.iter()) {
            assert_relative_eq!(b.re, a.re * 81.0, max_relative = 1e-12);
            assert_relative_eq!(b.im, a.im * 81.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn echo_decay_constant_without_dephasing_or_disorder() {
        let grid = TimeGrid::from_zero(0.2, 32).unwrap();
        let table = white_table(0.0, &grid);
        let ensemble = InhomogeneousDistribution::delta(1945.0);
        let resp = photon_echo_response(&ensemble, &emitter(0.0), &table, &grid, 0.0, &grid, None, 1945.0)
            .unwrap();
        let decay = echo_decay_curve(&resp).unwrap();
        let first = decay[0].1;
        for (_, amp) in &decay {
            assert_relative_eq!(*amp, first, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_quantum_sideband_absent_at_zero_tau() {
        let grid_t = TimeGrid::from_zero(0.05, 64).unwrap();
        let grid_w = TimeGrid::from_zero(0.02, 64).unwrap();
        let table = white_table(0.2, &grid_t);
        let mode =
            VibronicMode { mode_energy_mev: 26.0, huang_rhys: 0.3, damping_ps_inv: 1.0, plus_weight: 0.5 };
        let resp = zero_quantum_response(&emitter(0.2), &table, Some(&mode), 0.0, &grid_w, &grid_t, 1945.0)
            .unwrap();
        // A(0) = 0: no waiting-time beat, every T plane identical.
        for i_w in 1..grid_w.count() {
            for i_t in 0..grid_t.count() {
                assert!((resp.values[[0, i_w, i_t]] - resp.values[[0, 0, i_t]]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_quantum_beats_at_finite_tau() {
        let grid_t = TimeGrid::from_zero(0.05, 32).unwrap();
        let grid_w = TimeGrid::from_zero(0.02, 64).unwrap();
        let table = white_table(0.2, &grid_t);
        let mode =
            VibronicMode { mode_energy_mev: 26.0, huang_rhys: 0.3, damping_ps_inv: 1.0, plus_weight: 0.5 };
        let resp = zero_quantum_response(&emitter(0.2), &table, Some(&mode), 3.0, &grid_w, &grid_t, 1945.0)
            .unwrap();
        let along_waiting: Vec<f64> = (0..grid_w.count()).map(|i| resp.values[[0, i, 0]].norm()).collect();
        let spread = along_waiting.iter().cloned().fold(f64::MIN, f64::max)
            - along_waiting.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 0.05 * along_waiting[0], "expected visible beating, spread {spread}");
    }

    #[test]
    fn wrong_pathway_is_rejected() {
        let grid_t = TimeGrid::from_zero(0.05, 16).unwrap();
        let grid_w = TimeGrid::from_zero(0.02, 16).unwrap();
        let table = white_table(0.2, &grid_t);
        let resp =
            zero_quantum_response(&emitter(0.2), &table, None, 1.0, &grid_w, &grid_t, 1945.0).unwrap();
        assert!(matches!(
            echo_decay_curve(&resp),
            Err(DynamicsError::WrongPathway { got: Pathway::ZeroQuantum, .. })
        ));
    }
}
