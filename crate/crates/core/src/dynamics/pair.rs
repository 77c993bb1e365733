//! Double-quantum pathways of an interacting emitter pair.
//!
//! The pair spans four levels: the ground state, two singly excited states
//! that mix under the dipole–dipole coupling J_dd, and one doubly excited
//! state at E_a + E_b + Δ_b. The first two pulses prepare the two-quantum
//! coherence that oscillates at (E_a + E_b + Δ_b)/ħ during the waiting time;
//! the third pulse converts it into one of two single-quantum emission
//! pathways that enter with opposite signs. For Δ_b = 0 and J_dd = 0 the two
//! pathways are identical term by term and the signal cancels algebraically,
//! for every choice of per-transition dephasing.

use ndarray::Array3;
use num_complex::Complex64;

use super::response::{DelayAxis, Pathway, Response3};
use super::DynamicsError;
use crate::grid::TimeGrid;
use crate::quantum::TwoLevelEmitter;
use crate::units::energy_to_angular_frequency;

/// Two coupled two-level emitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterPair {
    pub emitter_a: TwoLevelEmitter,
    pub emitter_b: TwoLevelEmitter,
    /// Dipole–dipole exchange coupling J_dd (meV), mixing the singly
    /// excited states.
    pub coupling_mev: f64,
    /// Energy shift Δ_b (meV) of the doubly excited state.
    pub biexciton_shift_mev: f64,
}

impl EmitterPair {
    /// Pair with the biexciton shift derived from the coupling, Δ_b = J_dd.
    pub fn from_coupling(emitter_a: TwoLevelEmitter, emitter_b: TwoLevelEmitter, coupling_mev: f64) -> Self {
        Self { emitter_a, emitter_b, coupling_mev, biexciton_shift_mev: coupling_mev }
    }

    /// Pair with an explicitly set biexciton shift.
    pub fn with_biexciton_shift(
        emitter_a: TwoLevelEmitter,
        emitter_b: TwoLevelEmitter,
        coupling_mev: f64,
        biexciton_shift_mev: f64,
    ) -> Self {
        Self { emitter_a, emitter_b, coupling_mev, biexciton_shift_mev }
    }
}

/// Dephasing rates per optical transition of the pair. Each emitter's
/// transition carries one γ regardless of the state of its partner; the
/// two-quantum coherence defaults to γ_a + γ_b unless overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDephasing {
    pub gamma_a_ps_inv: f64,
    pub gamma_b_ps_inv: f64,
    pub gamma_two_quantum_ps_inv: Option<f64>,
}

impl PairDephasing {
    pub fn new(gamma_a_ps_inv: f64, gamma_b_ps_inv: f64) -> Self {
        Self { gamma_a_ps_inv, gamma_b_ps_inv, gamma_two_quantum_ps_inv: None }
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        for g in [self.gamma_a_ps_inv, self.gamma_b_ps_inv, self.gamma_two_quantum_ps_inv.unwrap_or(0.0)] {
            if !(g >= 0.0) {
                return Err(DynamicsError::NegativeDephasingRate(g));
            }
        }
        Ok(())
    }
}

struct PairEigensystem {
    /// Single-exciton eigenenergies (meV).
    e1: f64,
    e2: f64,
    /// Doubly excited state energy (meV).
    ef: f64,
    /// Ground→eigenstate and eigenstate→doubly-excited dipoles.
    mu_g: [f64; 2],
    mu_f: [f64; 2],
    /// Dephasing of g→k, k→f and the two-quantum coherence (ps⁻¹).
    gamma_g: [f64; 2],
    gamma_f: [f64; 2],
    gamma_fg: f64,
}

fn diagonalize(pair: &EmitterPair, dephasing: &PairDephasing) -> PairEigensystem {
    let ea = pair.emitter_a.mean_energy_mev();
    let eb = pair.emitter_b.mean_energy_mev();
    let (mu_a, mu_b) = (pair.emitter_a.dipole(), pair.emitter_b.dipole());
    let (ga, gb) = (dephasing.gamma_a_ps_inv, dephasing.gamma_b_ps_inv);
    let j = pair.coupling_mev;

    // J = 0 keeps the site basis exactly so the uncoupled cancellation is
    // algebraic, not a numerical coincidence.
    let (e1, e2, c, s) = if j == 0.0 {
        (ea, eb, 1.0, 0.0)
    } else {
        let mean = 0.5 * (ea + eb);
        let half_det = 0.5 * (ea - eb);
        let r = (half_det * half_det + j * j).sqrt();
        let theta = 0.5 * (2.0 * j).atan2(ea - eb);
        (mean + r, mean - r, theta.cos(), theta.sin())
    };

    let c2 = c * c;
    let s2 = s * s;
    PairEigensystem {
        e1,
        e2,
        ef: ea + eb + pair.biexciton_shift_mev,
        mu_g: [c * mu_a + s * mu_b, -s * mu_a + c * mu_b],
        mu_f: [c * mu_b + s * mu_a, -s * mu_b + c * mu_a],
        gamma_g: [c2 * ga + s2 * gb, s2 * ga + c2 * gb],
        gamma_f: [c2 * gb + s2 * ga, s2 * gb + c2 * ga],
        gamma_fg: dephasing.gamma_two_quantum_ps_inv.unwrap_or(ga + gb),
    }
}

/// Double-quantum response S(τ, T, t) of the pair, summed over the two
/// single-exciton eigenstates on both the excitation and emission side.
pub fn double_quantum_response(
    pair: &EmitterPair,
    dephasing: &PairDephasing,
    tau: DelayAxis,
    waiting_grid: &TimeGrid,
    t_grid: &TimeGrid,
    reference_energy_mev: f64,
) -> Result<Response3, DynamicsError> {
    dephasing.validate()?;
    let sys = diagonalize(pair, dephasing);

    let omega = |energy_mev: f64| energy_to_angular_frequency(energy_mev);
    let w_ref = omega(reference_energy_mev);
    let w1 = [omega(sys.e1) - w_ref, omega(sys.e2) - w_ref];
    let wf = omega(sys.ef) - 2.0 * w_ref;

    let n_tau = tau.count();
    let n_w = waiting_grid.count();
    let n_t = t_grid.count();
    let ts = t_grid.times();
    let waits = waiting_grid.times();

    // Per-eigenstate emission factors: excited-state emission f→k minus
    // ground-state emission k→g.
    let mut emission = vec![vec![Complex64::new(0.0, 0.0); n_t]; 2];
    for k in 0..2 {
        for (i_t, &t) in ts.iter().enumerate() {
            let esa = (Complex64::new(-sys.gamma_f[k], -(wf - w1[k])) * t).exp();
            let gsb = (Complex64::new(-sys.gamma_g[k], -w1[k]) * t).exp();
            emission[k][i_t] = esa - gsb;
        }
    }

    let mut values = Array3::zeros((n_tau, n_w, n_t));
    for i_tau in 0..n_tau {
        let tau_ps = tau.value_at(i_tau);
        if tau_ps < 0.0 {
            return Err(DynamicsError::NegativeDelay(tau_ps));
        }
        for j in 0..2 {
            let excite = sys.mu_g[j] * sys.mu_f[j]
                * (Complex64::new(-sys.gamma_g[j], -w1[j]) * tau_ps).exp();
            for k in 0..2 {
                let amp = excite * (sys.mu_f[k] * sys.mu_g[k]);
                for (i_w, &big_t) in waits.iter().enumerate() {
                    let two_quantum = (Complex64::new(-sys.gamma_fg, -wf) * big_t).exp();
                    let pref = amp * two_quantum;
                    for i_t in 0..n_t {
                        values[[i_tau, i_w, i_t]] += pref * emission[k][i_t];
                    }
                }
            }
        }
    }

    Ok(Response3 {
        tau,
        waiting: DelayAxis::Grid(*waiting_grid),
        t_grid: *t_grid,
        values,
        pathway: Pathway::DoubleQuantum,
        reference_energy_mev,
    })
}
