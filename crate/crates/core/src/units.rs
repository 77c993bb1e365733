//! Unit conventions used across the crate.
//!
//! Energies are in meV, times in ps, rates in ps⁻¹. Angular frequencies are
//! rad/ps and convert to energy by multiplication with [`HBAR_MEV_PS`]. All
//! conversions live here so the constants are stated exactly once.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.08617;

/// Angular frequency (rad/ps) of a transition energy in meV.
pub fn energy_to_angular_frequency(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

/// Transition energy (meV) of an angular frequency in rad/ps.
pub fn angular_frequency_to_energy(omega_rad_ps: f64) -> f64 {
    omega_rad_ps * HBAR_MEV_PS
}

/// Ordinary frequency in MHz of a rate given in ps⁻¹.
///
/// The convention is ordinary (not angular) frequency, ν = γ/(2π), so
/// 1 ps⁻¹ ↦ 10⁶/(2π) MHz. This is the scale used when quoting dephasing
/// rates in MHz.
pub fn rate_ps_inv_to_mhz(rate_ps_inv: f64) -> f64 {
    rate_ps_inv * 1.0e6 / std::f64::consts::TAU
}

/// Inverse of [`rate_ps_inv_to_mhz`].
pub fn mhz_to_rate_ps_inv(freq_mhz: f64) -> f64 {
    freq_mhz * std::f64::consts::TAU / 1.0e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mhz_conversion_round_trips() {
        let gamma = 0.137;
        assert_relative_eq!(mhz_to_rate_ps_inv(rate_ps_inv_to_mhz(gamma)), gamma, max_relative = 1e-14);
    }

    #[test]
    fn one_ps_inv_in_mhz() {
        // ν = γ/(2π) with γ = 1 ps⁻¹ = 10¹² s⁻¹.
        assert_relative_eq!(rate_ps_inv_to_mhz(1.0), 1.0e6 / std::f64::consts::TAU, max_relative = 1e-15);
    }

    #[test]
    fn energy_frequency_round_trip() {
        assert_relative_eq!(
            angular_frequency_to_energy(energy_to_angular_frequency(1945.0)),
            1945.0,
            max_relative = 1e-14
        );
    }
}
