//! Frequency quadrature for thermal bath correlation functions.
//!
//! The integral over ω is split into segments at the characteristic scales
//! of the spectral density (cutoffs, mode resonances, the thermal crossover
//! 2k_BT), each integrated by composite Simpson with node doubling until the
//! whole sampled C(t) vector is stable to the requested relative tolerance.
//! Composite densities integrate part by part, which keeps C exactly
//! additive across parts.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{BathError, SpectralDensity};
use crate::units::{HBAR_MEV_PS, KB_MEV_PER_K};

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    pub relative_tolerance: f64,
    pub max_nodes_per_segment: usize,
}

pub const DEFAULT_QUADRATURE: QuadratureSettings =
    QuadratureSettings { relative_tolerance: 1e-8, max_nodes_per_segment: 1 << 20 };

/// C(t) for a thermal Gaussian bath, sampled at `times` (ps).
pub(crate) fn thermal_correlation(
    density: &SpectralDensity,
    temperature_k: f64,
    times: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<Complex64>, BathError> {
    if let SpectralDensity::Composite(parts) = density {
        let mut total = vec![Complex64::new(0.0, 0.0); times.len()];
        for part in parts {
            let c = thermal_correlation(part, temperature_k, times, settings)?;
            for (acc, v) in total.iter_mut().zip(c) {
                *acc += v;
            }
        }
        return Ok(total);
    }

    let upper = upper_limit(density, temperature_k);
    let mut edges = breakpoints(density, temperature_k, upper);
    edges.insert(0, 0.0);
    edges.push(upper);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * upper);

    let t_max = times.iter().fold(0.0_f64, |m, t| m.max(t.abs()));

    // Coarse pass fixes the overall scale the segment tolerances refer to.
    let mut scale = 0.0_f64;
    for win in edges.windows(2) {
        let coarse = simpson_vector(density, temperature_k, win[0], win[1], 64, times);
        scale = scale.max(coarse.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }

    let mut total = vec![Complex64::new(0.0, 0.0); times.len()];
    for win in edges.windows(2) {
        let seg = integrate_segment(density, temperature_k, win[0], win[1], t_max, times, scale, settings)?;
        for (acc, v) in total.iter_mut().zip(seg) {
            *acc += v;
        }
    }
    Ok(total)
}

fn upper_limit(density: &SpectralDensity, temperature_k: f64) -> f64 {
    let scale = match density {
        SpectralDensity::Ohmic { cutoff_mev, .. } | SpectralDensity::SuperOhmicGaussian { cutoff_mev, .. } => {
            *cutoff_mev
        }
        SpectralDensity::DiscreteMode { mode_energy_mev, damping_ps_inv, .. } => {
            mode_energy_mev + 5.0 * HBAR_MEV_PS * damping_ps_inv
        }
        SpectralDensity::Composite(_) => unreachable!("composites integrate part by part"),
    };
    10.0 * scale.max(20.0 * KB_MEV_PER_K * temperature_k)
}

fn breakpoints(density: &SpectralDensity, temperature_k: f64, upper: f64) -> Vec<f64> {
    let mut pts = match density {
        SpectralDensity::Ohmic { cutoff_mev, .. } | SpectralDensity::SuperOhmicGaussian { cutoff_mev, .. } => {
            vec![cutoff_mev / 100.0, cutoff_mev / 10.0, *cutoff_mev, 3.0 * cutoff_mev]
        }
        SpectralDensity::DiscreteMode { mode_energy_mev, damping_ps_inv, .. } => {
            let g = HBAR_MEV_PS * damping_ps_inv;
            vec![
                mode_energy_mev - 5.0 * g,
                mode_energy_mev - g,
                *mode_energy_mev,
                mode_energy_mev + g,
                mode_energy_mev + 5.0 * g,
            ]
        }
        SpectralDensity::Composite(_) => unreachable!(),
    };
    pts.push(2.0 * KB_MEV_PER_K * temperature_k);
    pts.retain(|&p| p > 0.0 && p < upper);
    pts
}

#[allow(clippy::too_many_arguments)]
fn integrate_segment(
    density: &SpectralDensity,
    temperature_k: f64,
    a: f64,
    b: f64,
    t_max: f64,
    times: &[f64],
    scale: f64,
    settings: &QuadratureSettings,
) -> Result<Vec<Complex64>, BathError> {
    // Initial node count resolves the fastest cos(ωt/ħ) oscillation.
    let periods = (b - a) * t_max / (std::f64::consts::TAU * HBAR_MEV_PS);
    let wanted = (8.0 * periods).ceil() as usize;
    let cap = settings.max_nodes_per_segment.max(8) & !1;
    let mut n = wanted.clamp(32, cap) & !1;

    let mut prev = simpson_vector(density, temperature_k, a, b, n, times);
    let mut achieved = f64::INFINITY;
    while n * 2 <= cap {
        n *= 2;
        let cur = simpson_vector(density, temperature_k, a, b, n, times);
        let seg_max = cur.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let err = cur.iter().zip(&prev).map(|(c, p)| (c - p).norm()).fold(0.0, f64::max);
        let reference = scale.max(seg_max);
        let tol = settings.relative_tolerance * reference + f64::MIN_POSITIVE;
        if err <= tol {
            return Ok(cur);
        }
        achieved = err / reference.max(f64::MIN_POSITIVE);
        prev = cur;
    }
    Err(BathError::QuadratureNotConverged {
        achieved,
        target: settings.relative_tolerance,
        nodes: n,
    })
}

/// Composite Simpson over [a, b] with n intervals of the vector integrand
/// (1/π)·(ω/ħ)²·J(ω)·[coth(ω/2k_BT)cos(ωt/ħ) − i·sin(ωt/ħ)].
fn simpson_vector(
    density: &SpectralDensity,
    temperature_k: f64,
    a: f64,
    b: f64,
    n: usize,
    times: &[f64],
) -> Vec<Complex64> {
    let h = (b - a) / n as f64;
    let mut nu = Vec::with_capacity(n + 1);
    let mut w_re = Vec::with_capacity(n + 1); // Simpson coef × w × coth
    let mut w_im = Vec::with_capacity(n + 1); // Simpson coef × w
    for j in 0..=n {
        let x = a + j as f64 * h;
        let coef = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0
            / std::f64::consts::PI;
        if x <= 0.0 {
            // J(0) = 0 and ω² beats the coth divergence, so the limit is 0.
            nu.push(x);
            w_re.push(0.0);
            w_im.push(0.0);
            continue;
        }
        let w = (x / HBAR_MEV_PS).powi(2) * super::eval_unchecked(density, x);
        let coth = 1.0 / (x / (2.0 * KB_MEV_PER_K * temperature_k)).tanh();
        nu.push(x);
        w_re.push(coef * w * coth);
        w_im.push(coef * w);
    }

    times
        .par_iter()
        .map(|&t| {
            let mut re = 0.0;
            let mut im = 0.0;
            for j in 0..nu.len() {
                let arg = nu[j] * t / HBAR_MEV_PS;
                re += w_re[j] * arg.cos();
                im -= w_im[j] * arg.sin();
            }
            Complex64::new(re, im)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{correlation_function, NoiseModel};
    use crate::grid::TimeGrid;

    /// Brute-force oracle: plain trapezoid on a dense uniform grid with 10×
    /// the node budget the adaptive path typically settles at.
    fn brute_force(density: &SpectralDensity, temperature_k: f64, times: &[f64], nodes: usize) -> Vec<Complex64> {
        let upper = upper_limit(density, temperature_k);
        let h = upper / nodes as f64;
        times
            .iter()
            .map(|&t| {
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..=nodes {
                    let x = j as f64 * h;
                    let f = if x <= 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let w = (x / HBAR_MEV_PS).powi(2) * crate::bath::eval_unchecked(density, x);
                        let coth = 1.0 / (x / (2.0 * KB_MEV_PER_K * temperature_k)).tanh();
                        let arg = x * t / HBAR_MEV_PS;
                        Complex64::new(w * coth * arg.cos(), -w * arg.sin())
                    };
                    let weight = if j == 0 || j == nodes { 0.5 } else { 1.0 };
                    sum += f * weight;
                }
                sum * h / std::f64::consts::PI
            })
            .collect()
    }

    #[test]
    fn discrete_mode_oscillates_at_mode_frequency() {
        // LO phonon of CdSe: expected Re C period 2πħ/26 meV ≈ 0.159 ps.
        let density =
            SpectralDensity::DiscreteMode { mode_energy_mev: 26.0, huang_rhys: 0.1, damping_ps_inv: 1.0 };
        let temperature = 20.0;
        let grid = TimeGrid::from_zero(0.002, 400).unwrap();
        let nm = NoiseModel::FromSpectralDensity { density: density.clone(), temperature_k: temperature };
        let c = correlation_function(&nm, &grid).unwrap().sampled().unwrap().to_vec();

        // Cross-check a subsample against the independent brute-force
        // quadrature at ~10× the node count the adaptive path settles at.
        let probe_times: Vec<f64> = grid.times().iter().copied().step_by(25).collect();
        let oracle = brute_force(&density, temperature, &probe_times, 400_000);
        let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (i, want) in oracle.iter().enumerate() {
            let got = c[i * 25];
            assert!((got - want).norm() <= 1e-5 * scale, "quadrature disagrees with oracle");
        }

        // Period from the first two maxima of Re C.
        let times = grid.times();
        let mut maxima = Vec::new();
        for k in 1..c.len() - 1 {
            if c[k].re > c[k - 1].re && c[k].re > c[k + 1].re {
                maxima.push(times[k]);
            }
        }
        assert!(maxima.len() >= 2, "expected oscillation, found {maxima:?}");
        let period = maxima[1] - maxima[0];
        let expected = std::f64::consts::TAU * HBAR_MEV_PS / 26.0;
        assert!((period - expected).abs() <= 2.0 * grid.step(), "period {period} vs {expected}");
    }

    #[test]
    fn ohmic_matches_brute_force() {
        let density = SpectralDensity::Ohmic { coupling: 0.3, cutoff_mev: 1.5 };
        let grid = TimeGrid::from_zero(0.05, 40).unwrap();
        let nm = NoiseModel::FromSpectralDensity { density: density.clone(), temperature_k: 12.0 };
        let c = correlation_function(&nm, &grid).unwrap().sampled().unwrap().to_vec();
        let oracle = brute_force(&density, 12.0, &grid.times(), 200_000);
        let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (got, want) in c.iter().zip(&oracle) {
            assert!((got - want).norm() <= 1e-6 * scale);
        }
    }
}
