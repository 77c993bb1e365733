//! Reversal of the simulation: slice extraction, lineshape and
//! temperature-activation fits, spectral-diffusion slopes, sideband
//! dynamics and a non-Markovianity deviation metric.
//!
//! Slice coordinates are arc length along the ±45° cut. A cross-diagonal
//! arc-length half-width w maps to a per-axis detuning w/√2, so the
//! dephasing rate returned by the lineshape fit is γ = w/(√2·ħ); that
//! factor is what makes the end-to-end recovery of a configured γ close.

mod lm;

use thiserror::Error;

use crate::spectra::{SpectraError, Spectrum2D};
use crate::spectra as mdcs_axis;
use crate::units::{HBAR_MEV_PS, KB_MEV_PER_K};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("slice anchor {anchor_mev} meV outside the spectrum axes")]
    AnchorOutsideAxes { anchor_mev: f64 },
    #[error("slice has {got} usable points, need at least {need}")]
    SliceTooShort { got: usize, need: usize },
    #[error("fit did not converge within {iterations} iterations")]
    FitDidNotConverge { iterations: usize },
    #[error("need at least {need} data points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("decay amplitudes must be positive, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("early fraction must lie strictly between 0 and 1, got {0}")]
    InvalidEarlyFraction(f64),
    #[error("integration box extends outside the spectrum axes")]
    BoxOutsideAxes,
    #[error("input data contain non-finite values")]
    NonFiniteData,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceDirection {
    Diagonal,
    CrossDiagonal,
}

/// Magnitude profile along a ±45° cut through a 2D spectrum.
#[derive(Debug, Clone)]
pub struct SlicePro {
    /// Arc length from the anchor, meV.
    pub coordinate_mev: Vec<f64>,
    pub values: Vec<f64>,
    pub anchor: (f64, f64),
    pub direction: SliceDirection,
}

/// Cut |values| along the diagonal or cross-diagonal through the anchor
/// point (anchor, anchor), by bilinear interpolation. Points falling
/// outside the axes are dropped.
pub fn extract_slice(
    spec: &Spectrum2D,
    anchor_energy_mev: f64,
    direction: SliceDirection,
    half_width_mev: f64,
) -> Result<SlicePro, AnalysisError> {
    if spec.magnitude_at(anchor_energy_mev, anchor_energy_mev).is_none() {
        return Err(AnalysisError::AnchorOutsideAxes { anchor_mev: anchor_energy_mev });
    }
    let step = spec.x_step().min(spec.y_step()) * std::f64::consts::FRAC_1_SQRT_2;
    let n_side = (half_width_mev / step).floor() as isize;
    let (dx, dy) = match direction {
        SliceDirection::Diagonal => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        SliceDirection::CrossDiagonal => (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    };
    let mut coordinate = Vec::new();
    let mut values = Vec::new();
    for k in -n_side..=n_side {
        let s = k as f64 * step;
        let x = anchor_energy_mev + s * dx;
        let y = anchor_energy_mev + s * dy;
        if let Some(v) = spec.magnitude_at(x, y) {
            coordinate.push(s);
            values.push(v);
        }
    }
    Ok(SlicePro {
        coordinate_mev: coordinate,
        values,
        anchor: (anchor_energy_mev, anchor_energy_mev),
        direction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineshapeModel {
    Lorentzian,
    /// Square root of a Lorentzian: the cross-diagonal magnitude profile in
    /// the strong-inhomogeneity limit, and the default for such spectra.
    SqrtLorentzian,
}

#[derive(Debug, Clone)]
pub struct LinewidthFit {
    pub gamma_ps_inv: f64,
    pub gamma_uncertainty_ps_inv: f64,
    pub center_mev: f64,
    pub amplitude: f64,
    pub baseline: f64,
    pub residual_norm: f64,
    /// Set when the fitted width is within 2 sampling steps of the slice
    /// resolution and should not be trusted.
    pub width_at_resolution_limit: bool,
}

/// Nonlinear least squares of (amplitude, center, half-width, baseline) on a
/// slice; returns γ = HWHM/ħ with the cross-diagonal arc length projected
/// onto the frequency axes (factor 1/√2).
pub fn fit_homogeneous_linewidth(
    slice: &SlicePro,
    model: LineshapeModel,
) -> Result<LinewidthFit, AnalysisError> {
    let n = slice.values.len();
    if n < 10 {
        return Err(AnalysisError::SliceTooShort { got: n, need: 10 });
    }
    if slice.values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFiniteData);
    }
    let xs = &slice.coordinate_mev;
    let ys = &slice.values;

    let baseline0 = ys.iter().cloned().fold(f64::MAX, f64::min);
    let (imax, peak) = ys.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| {
        if v > acc.1 {
            (i, v)
        } else {
            acc
        }
    });
    let amp0 = (peak - baseline0).max(1e-300);
    let center0 = xs[imax];
    let half_level = baseline0 + 0.5 * amp0;
    let mut w0 = (xs[n - 1] - xs[0]) / 8.0;
    for i in imax..n {
        if ys[i] < half_level {
            w0 = (xs[i] - center0).max(xs[1] - xs[0]);
            break;
        }
    }

    let profile = move |p: &[f64], x: f64| -> f64 {
        let (a, c, w, b) = (p[0], p[1], p[2], p[3]);
        let d2 = (x - c) * (x - c) + w * w;
        match model {
            LineshapeModel::Lorentzian => b + a * w * w / d2,
            LineshapeModel::SqrtLorentzian => b + a * w.abs() / d2.sqrt(),
        }
    };
    let xs_fit = xs.clone();
    let ys_fit = ys.clone();
    let residuals = move |p: &[f64], out: &mut [f64]| {
        for (i, (&x, &y)) in xs_fit.iter().zip(&ys_fit).enumerate() {
            out[i] = profile(p, x) - y;
        }
    };
    let xs_jac = xs.clone();
    let jacobian = move |p: &[f64], out: &mut [f64]| {
        let (a, c, w) = (p[0], p[1], p[2]);
        for (i, &x) in xs_jac.iter().enumerate() {
            let dx = x - c;
            let d2 = dx * dx + w * w;
            match model {
                LineshapeModel::Lorentzian => {
                    out[i * 4] = w * w / d2;
                    out[i * 4 + 1] = a * w * w * 2.0 * dx / (d2 * d2);
                    out[i * 4 + 2] = a * 2.0 * w * dx * dx / (d2 * d2);
                }
                LineshapeModel::SqrtLorentzian => {
                    let d32 = d2 * d2.sqrt();
                    out[i * 4] = w.abs() / d2.sqrt();
                    out[i * 4 + 1] = a * w.abs() * dx / d32;
                    out[i * 4 + 2] = a * w.signum() * dx * dx / d32;
                }
            }
            out[i * 4 + 3] = 1.0;
        }
    };

    let fit = lm::minimize(&[amp0, center0, w0, baseline0], n, &residuals, Some(&jacobian));
    if !fit.converged {
        return Err(AnalysisError::FitDidNotConverge { iterations: fit.iterations });
    }
    let w = fit.params[2].abs();
    let sigma_w = fit.covariance[2][2].abs().sqrt();
    // Arc length → per-axis detuning.
    let projection = std::f64::consts::FRAC_1_SQRT_2;
    let sampling = xs[1] - xs[0];
    Ok(LinewidthFit {
        gamma_ps_inv: w * projection / HBAR_MEV_PS,
        gamma_uncertainty_ps_inv: sigma_w * projection / HBAR_MEV_PS,
        center_mev: fit.params[1],
        amplitude: fit.params[0],
        baseline: fit.params[3],
        residual_norm: fit.residual_norm,
        width_at_resolution_limit: w < 2.0 * sampling,
    })
}

/// Boltzmann-activation fit of dephasing vs. sample temperature.
#[derive(Debug, Clone)]
pub struct ActivationFit {
    pub gamma0_ps_inv: f64,
    pub gamma_star_ps_inv: f64,
    pub e_ph_mev: f64,
    pub covariance: [[f64; 3]; 3],
    pub residual_norm: f64,
    /// Set when the data show no temperature dependence and the γ* → 0
    /// branch was returned.
    pub degenerate: bool,
}

/// γ(T_s) evaluated from activation parameters:
/// γ₀ + γ*/(exp(E_ph/k_B·T_s) − 1).
pub fn activation_model(gamma0: f64, gamma_star: f64, e_ph_mev: f64, temperature_k: f64) -> f64 {
    gamma0 + gamma_star / ((e_ph_mev / (KB_MEV_PER_K * temperature_k)).exp() - 1.0)
}

/// Least-squares activation fit with 8 multistarts over a log-spaced grid
/// of phonon energies (the γ*↔E_ph valley is shallow at sparse
/// temperatures; multistarts make the outcome reproducible).
pub fn fit_temperature_activation(points: &[(f64, f64)]) -> Result<ActivationFit, AnalysisError> {
    let mut temps: Vec<f64> = points.iter().map(|p| p.0).collect();
    temps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    temps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if temps.len() < 4 {
        return Err(AnalysisError::TooFewPoints { got: temps.len(), need: 4 });
    }

    let gammas: Vec<f64> = points.iter().map(|p| p.1).collect();
    let g_min = gammas.iter().cloned().fold(f64::MAX, f64::min);
    let g_max = gammas.iter().cloned().fold(f64::MIN, f64::max);
    let scale = g_max.abs().max(1e-300);
    if (g_max - g_min) <= 1e-9 * scale {
        let mean = gammas.iter().sum::<f64>() / gammas.len() as f64;
        let residual_norm =
            gammas.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>().sqrt();
        return Ok(ActivationFit {
            gamma0_ps_inv: mean,
            gamma_star_ps_inv: 0.0,
            e_ph_mev: 0.0,
            covariance: [[0.0; 3]; 3],
            residual_norm,
            degenerate: true,
        });
    }

    let t_min = temps[0];
    let t_max = *temps.last().unwrap();
    let pts = points.to_vec();
    let residuals = move |p: &[f64], out: &mut [f64]| {
        for (i, &(t, g)) in pts.iter().enumerate() {
            out[i] = activation_model(p[0], p[1], p[2].abs().max(1e-12), t) - g;
        }
    };
    let pts_j = points.to_vec();
    let jacobian = move |p: &[f64], out: &mut [f64]| {
        let e = p[2].abs().max(1e-12);
        for (i, &(t, _)) in pts_j.iter().enumerate() {
            let u = e / (KB_MEV_PER_K * t);
            let eu = u.exp();
            let occ = 1.0 / (eu - 1.0);
            out[i * 3] = 1.0;
            out[i * 3 + 1] = occ;
            out[i * 3 + 2] = -p[1] * eu * occ * occ / (KB_MEV_PER_K * t) * p[2].signum();
        }
    };

    // Log-spaced E_ph starts spanning sub-thermal to strongly activated,
    // two γ* scalings each.
    let e_lo = 0.5 * KB_MEV_PER_K * t_min;
    let e_hi = 10.0 * KB_MEV_PER_K * t_max;
    let mut best: Option<lm::LmFit> = None;
    for k in 0..4 {
        let e0 = e_lo * (e_hi / e_lo).powf(k as f64 / 3.0);
        let occ_span = 1.0 / ((e0 / (KB_MEV_PER_K * t_max)).exp() - 1.0)
            - 1.0 / ((e0 / (KB_MEV_PER_K * t_min)).exp() - 1.0);
        let gs_base = ((g_max - g_min) / occ_span.max(1e-12)).max(1e-12 * scale);
        for gs_scale in [1.0, 3.0] {
            let start = [g_min.max(0.0), gs_base * gs_scale, e0];
            let fit = lm::minimize(&start, points.len(), &residuals, Some(&jacobian));
            if fit.converged {
                let better = match &best {
                    None => true,
                    Some(b) => fit.residual_norm < b.residual_norm,
                };
                if better {
                    best = Some(fit);
                }
            }
        }
    }
    let fit = best.ok_or(AnalysisError::FitDidNotConverge { iterations: lm::MAX_ITERATIONS })?;
    let mut covariance = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            covariance[a][b] = fit.covariance[a][b];
        }
    }
    Ok(ActivationFit {
        gamma0_ps_inv: fit.params[0].max(0.0),
        gamma_star_ps_inv: fit.params[1].max(0.0),
        e_ph_mev: fit.params[2].abs(),
        covariance,
        residual_norm: fit.residual_norm,
        degenerate: false,
    })
}

/// Ordinary least-squares line through (T, γ) in (ps, MHz).
#[derive(Debug, Clone)]
pub struct DiffusionFit {
    pub slope_mhz_per_ps: f64,
    pub intercept_mhz: f64,
    pub covariance: [[f64; 2]; 2],
    pub residual_norm: f64,
}

pub fn fit_spectral_diffusion(points: &[(f64, f64)]) -> Result<DiffusionFit, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints { got: points.len(), need: 3 });
    }
    let (slope, intercept, covariance, residual_norm) = ols_line(points);
    Ok(DiffusionFit { slope_mhz_per_ps: slope, intercept_mhz: intercept, covariance, residual_norm })
}

fn ols_line(points: &[(f64, f64)]) -> (f64, f64, [[f64; 2]; 2], f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let ssr: f64 = points.iter().map(|&(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let dof = (points.len() as f64 - 2.0).max(1.0);
    let s2 = ssr / dof;
    // (XᵀX)⁻¹ for X = [x 1] ordered (slope, intercept).
    let cov = [
        [s2 * n / det, -s2 * sx / det],
        [-s2 * sx / det, s2 * sxx / det],
    ];
    (slope, intercept, cov, ssr.sqrt())
}

/// Deviation-from-exponential metric of an echo decay curve: fit an
/// exponential (a line in log space) to the leading `early_fraction` of
/// points, then integrate |log residual| over the remaining points,
/// normalized by the integration span. Zero iff the decay is globally
/// exponential; invariant under amplitude rescaling.
pub fn nonmarkovianity_metric(
    decay: &[(f64, f64)],
    early_fraction: f64,
) -> Result<f64, AnalysisError> {
    if !(early_fraction > 0.0 && early_fraction < 1.0) {
        return Err(AnalysisError::InvalidEarlyFraction(early_fraction));
    }
    for &(_, a) in decay {
        if !(a > 0.0) {
            return Err(AnalysisError::NonPositiveAmplitude(a));
        }
    }
    let n = decay.len();
    let n_early = ((early_fraction * n as f64).ceil() as usize).max(2);
    if n < n_early + 2 {
        return Err(AnalysisError::TooFewPoints { got: n, need: n_early + 2 });
    }
    let logs: Vec<(f64, f64)> = decay.iter().map(|&(t, a)| (t, a.ln())).collect();
    let (slope, intercept, _, _) = ols_line(&logs[..n_early]);

    let rest = &logs[n_early..];
    let mut integral = 0.0;
    for w in rest.windows(2) {
        let r0 = (w[0].1 - (intercept + slope * w[0].0)).abs();
        let r1 = (w[1].1 - (intercept + slope * w[1].0)).abs();
        integral += 0.5 * (r0 + r1) * (w[1].0 - w[0].0);
    }
    let span = rest[rest.len() - 1].0 - rest[0].0;
    Ok(integral / span)
}

/// Rectangular integration box in spectrum axis units (meV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBox {
    pub y_min_mev: f64,
    pub y_max_mev: f64,
    pub x_min_mev: f64,
    pub x_max_mev: f64,
}

/// |values|² integrated over the box, one number per (τ, spectrum) pair.
pub fn sideband_dynamics(
    series: &[(f64, Spectrum2D)],
    box_: &SpectralBox,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let mut out = Vec::with_capacity(series.len());
    for (tau, spec) in series {
        let in_axes = |axis: &mdcs_axis::EnergyAxis, lo: f64, hi: f64| {
            lo >= axis.min_mev() && hi <= axis.max_mev()
        };
        if !in_axes(&spec.axis_y, box_.y_min_mev, box_.y_max_mev)
            || !in_axes(&spec.axis_x, box_.x_min_mev, box_.x_max_mev)
        {
            return Err(AnalysisError::BoxOutsideAxes);
        }
        let cell = spec.x_step() * spec.y_step();
        let mut power = 0.0;
        for (iy, ey) in spec.axis_y.iter().enumerate() {
            if ey < box_.y_min_mev || ey > box_.y_max_mev {
                continue;
            }
            for (ix, ex) in spec.axis_x.iter().enumerate() {
                if ex < box_.x_min_mev || ex > box_.x_max_mev {
                    continue;
                }
                power += spec.values[[iy, ix]].norm_sqr() * cell;
            }
        }
        out.push((*tau, power));
    }
    Ok(out)
}
