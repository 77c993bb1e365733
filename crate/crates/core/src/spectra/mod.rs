//! Assembly of 2D spectra from third-order responses.
//!
//! Each spectrum is the Fourier transform of the response along a pair of
//! time variables: {τ, t} for single-quantum, {T, t} for zero- and
//! double-quantum. The rotating-frame reference energy is restored on
//! assembly (+E_ref on emission and absorption axes, +2·E_ref on the
//! two-quantum axis, the mixing axis stays centered at zero), and the
//! single-quantum ω_τ axis is exported as |ħω_τ| following the usual plot
//! convention; the signed rephasing convention exists only inside the
//! transform.

mod fft;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{DelayAxis, Pathway, Response3};
use crate::units::HBAR_MEV_PS;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("energy axis needs a positive step and at least 2 points, got step {step} meV, count {count}")]
    InvalidAxis { step: f64, count: usize },
    #[error("response pathway {got:?} does not match required {want:?}")]
    WrongPathway { got: Pathway, want: Pathway },
    #[error("response axis `{0}` must be a time grid for this spectrum kind")]
    ExpectedGridAxis(&'static str),
    #[error("response axis `{0}` must be a fixed delay for this spectrum kind")]
    ExpectedFixedAxis(&'static str),
    #[error("laser window FWHM must be positive, got {0} meV")]
    InvalidWindowWidth(f64),
    #[error("energy {0} meV outside spectrum axes")]
    OutsideAxes(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    SingleQuantum,
    ZeroQuantum,
    DoubleQuantum,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::SingleQuantum => "single_quantum",
            SpectrumKind::ZeroQuantum => "zero_quantum",
            SpectrumKind::DoubleQuantum => "double_quantum",
        }
    }
}

/// Uniform energy axis, stored as (min, step, count) so values regenerate
/// bit-exactly everywhere (transform assembly, file IO): point i is
/// `min + i·step`. Strictly increasing by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAxis {
    min_mev: f64,
    step_mev: f64,
    count: usize,
}

impl EnergyAxis {
    pub fn new(min_mev: f64, step_mev: f64, count: usize) -> Result<Self, SpectraError> {
        if !(step_mev > 0.0) || count < 2 {
            return Err(SpectraError::InvalidAxis { step: step_mev, count });
        }
        Ok(Self { min_mev, step_mev, count })
    }

    pub fn min_mev(&self) -> f64 {
        self.min_mev
    }

    pub fn step_mev(&self) -> f64 {
        self.step_mev
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn at(&self, i: usize) -> f64 {
        self.min_mev + i as f64 * self.step_mev
    }

    pub fn max_mev(&self) -> f64 {
        self.at(self.count - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.at(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.at(i))
    }

    /// Nearest bin; `None` outside the axis span.
    pub fn nearest_index(&self, energy_mev: f64) -> Option<usize> {
        let idx = (energy_mev - self.min_mev) / self.step_mev;
        let rounded = idx.round();
        if rounded < -0.5 || rounded > (self.count - 1) as f64 + 0.5 {
            return None;
        }
        Some(rounded.clamp(0.0, (self.count - 1) as f64) as usize)
    }

    fn fractional_index(&self, energy_mev: f64) -> Option<f64> {
        let idx = (energy_mev - self.min_mev) / self.step_mev;
        if idx < 0.0 || idx > (self.count - 1) as f64 {
            return None;
        }
        Some(idx)
    }
}

/// Complex 2D spectrum with labeled energy axes (meV).
///
/// `axis_x` is the emission energy ħω_t; `axis_y` is |ħω_τ| for
/// single-quantum spectra and ħω_T for zero-/double-quantum spectra.
/// Values are indexed `[iy, ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub kind: SpectrumKind,
    pub axis_x: EnergyAxis,
    pub axis_y: EnergyAxis,
    pub values: Array2<Complex64>,
    pub reference_energy_mev: f64,
}

impl Spectrum2D {
    pub fn x_step(&self) -> f64 {
        self.axis_x.step_mev()
    }

    pub fn y_step(&self) -> f64 {
        self.axis_y.step_mev()
    }

    /// Nearest x bin; error when outside the axis span.
    pub fn index_of_x(&self, energy_mev: f64) -> Result<usize, SpectraError> {
        self.axis_x.nearest_index(energy_mev).ok_or(SpectraError::OutsideAxes(energy_mev))
    }

    pub fn index_of_y(&self, energy_mev: f64) -> Result<usize, SpectraError> {
        self.axis_y.nearest_index(energy_mev).ok_or(SpectraError::OutsideAxes(energy_mev))
    }

    /// (iy, ix) of the magnitude maximum.
    pub fn argmax_magnitude(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_val = f64::MIN;
        for ((iy, ix), v) in self.values.indexed_iter() {
            if v.norm() > best_val {
                best_val = v.norm();
                best = (iy, ix);
            }
        }
        best
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Bilinear interpolation of |values| at (x, y) in meV; `None` outside.
    pub fn magnitude_at(&self, x_mev: f64, y_mev: f64) -> Option<f64> {
        let fx = self.axis_x.fractional_index(x_mev)?;
        let fy = self.axis_y.fractional_index(y_mev)?;
        let (ix, tx) = split_frac(fx, self.axis_x.len());
        let (iy, ty) = split_frac(fy, self.axis_y.len());
        let v00 = self.values[[iy, ix]].norm();
        let v01 = self.values[[iy, ix + 1]].norm();
        let v10 = self.values[[iy + 1, ix]].norm();
        let v11 = self.values[[iy + 1, ix + 1]].norm();
        Some(v00 * (1.0 - tx) * (1.0 - ty) + v01 * tx * (1.0 - ty) + v10 * (1.0 - tx) * ty + v11 * tx * ty)
    }
}

fn split_frac(f: f64, len: usize) -> (usize, f64) {
    let i = (f.floor() as usize).min(len - 2);
    (i, f - i as f64)
}

/// Transform options: zero-padding factor (default 4, for bin-level peak
/// readouts) and optional cosine tapers, off by default because slice fits
/// need unapodized Lorentzian wings.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub zero_padding: usize,
    pub apodize_emission: bool,
    pub apodize_secondary: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { zero_padding: 4, apodize_emission: false, apodize_secondary: false }
    }
}

/// Single-quantum spectrum: transform τ → ω_τ and t → ω_t of a rephasing
/// response. The conjugate phase convention puts the signal at negative
/// ω_τ; the exported axis stores |ħω_τ|.
pub fn spectrum_single_quantum(resp: &Response3) -> Result<Spectrum2D, SpectraError> {
    spectrum_single_quantum_with(resp, &SpectrumOptions::default())
}

pub fn spectrum_single_quantum_with(
    resp: &Response3,
    opts: &SpectrumOptions,
) -> Result<Spectrum2D, SpectraError> {
    require_pathway(resp, Pathway::RephasingSingleQuantum)?;
    let tau_grid = match resp.tau {
        DelayAxis::Grid(g) => g,
        DelayAxis::Fixed(_) => return Err(SpectraError::ExpectedGridAxis("tau")),
    };
    if resp.waiting.as_grid().is_some() {
        return Err(SpectraError::ExpectedFixedAxis("waiting"));
    }

    let plane = plane_tau_t(resp);
    let em = fft::transform_axis(
        &plane,
        1,
        resp.t_grid.step(),
        resp.t_grid.start(),
        opts.zero_padding,
        opts.apodize_emission,
    );
    let both = fft::transform_axis(
        &em.values,
        0,
        tau_grid.step(),
        tau_grid.start(),
        opts.zero_padding,
        opts.apodize_secondary,
    );

    // Flip the signed ω_τ axis into |ħω_τ|: reverse rows, negate energies.
    let ny = both.values.nrows();
    let nx = both.values.ncols();
    let mut values = Array2::zeros((ny, nx));
    for iy in 0..ny {
        for ix in 0..nx {
            values[[iy, ix]] = both.values[[ny - 1 - iy, ix]];
        }
    }
    let e_ref = resp.reference_energy_mev;
    let y_step = HBAR_MEV_PS * (both.omega[1] - both.omega[0]);
    let y_min = e_ref - HBAR_MEV_PS * both.omega[ny - 1];
    let x_step = HBAR_MEV_PS * (em.omega[1] - em.omega[0]);
    let x_min = e_ref + HBAR_MEV_PS * em.omega[0];
    Ok(Spectrum2D {
        kind: SpectrumKind::SingleQuantum,
        axis_x: EnergyAxis::new(x_min, x_step, nx)?,
        axis_y: EnergyAxis::new(y_min, y_step, ny)?,
        values,
        reference_energy_mev: e_ref,
    })
}

/// Zero-quantum spectrum at fixed τ: transform T → ω_T and t → ω_t. The
/// ω_T axis is a mixing-energy axis centered at zero.
pub fn spectrum_zero_quantum(resp: &Response3) -> Result<Spectrum2D, SpectraError> {
    spectrum_zero_quantum_with(resp, &SpectrumOptions::default())
}

pub fn spectrum_zero_quantum_with(
    resp: &Response3,
    opts: &SpectrumOptions,
) -> Result<Spectrum2D, SpectraError> {
    require_pathway(resp, Pathway::ZeroQuantum)?;
    waiting_time_spectrum(resp, opts, SpectrumKind::ZeroQuantum, 0.0)
}

/// Double-quantum spectrum: transform T → ω_T and t → ω_t; the ω_T axis
/// probes two-quantum energies and is restored around 2·E_ref.
pub fn spectrum_double_quantum(resp: &Response3) -> Result<Spectrum2D, SpectraError> {
    spectrum_double_quantum_with(resp, &SpectrumOptions::default())
}

pub fn spectrum_double_quantum_with(
    resp: &Response3,
    opts: &SpectrumOptions,
) -> Result<Spectrum2D, SpectraError> {
    require_pathway(resp, Pathway::DoubleQuantum)?;
    waiting_time_spectrum(resp, opts, SpectrumKind::DoubleQuantum, 2.0 * resp.reference_energy_mev)
}

fn waiting_time_spectrum(
    resp: &Response3,
    opts: &SpectrumOptions,
    kind: SpectrumKind,
    y_offset_mev: f64,
) -> Result<Spectrum2D, SpectraError> {
    let waiting_grid = match resp.waiting {
        DelayAxis::Grid(g) => g,
        DelayAxis::Fixed(_) => return Err(SpectraError::ExpectedGridAxis("waiting")),
    };
    if resp.tau.as_grid().is_some() {
        return Err(SpectraError::ExpectedFixedAxis("tau"));
    }

    let plane = plane_waiting_t(resp);
    let em = fft::transform_axis(
        &plane,
        1,
        resp.t_grid.step(),
        resp.t_grid.start(),
        opts.zero_padding,
        opts.apodize_emission,
    );
    let both = fft::transform_axis(
        &em.values,
        0,
        waiting_grid.step(),
        waiting_grid.start(),
        opts.zero_padding,
        opts.apodize_secondary,
    );

    let e_ref = resp.reference_energy_mev;
    let y_step = HBAR_MEV_PS * (both.omega[1] - both.omega[0]);
    let y_min = y_offset_mev + HBAR_MEV_PS * both.omega[0];
    let x_step = HBAR_MEV_PS * (em.omega[1] - em.omega[0]);
    let x_min = e_ref + HBAR_MEV_PS * em.omega[0];
    let ny = both.values.nrows();
    let nx = both.values.ncols();
    Ok(Spectrum2D {
        kind,
        axis_x: EnergyAxis::new(x_min, x_step, nx)?,
        axis_y: EnergyAxis::new(y_min, y_step, ny)?,
        values: both.values,
        reference_energy_mev: e_ref,
    })
}

fn require_pathway(resp: &Response3, want: Pathway) -> Result<(), SpectraError> {
    if resp.pathway != want {
        return Err(SpectraError::WrongPathway { got: resp.pathway, want });
    }
    Ok(())
}

fn plane_tau_t(resp: &Response3) -> Array2<Complex64> {
    let n_tau = resp.tau.count();
    let n_t = resp.t_grid.count();
    let mut plane = Array2::zeros((n_tau, n_t));
    for i in 0..n_tau {
        for k in 0..n_t {
            plane[[i, k]] = resp.values[[i, 0, k]];
        }
    }
    plane
}

fn plane_waiting_t(resp: &Response3) -> Array2<Complex64> {
    let n_w = resp.waiting.count();
    let n_t = resp.t_grid.count();
    let mut plane = Array2::zeros((n_w, n_t));
    for i in 0..n_w {
        for k in 0..n_t {
            plane[[i, k]] = resp.values[[0, i, k]];
        }
    }
    plane
}

/// Gaussian excitation-laser spectrum; weighting is in field amplitude,
/// not intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserWindow {
    pub center_mev: f64,
    pub fwhm_mev: f64,
}

impl LaserWindow {
    pub fn new(center_mev: f64, fwhm_mev: f64) -> Result<Self, SpectraError> {
        if !(fwhm_mev > 0.0) {
            return Err(SpectraError::InvalidWindowWidth(fwhm_mev));
        }
        Ok(Self { center_mev, fwhm_mev })
    }

    pub fn amplitude(&self, energy_mev: f64) -> f64 {
        let sigma = self.fwhm_mev / (8.0 * std::f64::consts::LN_2).sqrt();
        let d = (energy_mev - self.center_mev) / sigma;
        (-0.5 * d * d).exp()
    }
}

/// Output of a windowing operation; `zero_overlap` marks a window with no
/// amplitude anywhere on the spectral support (the output is zeroed).
#[derive(Debug, Clone)]
pub struct Windowed<T> {
    pub output: T,
    pub zero_overlap: bool,
}

const OVERLAP_FLOOR: f64 = 1e-12;

/// Window a spectrum along its emission axis.
pub fn apply_laser_window_spectrum(spec: &Spectrum2D, window: &LaserWindow) -> Windowed<Spectrum2D> {
    let amps: Vec<f64> = spec.axis_x.iter().map(|e| window.amplitude(e)).collect();
    let zero_overlap = amps.iter().all(|&a| a < OVERLAP_FLOOR);
    let mut out = spec.clone();
    for ((_, ix), v) in out.values.indexed_iter_mut() {
        *v *= if zero_overlap { 0.0 } else { amps[ix] };
    }
    Windowed { output: out, zero_overlap }
}

/// Window a response in the frequency domain along the emission axis and,
/// when the τ axis is scanned, the (conjugated) absorption axis as well.
pub fn apply_laser_window_response(resp: &Response3, window: &LaserWindow) -> Windowed<Response3> {
    let mut out = resp.clone();
    let e_ref = resp.reference_energy_mev;

    let n_t = resp.t_grid.count();
    let t_amps = bin_amplitudes(n_t, resp.t_grid.step(), |omega| {
        window.amplitude(e_ref + HBAR_MEV_PS * omega)
    });
    let any_emission = t_amps.iter().any(|&a| a >= OVERLAP_FLOOR);
    filter_axis(&mut out, 2, &t_amps);

    // Rephasing evolution during τ is conjugated: absorption energy of a
    // bin at +ω is E_ref − ħω.
    let mut any_absorption = true;
    if let DelayAxis::Grid(tau_grid) = resp.tau {
        let tau_amps = bin_amplitudes(tau_grid.count(), tau_grid.step(), |omega| {
            window.amplitude(e_ref - HBAR_MEV_PS * omega)
        });
        any_absorption = tau_amps.iter().any(|&a| a >= OVERLAP_FLOOR);
        filter_axis(&mut out, 0, &tau_amps);
    }

    let zero_overlap = !(any_emission && any_absorption);
    if zero_overlap {
        out.values.fill(Complex64::new(0.0, 0.0));
    }
    Windowed { output: out, zero_overlap }
}

/// Window amplitudes per unshifted FFT bin of an n-point time axis.
fn bin_amplitudes(n: usize, step: f64, amp_of_omega: impl Fn(f64) -> f64) -> Vec<f64> {
    let d_omega = std::f64::consts::TAU / (n as f64 * step);
    (0..n)
        .map(|m| {
            let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            amp_of_omega(signed * d_omega)
        })
        .collect()
}

/// Multiply the response by per-bin amplitudes along the τ (0) or t (2)
/// axis: FFT with the +iωt kernel, scale, transform back.
fn filter_axis(resp: &mut Response3, axis: usize, amps: &[f64]) {
    let shape = resp.values.shape().to_vec();
    let n = shape[axis];
    let mut planner = rustfft::FftPlanner::new();
    let analysis = planner.plan_fft_inverse(n);
    let synthesis = planner.plan_fft_forward(n);
    let scale = 1.0 / n as f64;

    let (o0, o1) = match axis {
        0 => (shape[1], shape[2]),
        2 => (shape[0], shape[1]),
        _ => unreachable!("windowing applies to the tau and t axes"),
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..o0 {
        for b in 0..o1 {
            for (k, v) in line.iter_mut().enumerate() {
                *v = match axis {
                    0 => resp.values[[k, a, b]],
                    _ => resp.values[[a, b, k]],
                };
            }
            analysis.process(&mut line);
            for (k, v) in line.iter_mut().enumerate() {
                *v *= amps[k];
            }
            synthesis.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                let v = v * scale;
                match axis {
                    0 => resp.values[[k, a, b]] = v,
                    _ => resp.values[[a, b, k]] = v,
                }
            }
        }
    }
}
