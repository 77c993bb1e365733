//! Discrete approximation of the continuous transform
//! Ŝ(ω) = ∫ S(t)·e^{+iωt} dt along one axis of a 2D array.
//!
//! The +iωt kernel is the convention that puts the rephasing signal
//! e^{+iω̄τ} at negative ω_τ and emission e^{−iω̄t} at positive ω_t. Output
//! bins are fftshifted so the angular frequency axis ascends; values carry
//! the time step as integration measure and the start-time phase
//! e^{+iω·t₀}.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) struct AxisSpectrum {
    /// Ascending angular frequencies (rad/ps), length = padded bin count.
    pub omega: Vec<f64>,
    pub values: Array2<Complex64>,
}

/// Transform `arr` along `axis` (sample spacing `step`, first sample at
/// `start`). `pad` multiplies the bin count by zero-padding; a cosine taper
/// is applied to the samples first when `apodize` is set.
pub(crate) fn transform_axis(
    arr: &Array2<Complex64>,
    axis: usize,
    step: f64,
    start: f64,
    pad: usize,
    apodize: bool,
) -> AxisSpectrum {
    let n = arr.len_of(Axis(axis));
    let mut padded = n * pad.max(1);
    if padded % 2 == 1 {
        padded += 1;
    }
    let d_omega = std::f64::consts::TAU / (padded as f64 * step);
    let half = (padded / 2) as isize;

    let taper: Vec<f64> = (0..n)
        .map(|k| {
            if apodize && n > 1 {
                0.5 * (1.0 + (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())
            } else {
                1.0
            }
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(padded);

    let other_len = arr.len_of(Axis(1 - axis));
    let mut out = if axis == 0 {
        Array2::zeros((padded, other_len))
    } else {
        Array2::zeros((other_len, padded))
    };

    let mut buf = vec![Complex64::new(0.0, 0.0); padded];
    for lane in 0..other_len {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = if k < n {
                let v = if axis == 0 { arr[[k, lane]] } else { arr[[lane, k]] };
                v * taper[k]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        // fftshift: output index j holds signed bin m = j − padded/2, whose
        // unshifted position is m mod padded.
        for j in 0..padded {
            let m = j as isize - half;
            let src = m.rem_euclid(padded as isize) as usize;
            let omega = m as f64 * d_omega;
            let scaled = buf[src] * step * Complex64::from_polar(1.0, omega * start);
            if axis == 0 {
                out[[j, lane]] = scaled;
            } else {
                out[[lane, j]] = scaled;
            }
        }
    }

    let omega = (0..padded).map(|j| (j as isize - half) as f64 * d_omega).collect();
    AxisSpectrum { omega, values: out }
}
