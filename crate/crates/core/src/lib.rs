//! Simulation and analysis of optical decoherence in two-level quantum
//! emitters.
//!
//! The crate propagates optical coherences under configurable system–bath
//! models (Markovian, Kubo–Anderson stochastic, thermal spectral densities),
//! synthesizes third-order responses and multidimensional coherent spectra
//! (single-, zero- and double-quantum), and extracts dephasing parameters
//! back out of them: cross-diagonal slice fits, temperature-activation fits,
//! spectral-diffusion slopes, sideband dynamics and a non-Markovianity
//! deviation metric.

pub mod analysis;
pub mod bath;
pub mod dynamics;
pub mod grid;
pub mod quantum;
pub mod spectra;
pub mod units;

pub use grid::TimeGrid;
pub use quantum::{InhomogeneousDistribution, PureState, TwoLevelEmitter};
