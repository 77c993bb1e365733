//! Sectioned key-value run configuration (TOML grammar, explicit units in
//! key names). Unknown keys are rejected; every physical parameter is
//! validated by its owning module before any computation starts, and the
//! offending key is named in the error.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mdcs_core::analysis::{LineshapeModel, SliceDirection, SpectralBox};
use mdcs_core::bath::{NoiseModel, SpectralDensity};
use mdcs_core::dynamics::{EmitterPair, PairDephasing, SpectralDiffusion, VibronicMode};
use mdcs_core::grid::TimeGrid;
use mdcs_core::quantum::{InhomogeneousDistribution, TwoLevelEmitter};
use mdcs_core::spectra::{LaserWindow, SpectrumOptions};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleQuantum,
    ZeroQuantum,
    DoubleQuantum,
    EchoDecay,
    TemperatureSweep,
    DiffusionSweep,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::SingleQuantum => "single_quantum",
            ScenarioKind::ZeroQuantum => "zero_quantum",
            ScenarioKind::DoubleQuantum => "double_quantum",
            ScenarioKind::EchoDecay => "echo_decay",
            ScenarioKind::TemperatureSweep => "temperature_sweep",
            ScenarioKind::DiffusionSweep => "diffusion_sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_energy_mev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub mean_energy_mev: f64,
    #[serde(default = "default_dipole")]
    pub dipole: f64,
    #[serde(default)]
    pub pure_dephasing_rate_ps_inv: f64,
}

fn default_dipole() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Gaussian,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub kind: EnsembleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_mev: Option<f64>,
    #[serde(default)]
    pub sigma_mev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathModelKind {
    White,
    OrnsteinUhlenbeck,
    SpectralDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub model: BathModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_ps_inv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_rad_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_correlation_time_ps_inv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_density: Option<Vec<SpectralDensityPart>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralDensityVariant {
    Ohmic,
    SuperOhmicGaussian,
    DiscreteMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDensityPart {
    pub variant: SpectralDensityVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_mev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_energy_mev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub huang_rhys: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_ps_inv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_step_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_step_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waiting_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waiting_step_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waiting_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_fixed_ps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_values_ps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSection {
    pub kappa_ps_inv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibronicSection {
    pub mode_energy_mev: f64,
    pub huang_rhys: f64,
    pub damping_ps_inv: f64,
    #[serde(default = "default_plus_weight")]
    pub plus_weight: f64,
}

fn default_plus_weight() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSection {
    pub energy_a_mev: f64,
    pub energy_b_mev: f64,
    #[serde(default = "default_dipole")]
    pub dipole_a: f64,
    #[serde(default = "default_dipole")]
    pub dipole_b: f64,
    #[serde(default)]
    pub coupling_mev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biexciton_shift_mev: Option<f64>,
    #[serde(default)]
    pub gamma_a_ps_inv: f64,
    #[serde(default)]
    pub gamma_b_ps_inv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_two_quantum_ps_inv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_zero_padding")]
    pub zero_padding: usize,
    #[serde(default)]
    pub apodize_emission: bool,
    #[serde(default)]
    pub apodize_waiting: bool,
}

fn default_zero_padding() -> usize {
    4
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { zero_padding: default_zero_padding(), apodize_emission: false, apodize_waiting: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub center_mev: f64,
    pub fwhm_mev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lorentzian,
    SqrtLorentzian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    Diagonal,
    CrossDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_mev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width_mev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<DirectionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sideband_box: Option<BoxSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub y_min_mev: f64,
    pub y_max_mev: f64,
    pub x_min_mev: f64,
    pub x_max_mev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures_k: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waiting_times_ps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0_ps_inv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_star_ps_inv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_ph_mev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub directory: PathBuf,
    #[serde(default)]
    pub plot_data: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_out_dir(), plot_data: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emitter: Option<EmitterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    #[serde(default)]
    pub grids: GridsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<DiffusionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vibronic: Option<VibronicSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Fill derivable defaults so that parse → normalize → serialize →
    /// parse is a fixed point. Analysis-only configs (no scenario/emitter)
    /// pass through untouched except for universal defaults.
    pub fn normalize(mut self) -> Self {
        if let Some(emitter) = &self.emitter {
            let emitter_energy = emitter.mean_energy_mev;
            let rate = emitter.pure_dephasing_rate_ps_inv;
            let ensemble = self.ensemble.get_or_insert(EnsembleSection {
                kind: EnsembleKind::Delta,
                center_mev: None,
                sigma_mev: 0.0,
            });
            if ensemble.center_mev.is_none() {
                ensemble.center_mev = Some(emitter_energy);
            }
            let center = ensemble.center_mev.unwrap();
            if let Some(scenario) = &mut self.scenario {
                if scenario.reference_energy_mev.is_none() {
                    scenario.reference_energy_mev = Some(center);
                }
            }
            if self.bath.is_none() {
                self.bath = Some(BathSection {
                    model: BathModelKind::White,
                    rate_ps_inv: Some(rate),
                    amplitude_rad_ps: None,
                    inverse_correlation_time_ps_inv: None,
                    temperature_k: None,
                    spectral_density: None,
                });
            }
        }
        if self.spectrum.is_none() {
            self.spectrum = Some(SpectrumSection::default());
        }
        if self.output.is_none() {
            self.output = Some(OutputSection::default());
        }
        self
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("serialization failed: {e}")))
    }
}

/// Slice/fit parameters resolved against the physical configuration.
#[derive(Debug, Clone)]
pub struct AnalysisPlan {
    pub anchor_mev: f64,
    /// Explicit fit window; `None` lets each consumer derive one from the
    /// dephasing scale at hand.
    pub half_width_mev: Option<f64>,
    pub model: LineshapeModel,
    pub direction: SliceDirection,
    pub sideband_box: Option<SpectralBox>,
}

/// Fully validated run plan: every physical object constructed by its
/// owning module, config keys resolved.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: Config,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub reference_energy_mev: f64,
    pub emitter: TwoLevelEmitter,
    pub ensemble: InhomogeneousDistribution,
    pub noise: NoiseModel,
    pub diffusion: Option<SpectralDiffusion>,
    pub vibronic: Option<VibronicMode>,
    pub pair: Option<(EmitterPair, PairDephasing)>,
    pub spectrum_options: SpectrumOptions,
    pub window: Option<LaserWindow>,
    pub analysis: AnalysisPlan,
    pub out_dir: PathBuf,
    pub plot_data: bool,
}

impl Plan {
    pub fn from_config(
        raw: Config,
        out_override: Option<PathBuf>,
        seed_override: Option<u64>,
    ) -> Result<Self, CliError> {
        let config = raw.normalize();
        let scenario = config
            .scenario
            .clone()
            .ok_or_else(|| CliError::key("scenario", "section required for simulation runs"))?;
        let emitter_section = config
            .emitter
            .clone()
            .ok_or_else(|| CliError::key("emitter", "section required for simulation runs"))?;
        let kind = scenario.kind;
        let seed = seed_override.unwrap_or(scenario.seed);

        let emitter = TwoLevelEmitter::new(
            emitter_section.mean_energy_mev,
            emitter_section.dipole,
            emitter_section.pure_dephasing_rate_ps_inv,
        )
        .map_err(|e| CliError::key("emitter", e))?;

        let ens = config.ensemble.as_ref().expect("normalized");
        let center = ens.center_mev.unwrap_or(emitter_section.mean_energy_mev);
        let ensemble = match ens.kind {
            EnsembleKind::Delta => {
                if ens.sigma_mev != 0.0 {
                    return Err(CliError::key(
                        "ensemble.sigma_mev",
                        "delta ensembles must have sigma = 0",
                    ));
                }
                InhomogeneousDistribution::delta(center)
            }
            EnsembleKind::Gaussian => InhomogeneousDistribution::gaussian(center, ens.sigma_mev)
                .map_err(|e| CliError::key("ensemble.sigma_mev", e))?,
        };

        let noise = build_noise(config.bath.as_ref().expect("normalized"))?;
        noise.validate().map_err(|e| CliError::key("bath", e))?;

        let diffusion = match &config.diffusion {
            None => None,
            Some(d) => Some(
                SpectralDiffusion::new(d.kappa_ps_inv)
                    .map_err(|e| CliError::key("diffusion.kappa_ps_inv", e))?,
            ),
        };
        let vibronic = match &config.vibronic {
            None => None,
            Some(v) => {
                let mode = VibronicMode {
                    mode_energy_mev: v.mode_energy_mev,
                    huang_rhys: v.huang_rhys,
                    damping_ps_inv: v.damping_ps_inv,
                    plus_weight: v.plus_weight,
                };
                mode.validate().map_err(|e| CliError::key("vibronic", e))?;
                Some(mode)
            }
        };
        let pair = match &config.pair {
            None => None,
            Some(p) => {
                let a = TwoLevelEmitter::new(p.energy_a_mev, p.dipole_a, p.gamma_a_ps_inv)
                    .map_err(|e| CliError::key("pair.energy_a_mev", e))?;
                let b = TwoLevelEmitter::new(p.energy_b_mev, p.dipole_b, p.gamma_b_ps_inv)
                    .map_err(|e| CliError::key("pair.energy_b_mev", e))?;
                let pair = match p.biexciton_shift_mev {
                    Some(shift) => EmitterPair::with_biexciton_shift(a, b, p.coupling_mev, shift),
                    None => EmitterPair::from_coupling(a, b, p.coupling_mev),
                };
                for (key, g) in
                    [("pair.gamma_a_ps_inv", p.gamma_a_ps_inv), ("pair.gamma_b_ps_inv", p.gamma_b_ps_inv)]
                {
                    if !(g >= 0.0) {
                        return Err(CliError::key(key, "dephasing rate must be nonnegative"));
                    }
                }
                let mut dephasing = PairDephasing::new(p.gamma_a_ps_inv, p.gamma_b_ps_inv);
                dephasing.gamma_two_quantum_ps_inv = p.gamma_two_quantum_ps_inv;
                Some((pair, dephasing))
            }
        };

        let spec = config.spectrum.clone().unwrap_or_default();
        if spec.zero_padding == 0 {
            return Err(CliError::key("spectrum.zero_padding", "must be at least 1"));
        }
        let spectrum_options = SpectrumOptions {
            zero_padding: spec.zero_padding,
            apodize_emission: spec.apodize_emission,
            apodize_secondary: spec.apodize_waiting,
        };

        let window = match &config.window {
            None => None,
            Some(w) => Some(
                LaserWindow::new(w.center_mev, w.fwhm_mev)
                    .map_err(|e| CliError::key("window.fwhm_mev", e))?,
            ),
        };

        let analysis_section = config.analysis.clone().unwrap_or_default();
        if let Some(f) = analysis_section.early_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::key(
                    "analysis.early_fraction",
                    "must lie strictly between 0 and 1",
                ));
            }
        }
        let default_model = if ensemble.sigma_mev() > 0.0 {
            LineshapeModel::SqrtLorentzian
        } else {
            LineshapeModel::Lorentzian
        };
        let analysis = AnalysisPlan {
            anchor_mev: analysis_section.anchor_mev.unwrap_or(center),
            half_width_mev: analysis_section.half_width_mev,
            model: match analysis_section.model {
                Some(ModelKind::Lorentzian) => LineshapeModel::Lorentzian,
                Some(ModelKind::SqrtLorentzian) => LineshapeModel::SqrtLorentzian,
                None => default_model,
            },
            direction: match analysis_section.direction {
                Some(DirectionKind::Diagonal) => SliceDirection::Diagonal,
                Some(DirectionKind::CrossDiagonal) | None => SliceDirection::CrossDiagonal,
            },
            sideband_box: analysis_section.sideband_box.as_ref().map(|b| SpectralBox {
                y_min_mev: b.y_min_mev,
                y_max_mev: b.y_max_mev,
                x_min_mev: b.x_min_mev,
                x_max_mev: b.x_max_mev,
            }),
        };

        let output = config.output.clone().unwrap_or_default();
        let out_dir = out_override.unwrap_or(output.directory.clone());
        let reference_energy_mev = scenario.reference_energy_mev.unwrap_or(center);

        Ok(Plan {
            config,
            kind,
            seed,
            reference_energy_mev,
            emitter,
            ensemble,
            noise,
            diffusion,
            vibronic,
            pair,
            spectrum_options,
            window,
            analysis,
            out_dir,
            plot_data: output.plot_data,
        })
    }

    pub fn tau_grid(&self) -> Result<TimeGrid, CliError> {
        let step = self
            .config
            .grids
            .tau_step_ps
            .ok_or_else(|| CliError::key("grids.tau_step_ps", "required for this scenario"))?;
        let count = self
            .config
            .grids
            .tau_count
            .ok_or_else(|| CliError::key("grids.tau_count", "required for this scenario"))?;
        TimeGrid::from_zero(step, count).map_err(|e| CliError::key("grids.tau_step_ps", e))
    }

    pub fn t_grid(&self) -> Result<TimeGrid, CliError> {
        let step = self
            .config
            .grids
            .t_step_ps
            .ok_or_else(|| CliError::key("grids.t_step_ps", "required for this scenario"))?;
        let count = self
            .config
            .grids
            .t_count
            .ok_or_else(|| CliError::key("grids.t_count", "required for this scenario"))?;
        TimeGrid::from_zero(step, count).map_err(|e| CliError::key("grids.t_step_ps", e))
    }

    pub fn waiting_grid(&self) -> Result<TimeGrid, CliError> {
        let step = self
            .config
            .grids
            .waiting_step_ps
            .ok_or_else(|| CliError::key("grids.waiting_step_ps", "required for this scenario"))?;
        let count = self
            .config
            .grids
            .waiting_count
            .ok_or_else(|| CliError::key("grids.waiting_count", "required for this scenario"))?;
        TimeGrid::from_zero(step, count).map_err(|e| CliError::key("grids.waiting_step_ps", e))
    }

    pub fn waiting_fixed(&self) -> f64 {
        self.config.grids.waiting_ps.unwrap_or(0.0)
    }
}

fn build_noise(bath: &BathSection) -> Result<NoiseModel, CliError> {
    match bath.model {
        BathModelKind::White => Ok(NoiseModel::White {
            rate_ps_inv: bath
                .rate_ps_inv
                .ok_or_else(|| CliError::key("bath.rate_ps_inv", "required for white noise"))?,
        }),
        BathModelKind::OrnsteinUhlenbeck => Ok(NoiseModel::OrnsteinUhlenbeck {
            amplitude_rad_ps: bath.amplitude_rad_ps.ok_or_else(|| {
                CliError::key("bath.amplitude_rad_ps", "required for ornstein_uhlenbeck")
            })?,
            inverse_correlation_time_ps_inv: bath.inverse_correlation_time_ps_inv.ok_or_else(|| {
                CliError::key(
                    "bath.inverse_correlation_time_ps_inv",
                    "required for ornstein_uhlenbeck",
                )
            })?,
        }),
        BathModelKind::SpectralDensity => {
            let parts = bath.spectral_density.as_ref().ok_or_else(|| {
                CliError::key("bath.spectral_density", "required for spectral_density model")
            })?;
            if parts.is_empty() {
                return Err(CliError::key("bath.spectral_density", "needs at least one part"));
            }
            let mut built = Vec::with_capacity(parts.len());
            for (i, part) in parts.iter().enumerate() {
                built.push(build_density_part(part, i)?);
            }
            let density = if built.len() == 1 {
                built.pop().unwrap()
            } else {
                SpectralDensity::Composite(built)
            };
            let temperature = bath.temperature_k.ok_or_else(|| {
                CliError::key("bath.temperature_k", "required for spectral_density model")
            })?;
            let nm = NoiseModel::FromSpectralDensity { density, temperature_k: temperature };
            nm.validate().map_err(|e| CliError::key("bath", e))?;
            Ok(nm)
        }
    }
}

fn build_density_part(part: &SpectralDensityPart, index: usize) -> Result<SpectralDensity, CliError> {
    let need = |value: Option<f64>, field: &str| {
        value.ok_or_else(|| {
            CliError::key(
                &format!("bath.spectral_density[{index}].{field}"),
                "required for this variant",
            )
        })
    };
    let sd = match part.variant {
        SpectralDensityVariant::Ohmic => SpectralDensity::Ohmic {
            coupling: need(part.coupling, "coupling")?,
            cutoff_mev: need(part.cutoff_mev, "cutoff_mev")?,
        },
        SpectralDensityVariant::SuperOhmicGaussian => SpectralDensity::SuperOhmicGaussian {
            coupling: need(part.coupling, "coupling")?,
            cutoff_mev: need(part.cutoff_mev, "cutoff_mev")?,
        },
        SpectralDensityVariant::DiscreteMode => SpectralDensity::DiscreteMode {
            mode_energy_mev: need(part.mode_energy_mev, "mode_energy_mev")?,
            huang_rhys: need(part.huang_rhys, "huang_rhys")?,
            damping_ps_inv: need(part.damping_ps_inv, "damping_ps_inv")?,
        },
    };
    sd.validate()
        .map_err(|e| CliError::key(&format!("bath.spectral_density[{index}]"), e))?;
    Ok(sd)
}
