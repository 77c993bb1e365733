//! Scenario drivers for `mdcs simulate`.

use mdcs_core::analysis::sideband_dynamics;
use mdcs_core::bath::{lineshape_function, LineshapeTable};
use mdcs_core::dynamics::{
    double_quantum_response, echo_decay_curve, photon_echo_response, zero_quantum_response, DelayAxis,
};
use mdcs_core::grid::TimeGrid;
use mdcs_core::spectra::{
    apply_laser_window_response, apply_laser_window_spectrum, spectrum_double_quantum_with,
    spectrum_single_quantum_with, spectrum_zero_quantum_with, Spectrum2D,
};

use crate::config::{Plan, ScenarioKind};
use crate::error::CliError;
use crate::formats;
use crate::manifest::Manifest;

/// Outcome of a simulate run: the files written (relative to the output
/// directory), plus any warnings worth surfacing.
pub struct SimulateOutcome {
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn run_simulate(plan: &Plan) -> Result<SimulateOutcome, CliError> {
    std::fs::create_dir_all(&plan.out_dir)
        .map_err(|source| CliError::Write { path: plan.out_dir.clone(), source })?;

    let mut outcome = SimulateOutcome { files: Vec::new(), warnings: Vec::new() };
    match plan.kind {
        ScenarioKind::SingleQuantum => single_quantum(plan, &mut outcome)?,
        ScenarioKind::EchoDecay => echo_decay(plan, &mut outcome)?,
        ScenarioKind::ZeroQuantum => zero_quantum(plan, &mut outcome)?,
        ScenarioKind::DoubleQuantum => double_quantum(plan, &mut outcome)?,
        ScenarioKind::TemperatureSweep | ScenarioKind::DiffusionSweep => {
            return Err(CliError::key(
                "scenario.kind",
                "sweep scenarios run under the `sweep` subcommand",
            ));
        }
    }

    let mut manifest = Manifest::new(
        &plan.out_dir,
        plan.kind.as_str(),
        plan.seed,
        &plan.config.to_toml()?,
    );
    for file in &outcome.files {
        manifest.add_output(file)?;
    }
    manifest.write()?;
    outcome.files.push("manifest.txt".to_string());
    Ok(outcome)
}

/// Lineshape table spanning every delay the response generators will ask
/// for, at a resolution no coarser than the finest response grid.
pub fn lineshape_for(plan: &Plan, max_time: f64, finest_step: f64) -> Result<LineshapeTable, CliError> {
    let step = finest_step;
    let count = (max_time / step).ceil() as usize + 2;
    let grid = TimeGrid::from_zero(step, count.max(2))
        .map_err(|e| CliError::key("grids", e))?;
    lineshape_function(&plan.noise, &grid).map_err(|e| CliError::Numeric(e.to_string()))
}

fn write_spectrum_output(
    plan: &Plan,
    outcome: &mut SimulateOutcome,
    name: &str,
    spec: &Spectrum2D,
) -> Result<(), CliError> {
    let path = plan.out_dir.join(name);
    formats::write_spectrum(&path, spec, plan.seed)?;
    outcome.files.push(name.to_string());
    if plan.plot_data {
        let plot_name = format!("{name}.xyz.tsv");
        formats::write_plot_data(&plan.out_dir.join(&plot_name), spec)?;
        outcome.files.push(plot_name);
    }
    Ok(())
}

fn single_quantum(plan: &Plan, outcome: &mut SimulateOutcome) -> Result<(), CliError> {
    let tau = plan.tau_grid()?;
    let t = plan.t_grid()?;
    let table = lineshape_for(plan, tau.end().max(t.end()), tau.step().min(t.step()))?;
    let mut resp = photon_echo_response(
        &plan.ensemble,
        &plan.emitter,
        &table,
        &tau,
        plan.waiting_fixed(),
        &t,
        plan.diffusion,
        plan.reference_energy_mev,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    if let Some(window) = &plan.window {
        let windowed = apply_laser_window_response(&resp, window);
        if windowed.zero_overlap {
            outcome.warnings.push("laser window has no overlap with the response; output zeroed".into());
        }
        resp = windowed.output;
    }
    let spec = spectrum_single_quantum_with(&resp, &plan.spectrum_options)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    write_spectrum_output(plan, outcome, "single_quantum.spectrum", &spec)
}

fn echo_decay(plan: &Plan, outcome: &mut SimulateOutcome) -> Result<(), CliError> {
    let tau = plan.tau_grid()?;
    let t = plan.t_grid()?;
    let table = lineshape_for(plan, tau.end().max(t.end()), tau.step().min(t.step()))?;
    let resp = photon_echo_response(
        &plan.ensemble,
        &plan.emitter,
        &table,
        &tau,
        plan.waiting_fixed(),
        &t,
        plan.diffusion,
        plan.reference_energy_mev,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    let decay = echo_decay_curve(&resp).map_err(|e| CliError::Numeric(e.to_string()))?;
    let name = "echo_decay.decay";
    formats::write_decay(&plan.out_dir.join(name), &decay, plan.seed)?;
    outcome.files.push(name.to_string());
    Ok(())
}

fn zero_quantum(plan: &Plan, outcome: &mut SimulateOutcome) -> Result<(), CliError> {
    let t = plan.t_grid()?;
    let waiting = plan.waiting_grid()?;
    let taus = plan.config.grids.tau_values_ps.clone().unwrap_or_else(|| vec![0.0]);
    if taus.is_empty() {
        return Err(CliError::key("grids.tau_values_ps", "needs at least one delay"));
    }
    let max_tau = taus.iter().cloned().fold(0.0, f64::max);
    let table = lineshape_for(plan, t.end().max(max_tau), t.step())?;

    let mut series: Vec<(f64, Spectrum2D)> = Vec::with_capacity(taus.len());
    for (idx, &tau) in taus.iter().enumerate() {
        let resp = zero_quantum_response(
            &plan.emitter,
            &table,
            plan.vibronic.as_ref(),
            tau,
            &waiting,
            &t,
            plan.reference_energy_mev,
        )
        .map_err(|e| CliError::Numeric(e.to_string()))?;
        let mut spec = spectrum_zero_quantum_with(&resp, &plan.spectrum_options)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        if let Some(window) = &plan.window {
            let windowed = apply_laser_window_spectrum(&spec, window);
            if windowed.zero_overlap {
                outcome.warnings.push(format!("laser window has no overlap at tau index {idx}"));
            }
            spec = windowed.output;
        }
        write_spectrum_output(plan, outcome, &format!("zero_quantum_tau{idx:03}.spectrum"), &spec)?;
        series.push((tau, spec));
    }

    if let Some(box_) = &plan.analysis.sideband_box {
        let dynamics =
            sideband_dynamics(&series, box_).map_err(|e| CliError::Numeric(e.to_string()))?;
        let mut text = String::from("# tau_ps\tsideband_power\n");
        for (tau, power) in dynamics {
            text.push_str(&format!("{tau:.9e}\t{power:.17e}\n"));
        }
        let name = "sideband_dynamics.tsv";
        formats::write_text(&plan.out_dir.join(name), &text)?;
        outcome.files.push(name.to_string());
    }
    Ok(())
}

fn double_quantum(plan: &Plan, outcome: &mut SimulateOutcome) -> Result<(), CliError> {
    let (pair, dephasing) =
        plan.pair.ok_or_else(|| CliError::key("pair", "section required for double_quantum"))?;
    let t = plan.t_grid()?;
    let waiting = plan.waiting_grid()?;
    let tau = DelayAxis::Fixed(plan.config.grids.tau_fixed_ps.unwrap_or(0.0));
    let resp = double_quantum_response(
        &pair,
        &dephasing,
        tau,
        &waiting,
        &t,
        plan.reference_energy_mev,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut spec = spectrum_double_quantum_with(&resp, &plan.spectrum_options)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    if let Some(window) = &plan.window {
        let windowed = apply_laser_window_spectrum(&spec, window);
        if windowed.zero_overlap {
            outcome.warnings.push("laser window has no overlap with the spectrum; output zeroed".into());
        }
        spec = windowed.output;
    }
    write_spectrum_output(plan, outcome, "double_quantum.spectrum", &spec)
}
