//! `mdcs`: config-driven simulation and analysis of optical decoherence
//! and multidimensional coherent spectra of two-level emitters.
//!
//! Exit codes: 0 ok, 2 usage/config, 3 I/O, 4 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mdcs_cli::analyze;
use mdcs_cli::config::{Config, Plan};
use mdcs_cli::error::CliError;
use mdcs_cli::simulate;
use mdcs_cli::sweep;

#[derive(Parser)]
#[command(
    name = "mdcs",
    version,
    about = "Simulate and analyze multidimensional coherent spectra of two-level emitters"
)]
struct Cli {
    /// Worker threads (default: all cores). Results are identical for any
    /// thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation scenario from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides [output].directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override (overrides [scenario].seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit spectra or decay tables previously produced by `simulate`.
    Analyze {
        /// Spectrum (.spectrum) or decay (.decay) files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Config providing the [analysis] section (optional).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a temperature or waiting-time sweep: simulate + analyze per
    /// point, then the matching activation or diffusion fit.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Describe the on-disk file formats.
    Formats,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore the error if a pool already exists (e.g. repeated init in
        // tests); determinism does not depend on the pool size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Simulate { config, out, seed } => {
            let plan = Plan::from_config(Config::load(&config)?, out, seed)?;
            let outcome = simulate::run_simulate(&plan)?;
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            for file in &outcome.files {
                println!("wrote {}", plan.out_dir.join(file).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { inputs, config, out } => {
            let cfg = match config {
                Some(path) => Some(Config::load(&path)?.normalize()),
                None => None,
            };
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out"));
            let outcome = analyze::run_analyze(&inputs, cfg.as_ref(), &out_dir)?;
            print!("{}", outcome.report);
            println!("wrote {}", out_dir.join("report.txt").display());
            println!("wrote {}", out_dir.join("fits.tsv").display());
            if !outcome.failures.is_empty() {
                for failure in &outcome.failures {
                    eprintln!("fit failure: {failure}");
                }
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out, seed } => {
            let plan = Plan::from_config(Config::load(&config)?, out, seed)?;
            let outcome = sweep::run_sweep(&plan)?;
            print!("{}", outcome.report);
            for file in &outcome.files {
                println!("wrote {}", plan.out_dir.join(file).display());
            }
            if !outcome.failed_points.is_empty() {
                eprintln!("{} sweep point(s) failed", outcome.failed_points.len());
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Formats => {
            print!("{}", FORMATS_HELP);
            Ok(ExitCode::SUCCESS)
        }
    }
}

const FORMATS_HELP: &str = r#"mdcs file formats
=================

Spectrum files (MDCS-GRID v1)
-----------------------------
Self-describing text, '.' decimals, '\n' newlines:

    MDCS-GRID v1
    kind=single_quantum | zero_quantum | double_quantum
    axis_x_min_mev=<float>      emission axis, uniform: min + i*step
    axis_x_step_mev=<float>
    axis_x_count=<int>
    axis_y_min_mev=<float>      |hw_tau| (single-quantum) or hw_T axis
    axis_y_step_mev=<float>
    axis_y_count=<int>
    reference_energy_mev=<float>
    seed=<int>
    values=row_major_re_im
    <re><TAB><im>               axis_y_count x axis_x_count lines,
    ...                         row-major (y rows, x fastest)

Floats are printed with 17 significant digits, so write -> read round-trips
are bit-exact for the header and exact to the ulp for values.

Decay tables (MDCS-DECAY v1)
----------------------------
    MDCS-DECAY v1
    count=<int>
    seed=<int>
    values=tau_ps_amplitude
    <tau_ps><TAB><amplitude>    count lines

Manifests (manifest.txt)
------------------------
Line-oriented key=value: code version, scenario, seed, a digest of the
normalized config, and one `output.<file>=<sha256>` line per output file.
Identical config + seed reproduce identical digests for any --threads.

Sweep tables (sweep_table.tsv)
------------------------------
Tab-separated, one row per sweep point plus a trailing comment row with the
consolidated fit parameters.
"#;
