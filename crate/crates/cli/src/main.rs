//! `pairtomo` command-line pipelines.
//!
//! Every command is a pure function of its input files and flags: all
//! randomness comes from `--seed`. Option precedence is flags, then JSON
//! config files, then built-in defaults. Outputs are written atomically and
//! removed again if a later step of the same command fails. On failure a
//! JSON error record is printed to stderr and the exit status is 1.

mod commands;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "pairtomo", version, about = "Pair-source tomography and spectral modeling pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Mle,
    Linear,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Gaussian,
    Poisson,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate coincidence counts for the 36-setting plan.
    SimulateQst {
        /// `bell:<theta>`, `mixed`, `werner:<p>` or a density-matrix JSON file.
        #[arg(long)]
        state: String,
        /// QST noise model JSON.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Overrides `rng_seed` from the noise file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the expected pairs per setting (sets unit efficiencies).
        #[arg(long)]
        expected_pairs: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate stimulated idler powers for the 36-setting plan.
    SimulateSet {
        #[arg(long)]
        state: String,
        /// SET noise model JSON.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a density matrix from a record CSV.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "mle")]
        method: MethodArg,
        /// Bootstrap resamples; 0 disables the bootstrap.
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
        /// Bootstrap CSV path; defaults to `<out stem>_bootstrap.csv` beside `--out`.
        #[arg(long)]
        bootstrap_out: Option<PathBuf>,
        /// Fidelity reference for the bootstrap.
        #[arg(long, default_value = "bell:0")]
        target: String,
        /// SET noise model JSON supplying calibration, noise level and seed conjugation.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "gaussian")]
        objective: ObjectiveArg,
        /// Skip the Newton polish after the simplex search.
        #[arg(long)]
        no_refine: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report fidelity, concurrence, purity and relative phase.
    Metrics {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, default_value = "bell:0")]
        target: String,
        /// Bootstrap CSV whose standard deviations are attached.
        #[arg(long)]
        bootstrap: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Joint spectral intensity on a signal x idler grid.
    Jsi {
        #[arg(long)]
        crystal: Option<PathBuf>,
        /// `<signal points>x<idler points>`.
        #[arg(long, default_value = "256x256")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// SPDC idler marginal and DFG idler spectrum on a shared axis.
    Spectra {
        #[arg(long)]
        crystal: Option<PathBuf>,
        #[arg(long, default_value = "256x512")]
        grid: String,
        /// DFG seed wavelength in meters; defaults to the design signal.
        #[arg(long)]
        seed_wavelength: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectrally averaged versus seed-probed HH/VV phase.
    PhaseModel {
        #[arg(long, allow_hyphen_values = true)]
        theta0: f64,
        /// Radians per meter of idler wavelength.
        #[arg(long, allow_hyphen_values = true)]
        slope: f64,
        /// Meters.
        #[arg(long)]
        seed_wavelength: f64,
        #[arg(long)]
        crystal: Option<PathBuf>,
        #[arg(long, default_value = "256x512")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SimulateQst { .. } => "simulate-qst",
            Command::SimulateSet { .. } => "simulate-set",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Metrics { .. } => "metrics",
            Command::Jsi { .. } => "jsi",
            Command::Spectra { .. } => "spectra",
            Command::PhaseModel { .. } => "phase-model",
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::SimulateQst {
            state,
            noise,
            seed,
            expected_pairs,
            out,
        } => commands::simulate_qst(&state, noise.as_deref(), seed, expected_pairs, &out),
        Command::SimulateSet { state, noise, seed, out } => commands::simulate_set(&state, noise.as_deref(), seed, &out),
        Command::Reconstruct {
            input,
            method,
            bootstrap,
            bootstrap_out,
            target,
            noise,
            objective,
            no_refine,
            seed,
            out,
        } => commands::reconstruct(&commands::ReconstructArgs {
            input,
            method: match method {
                MethodArg::Mle => pairtomo::mle::Method::Mle,
                MethodArg::Linear => pairtomo::mle::Method::Linear,
            },
            bootstrap,
            bootstrap_out,
            target,
            noise,
            objective: match objective {
                ObjectiveArg::Gaussian => pairtomo::mle::Objective::GaussianLeastSquares,
                ObjectiveArg::Poisson => pairtomo::mle::Objective::Poisson,
            },
            refine: !no_refine,
            seed,
            out,
        }),
        Command::Metrics {
            rho,
            target,
            bootstrap,
            out,
        } => commands::metrics(&rho, &target, bootstrap.as_deref(), &out),
        Command::Jsi { crystal, grid, out } => commands::jsi(crystal.as_deref(), &grid, &out),
        Command::Spectra {
            crystal,
            grid,
            seed_wavelength,
            out,
        } => commands::spectra(crystal.as_deref(), &grid, seed_wavelength, &out),
        Command::PhaseModel {
            theta0,
            slope,
            seed_wavelength,
            crystal,
            grid,
            out,
        } => commands::phase_model(theta0, slope, seed_wavelength, crystal.as_deref(), &grid, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "command": name,
                "error": e.kind(),
                "message": e.to_string(),
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
