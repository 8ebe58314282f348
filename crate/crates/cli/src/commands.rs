use std::fs;
use std::path::{Path, PathBuf};

use pairtomo::io::{
    density_matrix_from_json, emit_metrics, load_crystal_config, parse_records, read_bootstrap, reconstruction_to_json,
    write_atomic, write_bootstrap, write_jsi, write_metrics, write_records, write_spectra,
};
use pairtomo::measurement::{simulate_qst as sim_qst, simulate_set as sim_set};
use pairtomo::mle::{bootstrap_fits, reconstruct as fit, summarize, Method, Metric, Objective};
use pairtomo::spectral::{self, calibrate_cut_angle, dfg_spectrum, phase_comparison, spdc_marginal, SpectralGrid};
use pairtomo::{
    build_plan, BootstrapOptions, CrystalConfig, FitOptions, PhaseDispersionModel, QstNoiseModel, SetNoiseModel,
};
use thiserror::Error;

use crate::presets::{parse_grid, parse_state};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pairtomo::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("input file {} does not exist", path.display())))
    }
}

fn check_output(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if path.file_name().is_none() || !parent.is_dir() {
        return Err(CliError::Usage(format!("cannot write {}: no such directory", path.display())));
    }
    if path.is_dir() {
        return Err(CliError::Usage(format!("output {} is a directory", path.display())));
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?).map_err(pairtomo::Error::from)?)
}

fn crystal(path: Option<&Path>) -> Result<CrystalConfig> {
    let mut config = match path {
        Some(p) => {
            check_input(p)?;
            load_crystal_config(p)?
        }
        None => CrystalConfig::default(),
    };
    calibrate_cut_angle(&mut config)?;
    Ok(config)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn simulate_qst(state: &str, noise: Option<&Path>, seed: Option<u64>, expected_pairs: Option<f64>, out: &Path) -> Result<()> {
    check_output(out)?;
    let rho = parse_state(state)?;
    let mut model: QstNoiseModel = match noise {
        Some(p) => read_json(p)?,
        None => QstNoiseModel::default(),
    };
    if let Some(s) = seed {
        model.rng_seed = s;
    }
    if let Some(n) = expected_pairs {
        model.pair_rate = n / (model.integration_time * model.efficiency_signal * model.efficiency_idler);
    }
    let records = sim_qst(&rho, &build_plan(), &model)?;
    write_atomic(out, |w| write_records(w, &records))?;
    Ok(())
}

pub fn simulate_set(state: &str, noise: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    check_output(out)?;
    let rho = parse_state(state)?;
    let mut model: SetNoiseModel = match noise {
        Some(p) => read_json(p)?,
        None => SetNoiseModel::default(),
    };
    if let Some(s) = seed {
        model.rng_seed = s;
    }
    let records = sim_set(&rho, &build_plan(), &model)?;
    write_atomic(out, |w| write_records(w, &records))?;
    Ok(())
}

pub struct ReconstructArgs {
    pub input: PathBuf,
    pub method: Method,
    pub bootstrap: usize,
    pub bootstrap_out: Option<PathBuf>,
    pub target: String,
    pub noise: Option<PathBuf>,
    pub objective: Objective,
    pub refine: bool,
    pub seed: u64,
    pub out: PathBuf,
}

fn default_bootstrap_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_bootstrap.csv"))
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    check_input(&args.input)?;
    check_output(&args.out)?;
    let bootstrap_out = (args.bootstrap > 0).then(|| {
        args.bootstrap_out
            .clone()
            .unwrap_or_else(|| default_bootstrap_path(&args.out))
    });
    if let Some(p) = &bootstrap_out {
        check_output(p)?;
    }
    if args.bootstrap == 1 {
        return Err(CliError::Usage("--bootstrap needs at least 2 resamples".into()));
    }
    let records = parse_records(&args.input)?;
    if records.is_empty() {
        return Err(CliError::Usage(format!("{} contains no records", args.input.display())));
    }

    let mut options = FitOptions {
        objective: args.objective,
        refine: args.refine,
        ..FitOptions::default()
    };
    if let Some(p) = &args.noise {
        let model: SetNoiseModel = read_json(p)?;
        model.validate()?;
        options.calibration = model.calibration();
        options.power_noise_rel = model.detector_noise_rel;
        options.seed_conjugation = model.seed_conjugation;
    }
    let result = fit(&records, args.method, &options)?;
    if !result.converged {
        log::warn!("fit stopped on the evaluation budget");
    }

    let stats = match &bootstrap_out {
        Some(_) => {
            let opts = BootstrapOptions {
                rng_seed: args.seed,
                target: parse_state(&args.target)?,
                power_noise_rel: options.power_noise_rel,
                fit: options.clone(),
            };
            let fits = bootstrap_fits(&records, args.bootstrap, &opts)?;
            let mut stats = Vec::new();
            for m in Metric::ALL {
                match summarize(&fits, m, &opts.target) {
                    Ok(s) => stats.push(s),
                    Err(e @ pairtomo::Error::UnstableMetric { .. }) => log::warn!("{e}; omitted from bootstrap output"),
                    Err(e) => return Err(e.into()),
                }
            }
            Some(stats)
        }
        None => None,
    };

    let json = reconstruction_to_json(&result)?;
    write_atomic(&args.out, |w| Ok(w.write_all(json.as_bytes())?))?;
    if let (Some(path), Some(stats)) = (&bootstrap_out, &stats) {
        if let Err(e) = write_atomic(path, |w| write_bootstrap(w, stats)) {
            let _ = fs::remove_file(&args.out);
            return Err(e.into());
        }
    }
    Ok(())
}

pub fn metrics(rho: &Path, target: &str, bootstrap: Option<&Path>, out: &Path) -> Result<()> {
    check_input(rho)?;
    check_output(out)?;
    let state = density_matrix_from_json(&fs::read_to_string(rho)?)?;
    let target = parse_state(target)?;
    let stats = match bootstrap {
        Some(p) => {
            check_input(p)?;
            Some(read_bootstrap(fs::File::open(p)?)?)
        }
        None => None,
    };
    let report = emit_metrics(&state, &target, stats.as_deref())?;
    write_atomic(out, |w| write_metrics(w, &report))?;
    Ok(())
}

pub fn jsi(crystal_path: Option<&Path>, grid: &str, out: &Path) -> Result<()> {
    check_output(out)?;
    let (n_s, n_i) = parse_grid(grid)?;
    let config = crystal(crystal_path)?;
    let grid = SpectralGrid::around_design(&config, n_s, n_i)?;
    let values = spectral::jsi(&config, &grid)?;
    write_atomic(out, |w| write_jsi(w, &values))?;
    Ok(())
}

pub fn spectra(crystal_path: Option<&Path>, grid: &str, seed: Option<f64>, out: &Path) -> Result<()> {
    check_output(out)?;
    let (n_s, n_i) = parse_grid(grid)?;
    let config = crystal(crystal_path)?;
    let grid = SpectralGrid::around_design(&config, n_s, n_i)?;
    let spdc = spdc_marginal(&spectral::jsi(&config, &grid)?);
    let dfg = dfg_spectrum(&config, seed.unwrap_or(config.design_signal), grid.idler_axis())?;
    write_atomic(out, |w| {
        write_spectra(
            w,
            "idler_nm",
            grid.idler_axis(),
            &[("spdc", &spdc.intensities), ("dfg", &dfg.intensities)],
        )
    })?;
    Ok(())
}

pub fn phase_model(theta0: f64, slope: f64, seed: f64, crystal_path: Option<&Path>, grid: &str, out: &Path) -> Result<()> {
    check_output(out)?;
    let (n_s, n_i) = parse_grid(grid)?;
    let config = crystal(crystal_path)?;
    let grid = SpectralGrid::around_design(&config, n_s, n_i)?;
    let spdc = spdc_marginal(&spectral::jsi(&config, &grid)?);
    let model = PhaseDispersionModel::new(theta0, slope, config.design_idler)?;
    let r = phase_comparison(&model, &spdc, seed, config.pump_center)?;
    let text = format!(
        "quantity,value\ntheta_qst,{}\ntheta_set,{}\ntheta_difference,{}\nseed_idler_nm,{}\n",
        num(r.theta_qst),
        num(r.theta_set),
        num(r.theta_qst - r.theta_set),
        num(r.seed_idler * 1e9)
    );
    write_atomic(out, |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(())
}
