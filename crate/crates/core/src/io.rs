//! File formats: measurement-record CSV, density-matrix and reconstruction
//! JSON, bootstrap and metrics CSV, spectra and JSI CSV, crystal configs.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::CMat4;
use crate::measurement::{MeasurementRecord, MeasurementSetting, ValueKind};
use crate::metrics::{concurrence, fidelity_to_pure, purity, relative_phase};
use crate::mle::{BootstrapStats, Method, ReconstructionResult};
use crate::num::Real;
use crate::spectral::{CrystalConfig, Dispersion, JsiGrid, Spectrum};
use crate::state::{DensityMatrix, BASIS_LABELS};

pub const RECORD_HEADER: [&str; 6] = [
    "setting_signal",
    "setting_idler",
    "value_kind",
    "value",
    "seed_power",
    "integration_time",
];

/// 17 significant digits.
fn num<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

fn opt_num<T: Real>(x: Option<T>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_records<T: Real, W: Write>(w: W, records: &[MeasurementRecord<T>]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(RECORD_HEADER).map_err(csv_err)?;
    for r in records {
        let value = match r.kind {
            ValueKind::Counts => format!("{}", r.value.to_f64_lossy()),
            ValueKind::Power => num(r.value),
        };
        out.write_record([
            r.setting.signal.label(),
            r.setting.idler.label(),
            r.kind.as_str(),
            &value,
            &opt_num(r.seed_power),
            &opt_num(r.integration_time),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn parse_field<T: Real>(field: &str, name: &str, line: usize) -> Result<Option<T>> {
    let f = field.trim();
    if f.is_empty() {
        return Ok(None);
    }
    let v: f64 = f.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name}: `{f}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{name}: `{f}` is not finite"),
        });
    }
    if v < 0.0 {
        return Err(Error::Parse {
            line,
            message: format!("{name}: negative value {v}"),
        });
    }
    Ok(Some(T::lit(v)))
}

/// Parses record CSV. Errors name the first offending line (the header is
/// line 1).
pub fn read_records<T: Real, R: Read>(r: R) -> Result<Vec<MeasurementRecord<T>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols != RECORD_HEADER {
        let missing: Vec<&str> = RECORD_HEADER.iter().copied().filter(|c| !cols.contains(c)).collect();
        return Err(Error::Parse {
            line: 1,
            message: if missing.is_empty() {
                format!("header must be `{}`", RECORD_HEADER.join(","))
            } else {
                format!("missing columns: {}", missing.join(","))
            },
        });
    }
    let mut records: Vec<MeasurementRecord<T>> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let perr = |message: String| Error::Parse { line, message };
        let signal = row[0].parse().map_err(|e: Error| perr(format!("setting_signal: {e}")))?;
        let idler = row[1].parse().map_err(|e: Error| perr(format!("setting_idler: {e}")))?;
        let setting = MeasurementSetting::new(signal, idler);
        let value: T = parse_field(&row[3], "value", line)?.ok_or_else(|| perr("value is empty".into()))?;
        let seed_power = parse_field(&row[4], "seed_power", line)?;
        let integration_time = parse_field(&row[5], "integration_time", line)?;
        let record = match row[2].trim() {
            "counts" => {
                if seed_power.is_some() {
                    return Err(perr("seed_power must be empty for counts".into()));
                }
                MeasurementRecord::counts(setting, value, integration_time)
            }
            "power" => {
                if integration_time.is_some() {
                    return Err(perr("integration_time must be empty for power".into()));
                }
                let seed = seed_power.ok_or_else(|| perr("power record without seed_power".into()))?;
                MeasurementRecord::power(setting, value, seed)
            }
            other => return Err(perr(format!("value_kind must be counts or power, got `{other}`"))),
        }
        .map_err(|e| perr(e.to_string()))?;
        if let Some(first) = records.first() {
            if first.kind != record.kind {
                return Err(perr(format!(
                    "value_kind {} mixed with {}",
                    record.kind.as_str(),
                    first.kind.as_str()
                )));
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        log::warn!("record file contains no rows");
    }
    Ok(records)
}

pub fn parse_records<T: Real>(path: &Path) -> Result<Vec<MeasurementRecord<T>>> {
    read_records(fs::File::open(path)?)
}

#[derive(Serialize, Deserialize)]
struct MatrixJson<T> {
    basis: Vec<String>,
    re: [[T; 4]; 4],
    im: [[T; 4]; 4],
}

impl<T: Real> MatrixJson<T> {
    fn from_rho(rho: &DensityMatrix<T>) -> Self {
        let m = rho.matrix();
        Self {
            basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            re: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].re)),
            im: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].im)),
        }
    }

    fn into_rho(self) -> Result<DensityMatrix<T>> {
        if self.basis != BASIS_LABELS {
            return Err(invalid(format!("basis must be {BASIS_LABELS:?}, got {:?}", self.basis)));
        }
        let m = CMat4::from_fn(|i, j| num_complex::Complex::new(self.re[i][j], self.im[i][j]));
        DensityMatrix::new(m)
    }
}

pub fn density_matrix_to_json<T: Real>(rho: &DensityMatrix<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixJson::from_rho(rho))?)
}

/// Accepts plain density-matrix JSON and reconstruction-result JSON.
pub fn density_matrix_from_json<T: Real>(text: &str) -> Result<DensityMatrix<T>> {
    serde_json::from_str::<MatrixJson<T>>(text)?.into_rho()
}

#[derive(Serialize, Deserialize)]
struct ResultJson<T> {
    #[serde(flatten)]
    matrix: MatrixJson<T>,
    objective: T,
    iterations: usize,
    converged: bool,
    method: Method,
}

pub fn reconstruction_to_json<T: Real>(result: &ReconstructionResult<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ResultJson {
        matrix: MatrixJson::from_rho(&result.rho),
        objective: result.objective_value,
        iterations: result.iterations,
        converged: result.converged,
        method: result.method,
    })?)
}

pub const BOOTSTRAP_HEADER: [&str; 5] = ["metric", "mean", "std_dev", "n_resamples", "skipped"];

pub fn write_bootstrap<T: Real, W: Write>(w: W, stats: &[BootstrapStats<T>]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(BOOTSTRAP_HEADER).map_err(csv_err)?;
    for s in stats {
        out.write_record([
            s.metric_name.clone(),
            num(s.mean),
            num(s.std_dev),
            s.n_resamples.to_string(),
            s.skipped.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_bootstrap<T: Real, R: Read>(r: R) -> Result<Vec<BootstrapStats<T>>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != BOOTSTRAP_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must be `{}`", BOOTSTRAP_HEADER.join(",")),
        });
    }
    reader
        .records()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
            let perr = |message: String| Error::Parse { line, message };
            let real = |k: usize| -> Result<T> {
                row[k]
                    .trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| perr(format!("{}: `{}` is not a number", BOOTSTRAP_HEADER[k], &row[k])))
            };
            let count = |k: usize| -> Result<usize> {
                row[k]
                    .trim()
                    .parse()
                    .map_err(|_| perr(format!("{}: `{}` is not a count", BOOTSTRAP_HEADER[k], &row[k])))
            };
            Ok(BootstrapStats {
                metric_name: row[0].trim().to_string(),
                mean: real(1)?,
                std_dev: real(2)?,
                n_resamples: count(3)?,
                skipped: count(4)?,
            })
        })
        .collect()
}

/// The four reported metrics with optional bootstrap standard deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport<T> {
    pub fidelity_to_target: T,
    pub concurrence: T,
    pub purity: T,
    /// `None` when the HH/VV coherence is below the floor.
    pub relative_phase: Option<T>,
    pub phase_note: Option<String>,
    pub std_devs: Vec<(String, T)>,
}

impl<T: Real> MetricsReport<T> {
    pub fn std_dev(&self, metric: &str) -> Option<T> {
        self.std_devs.iter().find(|(m, _)| m == metric).map(|(_, s)| *s)
    }
}

pub fn emit_metrics<T: Real>(
    rho: &DensityMatrix<T>,
    target: &DensityMatrix<T>,
    bootstrap: Option<&[BootstrapStats<T>]>,
) -> Result<MetricsReport<T>> {
    let (relative_phase, phase_note) = match relative_phase(rho) {
        Ok(p) => (Some(p), None),
        Err(e @ Error::UndefinedPhase { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(MetricsReport {
        fidelity_to_target: fidelity_to_pure(rho, target)?,
        concurrence: concurrence(rho),
        purity: purity(rho),
        relative_phase,
        phase_note,
        std_devs: bootstrap
            .unwrap_or_default()
            .iter()
            .map(|s| (s.metric_name.clone(), s.std_dev))
            .collect(),
    })
}

pub const METRICS_HEADER: [&str; 4] = ["metric", "value", "std_dev", "note"];

/// Rows for fidelity, concurrence, purity and relative_phase; an undefined
/// phase keeps its row with empty value and a note.
pub fn write_metrics<T: Real, W: Write>(w: W, report: &MetricsReport<T>) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(METRICS_HEADER).map_err(csv_err)?;
    let rows = [
        ("fidelity", Some(report.fidelity_to_target)),
        ("concurrence", Some(report.concurrence)),
        ("purity", Some(report.purity)),
        ("relative_phase", report.relative_phase),
    ];
    for (name, value) in rows {
        let note = if name == "relative_phase" {
            report.phase_note.clone().unwrap_or_default()
        } else {
            String::new()
        };
        let sd = if value.is_some() { report.std_dev(name) } else { None };
        out.write_record([name.to_string(), opt_num(value), opt_num(sd), note])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns sharing one wavelength axis, written as `<axis_name>,<col>...`
/// with wavelengths in nm.
pub fn write_spectra<T: Real, W: Write>(w: W, axis_name: &str, axis: &[T], columns: &[(&str, &[T])]) -> Result<()> {
    if columns.iter().any(|(_, c)| c.len() != axis.len()) {
        return Err(invalid("spectrum columns differ in length from the axis"));
    }
    let mut out = csv_writer(w);
    let mut header = vec![axis_name.to_string()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    out.write_record(&header).map_err(csv_err)?;
    for (k, l) in axis.iter().enumerate() {
        let mut row = vec![num(*l * T::lit(1e9))];
        row.extend(columns.iter().map(|(_, c)| num(c[k])));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_spectrum<T: Real, W: Write>(w: W, spectrum: &Spectrum<T>) -> Result<()> {
    write_spectra(w, "wavelength_nm", &spectrum.wavelengths, &[("intensity", &spectrum.intensities)])
}

/// Long format `signal_nm,idler_nm,intensity`, signal-major.
pub fn write_jsi<T: Real, W: Write>(w: W, grid: &JsiGrid<T>) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["signal_nm", "idler_nm", "intensity"]).map_err(csv_err)?;
    let nm = T::lit(1e9);
    for (s, ls) in grid.grid.signal_axis().iter().enumerate() {
        for (i, li) in grid.grid.idler_axis().iter().enumerate() {
            out.write_record([num(*ls * nm), num(*li * nm), num(grid.get(s, i))])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Loads a crystal config. A `"dispersion_file"` entry (relative to the
/// config's directory) replaces the inline `"dispersion"` object.
pub fn load_crystal_config<T: Real>(path: &Path) -> Result<CrystalConfig<T>> {
    let text = fs::read_to_string(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| invalid("crystal config must be a JSON object"))?;
    if let Some(file) = obj.remove("dispersion_file") {
        let rel = file
            .as_str()
            .ok_or_else(|| invalid("dispersion_file must be a string"))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let dispersion: Dispersion<T> = Dispersion::from_json(&fs::read_to_string(base.join(rel))?)?;
        obj.insert("dispersion".into(), serde_json::to_value(dispersion)?);
    }
    let config: CrystalConfig<T> = serde_json::from_value(value)?;
    config.validate()?;
    Ok(config)
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.partial", std::process::id()))
}

/// Writes through a sibling temporary file renamed into place on success,
/// so `path` never holds a partial file.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let tmp = temp_path(path);
    let outcome = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        write(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if outcome.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    outcome
}
