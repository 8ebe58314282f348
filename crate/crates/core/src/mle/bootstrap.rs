//! Parametric bootstrap over measurement records.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mle_fit, FitOptions};
use crate::error::{invalid, Error, Result};
use crate::measurement::{sample_normal, sample_poisson, MeasurementRecord, ValueKind};
use crate::metrics::{concurrence, fidelity_mixed, purity, relative_phase};
use crate::num::Real;
use crate::rng::stream;
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Fidelity,
    Concurrence,
    Purity,
    RelativePhase,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Fidelity, Metric::Concurrence, Metric::Purity, Metric::RelativePhase];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Fidelity => "fidelity",
            Metric::Concurrence => "concurrence",
            Metric::Purity => "purity",
            Metric::RelativePhase => "relative_phase",
        }
    }

    /// `None` when the metric is undefined on `rho`.
    pub fn evaluate<T: Real>(self, rho: &DensityMatrix<T>, target: &DensityMatrix<T>) -> Option<T> {
        match self {
            Metric::Fidelity => Some(fidelity_mixed(rho, target)),
            Metric::Concurrence => Some(concurrence(rho)),
            Metric::Purity => Some(purity(rho)),
            Metric::RelativePhase => relative_phase(rho).ok(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fidelity" | "fidelity_to_target" => Ok(Metric::Fidelity),
            "concurrence" => Ok(Metric::Concurrence),
            "purity" => Ok(Metric::Purity),
            "relative_phase" | "phase" => Ok(Metric::RelativePhase),
            other => Err(invalid(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BootstrapOptions<T> {
    pub rng_seed: u64,
    /// Reference state for the fidelity metric.
    pub target: DensityMatrix<T>,
    /// Relative Gaussian noise applied to power records; 0 reproduces the data.
    pub power_noise_rel: T,
    pub fit: FitOptions<T>,
}

impl<T: Real> Default for BootstrapOptions<T> {
    fn default() -> Self {
        Self {
            rng_seed: 0,
            target: DensityMatrix::maximally_mixed(),
            power_noise_rel: T::lit(0.01),
            fit: FitOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapStats<T> {
    pub metric_name: String,
    pub mean: T,
    pub std_dev: T,
    /// Resamples that contributed a value.
    pub n_resamples: usize,
    pub skipped: usize,
}

fn resample<T: Real>(records: &[MeasurementRecord<T>], opts: &BootstrapOptions<T>, index: u64) -> Vec<MeasurementRecord<T>> {
    let mut rng = stream(opts.rng_seed, "bootstrap", index);
    let rel = opts.power_noise_rel.to_f64_lossy();
    records
        .iter()
        .map(|r| {
            let observed = r.value.to_f64_lossy();
            let value = match r.kind {
                ValueKind::Counts => sample_poisson(&mut rng, observed),
                ValueKind::Power => (observed + sample_normal(&mut rng, rel * observed)).max(0.0),
            };
            MeasurementRecord {
                value: T::lit(value),
                ..*r
            }
        })
        .collect()
}

/// Sample standard deviation computed on values shifted by the first one,
/// so identical samples give exactly zero.
fn mean_and_std<T: Real>(values: &[T]) -> (T, T) {
    let n = T::lit(values.len() as f64);
    let shift = values[0];
    let (s, s2) = values.iter().fold((T::zero(), T::zero()), |(s, s2), v| {
        let d = *v - shift;
        (s + d, s2 + d * d)
    });
    let mean = shift + s / n;
    let var = ((s2 - s * s / n) / (n - T::one())).max(T::zero());
    (mean, var.sqrt())
}

/// Refits `n_resamples` parametric resamples of `records`. Resample `b`
/// draws from its own stream, so the output does not depend on scheduling.
/// Failed fits are `None`.
pub fn bootstrap_fits<T: Real>(
    records: &[MeasurementRecord<T>],
    n_resamples: usize,
    opts: &BootstrapOptions<T>,
) -> Result<Vec<Option<DensityMatrix<T>>>> {
    if n_resamples < 2 {
        return Err(invalid(format!("bootstrap needs at least 2 resamples, got {n_resamples}")));
    }
    if !(opts.power_noise_rel >= T::zero()) {
        return Err(invalid("power_noise_rel must be non-negative"));
    }
    // surface plan and record errors once instead of per resample
    mle_fit(records, None, &FitOptions { max_evals: 1, ..opts.fit.clone() })?;

    Ok((0..n_resamples as u64)
        .into_par_iter()
        .map(|b| {
            let data = resample(records, opts, b);
            match mle_fit(&data, None, &opts.fit) {
                Ok(fit) => Some(fit.rho),
                Err(e) => {
                    log::warn!("bootstrap resample {b} failed: {e}");
                    None
                }
            }
        })
        .collect())
}

/// Mean and standard deviation of `metric` over refitted states; more than
/// half undefined is an error.
pub fn summarize<T: Real>(
    fits: &[Option<DensityMatrix<T>>],
    metric: Metric,
    target: &DensityMatrix<T>,
) -> Result<BootstrapStats<T>> {
    let values: Vec<T> = fits
        .iter()
        .filter_map(|rho| rho.as_ref().and_then(|r| metric.evaluate(r, target)))
        .collect();
    let total = fits.len();
    let skipped = total - values.len();
    if 2 * skipped > total || values.len() < 2 {
        return Err(Error::UnstableMetric {
            metric: metric.name().to_string(),
            skipped,
            total,
        });
    }
    let (mean, std_dev) = mean_and_std(&values);
    Ok(BootstrapStats {
        metric_name: metric.name().to_string(),
        mean,
        std_dev,
        n_resamples: values.len(),
        skipped,
    })
}

/// Parametric bootstrap: resample, refit, and summarize every metric.
pub fn bootstrap<T: Real>(
    records: &[MeasurementRecord<T>],
    n_resamples: usize,
    metrics: &[Metric],
    opts: &BootstrapOptions<T>,
) -> Result<Vec<BootstrapStats<T>>> {
    let fits = bootstrap_fits(records, n_resamples, opts)?;
    metrics.iter().map(|m| summarize(&fits, *m, &opts.target)).collect()
}
