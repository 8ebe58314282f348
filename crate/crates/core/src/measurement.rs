//! The 36-setting measurement plan and forward simulators for both
//! channels: coincidence counting (QST) and stimulated idler power (SET).

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::num::Real;
use crate::rng;
use crate::state::{born_probability, product_ket, projector2q, BasisState, DensityMatrix, JonesVector, TwoQubitOperator};

/// Seed power at the reported operating point, watts.
pub const DEFAULT_SEED_POWER: f64 = 20e-3;
/// Stimulated idler power at the most probable setting of `bell_state(0)`, watts.
pub const DEFAULT_MAX_IDLER_POWER: f64 = 0.06e-9;
/// Watts out per watt of seed at unit Born probability: the maximum power is
/// reached at Born probability 1/2.
pub const DEFAULT_GAIN: f64 = DEFAULT_MAX_IDLER_POWER / (DEFAULT_SEED_POWER * 0.5);

/// One (signal-or-seed, idler-analysis) polarization pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub signal: BasisState,
    pub idler: BasisState,
}

impl MeasurementSetting {
    pub fn new(signal: BasisState, idler: BasisState) -> Self {
        Self { signal, idler }
    }

    /// Position in the row-major plan.
    pub fn plan_index(&self) -> usize {
        self.signal.index() * 6 + self.idler.index()
    }

    fn signal_jones<T: Real>(&self, seed_conjugation: bool) -> JonesVector<T> {
        let j = self.signal.jones::<T>();
        if seed_conjugation {
            j.conj()
        } else {
            j
        }
    }

    /// Projector for this setting; with `seed_conjugation` the seed's Jones
    /// vector is complex-conjugated before it enters the signal slot.
    pub fn projector<T: Real>(&self, seed_conjugation: bool) -> TwoQubitOperator<T> {
        projector2q(&self.signal_jones(seed_conjugation), &self.idler.jones())
    }

    /// Product ket whose outer product is [`Self::projector`].
    pub fn ket<T: Real>(&self, seed_conjugation: bool) -> [num_complex::Complex<T>; 4] {
        product_ket(&self.signal_jones(seed_conjugation), &self.idler.jones())
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.signal, self.idler)
    }
}

/// Cartesian product {H,V,D,A,R,L}², signal-major.
pub fn build_plan() -> Vec<MeasurementSetting> {
    BasisState::ALL
        .iter()
        .flat_map(|&s| BasisState::ALL.iter().map(move |&i| MeasurementSetting::new(s, i)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Counts,
    Power,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Counts => "counts",
            ValueKind::Power => "power",
        }
    }
}

/// One observed value: coincidence counts, or stimulated power in watts
/// together with the seed power that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRecord<T> {
    pub setting: MeasurementSetting,
    pub value: T,
    pub kind: ValueKind,
    pub seed_power: Option<T>,
    pub integration_time: Option<T>,
}

impl<T: Real> MeasurementRecord<T> {
    pub fn counts(setting: MeasurementSetting, counts: T, integration_time: Option<T>) -> Result<Self> {
        if !(counts >= T::zero()) || counts.fract() != T::zero() || !counts.is_finite() {
            return Err(invalid(format!("counts must be a nonnegative integer, got {counts}")));
        }
        if let Some(t) = integration_time {
            if !(t > T::zero()) {
                return Err(invalid(format!("integration time must be positive, got {t}")));
            }
        }
        Ok(Self {
            setting,
            value: counts,
            kind: ValueKind::Counts,
            seed_power: None,
            integration_time,
        })
    }

    pub fn power(setting: MeasurementSetting, power: T, seed_power: T) -> Result<Self> {
        if !(power >= T::zero()) || !power.is_finite() {
            return Err(invalid(format!("power must be nonnegative, got {power}")));
        }
        if !(seed_power > T::zero()) || !seed_power.is_finite() {
            return Err(invalid(format!("seed power must be positive, got {seed_power}")));
        }
        Ok(Self {
            setting,
            value: power,
            kind: ValueKind::Power,
            seed_power: Some(seed_power),
            integration_time: None,
        })
    }
}

/// Poisson coincidence model with dark coincidences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QstNoiseModel<T> {
    /// Pairs per second.
    pub pair_rate: T,
    /// Seconds per setting.
    pub integration_time: T,
    pub efficiency_signal: T,
    pub efficiency_idler: T,
    /// Accidental coincidences per second.
    pub dark_coincidence_rate: T,
    pub rng_seed: u64,
}

impl<T: Real> Default for QstNoiseModel<T> {
    fn default() -> Self {
        // 1e4 detected pairs per setting at unit Born probability
        Self {
            pair_rate: T::lit(2e5),
            integration_time: T::one(),
            efficiency_signal: T::lit(0.5),
            efficiency_idler: T::lit(0.1),
            dark_coincidence_rate: T::zero(),
            rng_seed: 0,
        }
    }
}

impl<T: Real> QstNoiseModel<T> {
    /// Model with `expected_pairs` detected pairs per setting at unit Born
    /// probability and no dark counts.
    pub fn with_expected_pairs(expected_pairs: T, rng_seed: u64) -> Self {
        Self {
            pair_rate: expected_pairs,
            integration_time: T::one(),
            efficiency_signal: T::one(),
            efficiency_idler: T::one(),
            dark_coincidence_rate: T::zero(),
            rng_seed,
        }
    }

    /// Detected pairs per setting at unit Born probability.
    pub fn expected_pairs(&self) -> T {
        self.pair_rate * self.integration_time * self.efficiency_signal * self.efficiency_idler
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate > T::zero()) || !(self.integration_time > T::zero()) {
            return Err(invalid("QST pair rate and integration time must be positive"));
        }
        for (name, eta) in [("signal", self.efficiency_signal), ("idler", self.efficiency_idler)] {
            if !(eta > T::zero() && eta <= T::one()) {
                return Err(invalid(format!("{name} efficiency must lie in (0, 1], got {eta}")));
            }
        }
        if !(self.dark_coincidence_rate >= T::zero()) {
            return Err(invalid("dark coincidence rate must be nonnegative"));
        }
        Ok(())
    }
}

/// Stimulated-power model: seed jitter, multiplicative detector noise and an
/// additive floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetNoiseModel<T> {
    /// Watts out per watt of seed at unit Born probability.
    pub gain: T,
    pub seed_power_nominal: T,
    pub seed_power_jitter_rel: T,
    pub detector_noise_rel: T,
    pub detector_floor: T,
    pub rng_seed: u64,
    pub seed_conjugation: bool,
}

impl<T: Real> Default for SetNoiseModel<T> {
    fn default() -> Self {
        Self {
            gain: T::lit(DEFAULT_GAIN),
            seed_power_nominal: T::lit(DEFAULT_SEED_POWER),
            seed_power_jitter_rel: T::lit(0.005),
            detector_noise_rel: T::lit(0.01),
            detector_floor: T::zero(),
            rng_seed: 0,
            seed_conjugation: false,
        }
    }
}

impl<T: Real> SetNoiseModel<T> {
    pub fn noiseless() -> Self {
        Self {
            seed_power_jitter_rel: T::zero(),
            detector_noise_rel: T::zero(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > T::zero()) || !(self.seed_power_nominal > T::zero()) {
            return Err(invalid("SET gain and nominal seed power must be positive"));
        }
        let half = T::lit(0.5);
        for (name, x) in [
            ("seed_power_jitter_rel", self.seed_power_jitter_rel),
            ("detector_noise_rel", self.detector_noise_rel),
        ] {
            if !(x >= T::zero() && x < half) {
                return Err(invalid(format!("{name} must lie in [0, 0.5), got {x}")));
            }
        }
        if !(self.detector_floor >= T::zero()) {
            return Err(invalid("detector floor must be nonnegative"));
        }
        Ok(())
    }

    pub fn calibration(&self) -> PowerCalibration<T> {
        PowerCalibration {
            gain: self.gain,
            detector_floor: self.detector_floor,
        }
    }
}

fn check_state<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    DensityMatrix::new(*rho.matrix()).map(|_| ())
}

/// Simulated coincidence counts, one Poisson draw per setting.
pub fn simulate_qst<T: Real>(
    rho: &DensityMatrix<T>,
    plan: &[MeasurementSetting],
    noise: &QstNoiseModel<T>,
) -> Result<Vec<MeasurementRecord<T>>> {
    noise.validate()?;
    check_state(rho)?;
    let pairs = noise.expected_pairs().to_f64_lossy();
    let dark = (noise.dark_coincidence_rate * noise.integration_time).to_f64_lossy();
    plan.iter()
        .enumerate()
        .map(|(k, setting)| {
            let p = born_probability(rho, &setting.projector(false)).to_f64_lossy();
            let mean = pairs * p + dark;
            let mut rng = rng::stream(noise.rng_seed, "simulate-qst", k as u64);
            let counts = sample_poisson(&mut rng, mean);
            MeasurementRecord::counts(*setting, T::lit(counts), Some(noise.integration_time))
        })
        .collect()
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng).round(),
        Err(_) => mean.round(),
    }
}

pub(crate) fn sample_normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).map(|d| d.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}

/// Simulated stimulated idler powers, each record carrying its sampled
/// seed power.
pub fn simulate_set<T: Real>(
    rho: &DensityMatrix<T>,
    plan: &[MeasurementSetting],
    noise: &SetNoiseModel<T>,
) -> Result<Vec<MeasurementRecord<T>>> {
    noise.validate()?;
    check_state(rho)?;
    plan.iter()
        .enumerate()
        .map(|(k, setting)| {
            let mut rng = rng::stream(noise.rng_seed, "simulate-set", k as u64);
            let jitter = sample_normal(&mut rng, noise.seed_power_jitter_rel.to_f64_lossy());
            let seed_power = noise.seed_power_nominal * T::lit((1.0 + jitter).max(1e-6));
            let p = born_probability(rho, &setting.projector(noise.seed_conjugation));
            let expected = noise.gain * seed_power * p;
            let eps = sample_normal(&mut rng, noise.detector_noise_rel.to_f64_lossy());
            let value = (expected * T::lit(1.0 + eps) + noise.detector_floor).max(T::zero());
            MeasurementRecord::power(*setting, value, seed_power)
        })
        .collect()
}

/// Converts stimulated powers back into Born-probability estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerCalibration<T> {
    pub gain: T,
    pub detector_floor: T,
}

impl<T: Real> Default for PowerCalibration<T> {
    fn default() -> Self {
        Self {
            gain: T::lit(DEFAULT_GAIN),
            detector_floor: T::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedRecord<T> {
    pub setting: MeasurementSetting,
    pub kind: ValueKind,
    /// Counts for QST; an estimate of `Tr(rho Π)` for SET.
    pub value: T,
    /// Inverse variance estimate: `1/max(counts, 1)` for counts, uniform for powers.
    pub weight: T,
}

/// Per-record normalization, preserving order.
pub fn normalize_records<T: Real>(
    records: &[MeasurementRecord<T>],
    calibration: &PowerCalibration<T>,
) -> Result<Vec<NormalizedRecord<T>>> {
    let first = records
        .first()
        .ok_or_else(|| invalid("normalize_records: no records"))?;
    if records.iter().any(|r| r.kind != first.kind) {
        return Err(invalid("normalize_records: records mix counts and powers"));
    }
    if !(calibration.gain > T::zero()) {
        return Err(invalid("power calibration gain must be positive"));
    }
    records
        .iter()
        .map(|r| match r.kind {
            ValueKind::Counts => Ok(NormalizedRecord {
                setting: r.setting,
                kind: r.kind,
                value: r.value,
                weight: T::one() / r.value.max(T::one()),
            }),
            ValueKind::Power => {
                let seed = r.seed_power.unwrap_or(T::zero());
                if !(seed > T::zero()) {
                    return Err(invalid(format!(
                        "power record {} has non-positive seed power",
                        r.setting
                    )));
                }
                Ok(NormalizedRecord {
                    setting: r.setting,
                    kind: r.kind,
                    value: (r.value - calibration.detector_floor) / (calibration.gain * seed),
                    weight: T::one(),
                })
            }
        })
        .collect()
}
