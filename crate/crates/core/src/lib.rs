//! Simulation and reconstruction toolkit for frequency non-degenerate
//! polarization-entangled photon pairs.
//!
//! * [`state`] and [`metrics`]: two-qubit states, projectors, fidelity,
//!   concurrence, purity and the HH/VV relative phase.
//! * [`measurement`]: the 36-setting plan and forward simulators for
//!   coincidence-counting tomography and stimulated-emission tomography.
//! * [`mle`]: linear inversion, Cholesky-parametrized maximum-likelihood
//!   reconstruction and parametric bootstrap.
//! * [`spectral`]: Sellmeier dispersion, type-I phase matching, joint
//!   spectral intensity, SPDC and DFG idler spectra, and the
//!   spectrally-averaged phase model.
//! * [`io`]: CSV and JSON file formats.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod mle;
pub mod num;
pub mod random;
pub mod rng;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use measurement::{build_plan, MeasurementSetting, ValueKind};
pub use num::Real;
pub use state::BasisState;

pub type JonesVector = state::JonesVector<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type DensityMatrix32 = state::DensityMatrix<f32>;
pub type TwoQubitOperator = state::TwoQubitOperator<f64>;
pub type MeasurementRecord = measurement::MeasurementRecord<f64>;
pub type QstNoiseModel = measurement::QstNoiseModel<f64>;
pub type SetNoiseModel = measurement::SetNoiseModel<f64>;
pub type PowerCalibration = measurement::PowerCalibration<f64>;
pub type TParams = mle::TParams<f64>;
pub type FitOptions = mle::FitOptions<f64>;
pub type ReconstructionResult = mle::ReconstructionResult<f64>;
pub type BootstrapOptions = mle::BootstrapOptions<f64>;
pub type BootstrapStats = mle::BootstrapStats<f64>;
pub type CrystalConfig = spectral::CrystalConfig<f64>;
pub type SpectralGrid = spectral::SpectralGrid<f64>;
pub type JsiGrid = spectral::JsiGrid<f64>;
pub type Spectrum = spectral::Spectrum<f64>;
pub type PhaseDispersionModel = spectral::PhaseDispersionModel<f64>;
