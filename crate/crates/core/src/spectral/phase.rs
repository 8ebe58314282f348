use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::spectrum::{trapezoid_weights, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::num::Real;

/// Linear idler-wavelength dependence of the HH/VV phase:
/// `θ(λi) = theta0 + slope (λi − reference_idler)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDispersionModel<T> {
    pub theta0: T,
    /// Radians per meter of idler wavelength.
    pub slope: T,
    pub reference_idler: T,
}

impl<T: Real> PhaseDispersionModel<T> {
    pub fn new(theta0: T, slope: T, reference_idler: T) -> Result<Self> {
        if !(theta0.is_finite() && slope.is_finite() && reference_idler.is_finite()) {
            return Err(invalid("phase model parameters must be finite"));
        }
        Ok(Self {
            theta0,
            slope,
            reference_idler,
        })
    }

    pub fn theta(&self, idler: T) -> T {
        self.theta0 + self.slope * (idler - self.reference_idler)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseComparison<T> {
    /// Intensity-weighted circular mean over the pair spectrum.
    pub theta_qst: T,
    /// Phase at the idler wavelength conjugate to the seed.
    pub theta_set: T,
    /// Idler wavelength conjugate to the seed.
    pub seed_idler: T,
}

/// Compares the spectrally averaged phase seen by coincidence tomography
/// with the single-wavelength phase probed by a monochromatic seed.
pub fn phase_comparison<T: Real>(
    model: &PhaseDispersionModel<T>,
    idler_spectrum: &Spectrum<T>,
    seed_wavelength: T,
    pump_center: T,
) -> Result<PhaseComparison<T>> {
    let weights = trapezoid_weights(&idler_spectrum.wavelengths);
    // θ0 factored out so a flat phase is reproduced exactly
    let sum = idler_spectrum
        .wavelengths
        .iter()
        .zip(&idler_spectrum.intensities)
        .zip(&weights)
        .fold(Complex::new(T::zero(), T::zero()), |acc, ((l, s), w)| {
            acc + Complex::from_polar(*w * *s, model.slope * (*l - model.reference_idler))
        });
    if !(sum.norm() > T::zero()) {
        return Err(Error::UndefinedAverage);
    }
    let inv = T::one() / pump_center - T::one() / seed_wavelength;
    if !(inv > T::zero()) {
        return Err(invalid("seed wavelength must exceed the pump wavelength"));
    }
    let seed_idler = T::one() / inv;
    Ok(PhaseComparison {
        theta_qst: model.theta0 + sum.im.atan2(sum.re),
        theta_set: model.theta(seed_idler),
        seed_idler,
    })
}
