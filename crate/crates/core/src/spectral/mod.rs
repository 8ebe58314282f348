//! Birefringent dispersion, collinear type-I phase matching and the
//! spectra derived from it.
//!
//! All wavelengths are in meters. Sellmeier coefficients are data: the
//! default set ships in `data/mgo_ln_5pct_zelmon.json` and any other set in
//! the same JSON shape can be substituted.

mod jsi;
mod phase;
mod spectrum;

use serde::{Deserialize, Serialize};

pub use jsi::{dfg_spectrum, jsi, spdc_marginal, JsiGrid, SpectralGrid};
pub use phase::{phase_comparison, PhaseComparison, PhaseDispersionModel};
pub use spectrum::{fwhm, Spectrum};

use crate::error::{invalid, Error, Result};
use crate::num::Real;

const DEFAULT_DISPERSION: &str = include_str!("../../data/mgo_ln_5pct_zelmon.json");

/// Sellmeier coefficient set for one uniaxial crystal.
///
/// Form `"sellmeier"`: `n² = 1 + Σ_k A_k λ² / (λ² − B_k)` with λ in µm and
/// the coefficients listed as `[A_1, B_1, A_2, B_2, ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dispersion<T> {
    pub form: String,
    pub ordinary: Vec<T>,
    pub extraordinary: Vec<T>,
    pub validity_window_nm: [T; 2],
    #[serde(default)]
    pub source: String,
}

impl<T: Real> Dispersion<T> {
    /// 5% MgO:LiNbO₃ at room temperature.
    pub fn mgo_linbo3() -> Self {
        serde_json::from_str(DEFAULT_DISPERSION).expect("shipped dispersion file parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.form != "sellmeier" {
            return Err(invalid(format!("unsupported dispersion form {:?}", self.form)));
        }
        for (name, c) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
            if c.is_empty() || c.len() % 2 != 0 || c.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!(
                    "{name} coefficients must be a non-empty list of finite (A, B) pairs"
                )));
            }
        }
        let [lo, hi] = self.validity_window_nm;
        if !(lo > T::zero() && hi > lo) {
            return Err(invalid("validity_window_nm must be [min, max] with 0 < min < max"));
        }
        Ok(())
    }

    fn check_window(&self, wavelength: T) -> Result<()> {
        let nm = wavelength * T::lit(1e9);
        let [lo, hi] = self.validity_window_nm;
        if nm >= lo && nm <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                wavelength_nm: nm.to_f64_lossy(),
                min_nm: lo.to_f64_lossy(),
                max_nm: hi.to_f64_lossy(),
            })
        }
    }

    fn index_squared(coeffs: &[T], wavelength: T) -> T {
        let um2 = (wavelength * T::lit(1e6)).powi(2);
        coeffs
            .chunks_exact(2)
            .fold(T::one(), |acc, ab| acc + ab[0] * um2 / (um2 - ab[1]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Polarization<T> {
    Ordinary,
    /// Extraordinary wave propagating at `angle` (radians) to the optic axis.
    ExtraordinaryAt(T),
}

/// Crystal and design-point parameters. Lengths and wavelengths in meters,
/// angles in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrystalConfig<T> {
    pub length: T,
    pub cut_angle: T,
    pub pump_center: T,
    pub design_signal: T,
    pub design_idler: T,
    /// Pump intensity FWHM in wavelength.
    pub pump_fwhm: T,
    pub dispersion: Dispersion<T>,
}

impl<T: Real> Default for CrystalConfig<T> {
    fn default() -> Self {
        let signal = T::lit(810e-9);
        let idler = T::lit(1550e-9);
        Self {
            length: T::lit(2e-3),
            cut_angle: T::lit(68.0).to_radians(),
            pump_center: T::one() / (T::one() / signal + T::one() / idler),
            design_signal: signal,
            design_idler: idler,
            pump_fwhm: T::lit(0.1e-9),
            dispersion: Dispersion::mgo_linbo3(),
        }
    }
}

impl<T: Real> CrystalConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > T::zero() && self.length.is_finite()) {
            return Err(invalid("crystal length must be positive"));
        }
        if !(self.cut_angle > T::zero() && self.cut_angle < T::FRAC_PI_2()) {
            return Err(invalid("cut_angle must lie in (0, pi/2)"));
        }
        for (name, v) in [
            ("pump_center", self.pump_center),
            ("design_signal", self.design_signal),
            ("design_idler", self.design_idler),
            ("pump_fwhm", self.pump_fwhm),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        let implied = T::one() / self.design_signal + T::one() / self.design_idler;
        let rel = ((T::one() / self.pump_center - implied) / implied).abs();
        if rel > T::lit(1e-4) {
            return Err(invalid(format!(
                "pump_center violates energy conservation with the design wavelengths (relative error {rel})"
            )));
        }
        self.dispersion.validate()
    }

    /// Pump wavelength fixed by energy conservation.
    pub fn pump_for(&self, lambda_s: T, lambda_i: T) -> T {
        T::one() / (T::one() / lambda_s + T::one() / lambda_i)
    }
}

pub fn refractive_index<T: Real>(config: &CrystalConfig<T>, wavelength: T, polarization: Polarization<T>) -> Result<T> {
    let d = &config.dispersion;
    d.check_window(wavelength)?;
    let no2 = Dispersion::index_squared(&d.ordinary, wavelength);
    match polarization {
        Polarization::Ordinary => Ok(no2.sqrt()),
        Polarization::ExtraordinaryAt(angle) => {
            let ne2 = Dispersion::index_squared(&d.extraordinary, wavelength);
            let (s, c) = angle.sin_cos();
            Ok((T::one() / (c * c / no2 + s * s / ne2)).sqrt())
        }
    }
}

fn delta_k_at<T: Real>(config: &CrystalConfig<T>, lambda_s: T, lambda_i: T, angle: T) -> Result<T> {
    let lambda_p = config.pump_for(lambda_s, lambda_i);
    let n_p = refractive_index(config, lambda_p, Polarization::ExtraordinaryAt(angle))?;
    let n_s = refractive_index(config, lambda_s, Polarization::Ordinary)?;
    let n_i = refractive_index(config, lambda_i, Polarization::Ordinary)?;
    Ok(T::TAU() * (n_p / lambda_p - n_s / lambda_s - n_i / lambda_i))
}

/// `k_p − k_s − k_i` for e → o + o at the configured cut angle, with the
/// pump wavelength set by energy conservation.
pub fn delta_k<T: Real>(config: &CrystalConfig<T>, lambda_s: T, lambda_i: T) -> Result<T> {
    delta_k_at(config, lambda_s, lambda_i, config.cut_angle)
}

/// Bisects for the angle that phase-matches the design wavelengths within
/// ±10° of the current cut angle and stores it in `config`.
pub fn calibrate_cut_angle<T: Real>(config: &mut CrystalConfig<T>) -> Result<T> {
    let half = T::lit(10.0).to_radians();
    let eps = T::lit(1e-9);
    let mut lo = (config.cut_angle - half).max(eps);
    let mut hi = (config.cut_angle + half).min(T::FRAC_PI_2() - eps);
    let (s, i) = (config.design_signal, config.design_idler);
    let f = |a: T| delta_k_at(config, s, i, a);
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == T::zero() {
        hi = lo;
    } else if f_hi == T::zero() {
        lo = hi;
    } else if f_lo.signum() == f_hi.signum() {
        return Err(Error::CalibrationFailure(format!(
            "delta_k has no sign change for cut angles in [{}, {}] deg",
            lo.to_degrees(),
            hi.to_degrees()
        )));
    }
    let tol = T::lit(1e-10);
    while hi - lo > tol {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == T::zero() {
            lo = mid;
            hi = mid;
        } else if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let angle = lo + (hi - lo) / T::lit(2.0);
    config.cut_angle = angle;
    Ok(angle)
}

/// `sin(x)/x`, with the Taylor value near zero.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibrated() -> CrystalConfig<f64> {
        let mut c = CrystalConfig::default();
        calibrate_cut_angle(&mut c).unwrap();
        c
    }

    #[test]
    fn default_config_is_valid() {
        CrystalConfig::<f64>::default().validate().unwrap();
        CrystalConfig::<f32>::default().validate().unwrap();
    }

    #[test]
    fn index_ellipsoid_limits() {
        let c = CrystalConfig::<f64>::default();
        for wl in [0.5e-6, 0.81e-6, 1.55e-6] {
            let no = refractive_index(&c, wl, Polarization::Ordinary).unwrap();
            let at0 = refractive_index(&c, wl, Polarization::ExtraordinaryAt(0.0)).unwrap();
            let ne = (Dispersion::index_squared(&c.dispersion.extraordinary, wl)).sqrt();
            let at90 = refractive_index(&c, wl, Polarization::ExtraordinaryAt(std::f64::consts::FRAC_PI_2)).unwrap();
            assert!((no - at0).abs() < 1e-12);
            assert!((ne - at90).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_window() {
        let c = CrystalConfig::<f64>::default();
        assert!(matches!(
            refractive_index(&c, 300e-9, Polarization::Ordinary),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(delta_k(&c, 810e-9, 6000e-9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn calibration_zeroes_delta_k() {
        let mut c = calibrated();
        let lp = c.pump_for(810e-9, 1550e-9);
        assert!((lp * 1e9 - 531.99).abs() < 0.01);
        let dk = delta_k(&c, 810e-9, 1550e-9).unwrap();
        assert!(dk.abs() < 1e-6 * std::f64::consts::TAU / lp);
        let first = c.cut_angle;
        let again = calibrate_cut_angle(&mut c).unwrap();
        assert!((again - first).abs() < 1e-10);
        let deg = first.to_degrees();
        assert!((58.0..=78.0).contains(&deg), "{deg}");
    }

    #[test]
    fn calibration_without_root_fails() {
        let mut c = CrystalConfig::<f64> {
            cut_angle: 20f64.to_radians(),
            ..CrystalConfig::default()
        };
        assert!(matches!(calibrate_cut_angle(&mut c), Err(Error::CalibrationFailure(_))));
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0f64), 1.0);
        assert!((sinc(1e-9f64) - 1.0).abs() < 1e-17);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-16);
        assert!((sinc(0.5f64) - 0.5f64.sin() / 0.5).abs() < 1e-16);
    }

    #[test]
    fn invalid_configs() {
        let c = CrystalConfig::<f64> {
            pump_center: 540e-9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = CrystalConfig::<f64> {
            length: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let mut c = CrystalConfig::<f64>::default();
        c.dispersion.ordinary.pop();
        assert!(c.validate().is_err());
    }
}
