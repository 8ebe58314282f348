use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::num::Real;

/// Intensity samples over a strictly increasing wavelength axis (meters).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub wavelengths: Vec<T>,
    pub intensities: Vec<T>,
    /// False when the spectrum is identically zero and was left unscaled.
    pub normalized: bool,
}

impl<T: Real> Spectrum<T> {
    /// Validates the axis and scales the peak to 1.
    pub fn new(wavelengths: Vec<T>, intensities: Vec<T>) -> Result<Self> {
        if wavelengths.len() != intensities.len() {
            return Err(invalid("wavelength and intensity arrays differ in length"));
        }
        if wavelengths.len() < 2 || wavelengths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("wavelength axis must be strictly increasing with at least 2 points"));
        }
        if intensities.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(invalid("intensities must be finite and non-negative"));
        }
        Ok(Self::peak_normalized(wavelengths, intensities))
    }

    pub(crate) fn peak_normalized(wavelengths: Vec<T>, mut intensities: Vec<T>) -> Self {
        let peak = intensities.iter().fold(T::zero(), |m, v| m.max(*v));
        let normalized = peak > T::zero();
        if normalized {
            intensities.iter_mut().for_each(|v| *v = *v / peak);
        }
        Self {
            wavelengths,
            intensities,
            normalized,
        }
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    /// Wavelength of the first global maximum.
    pub fn peak_wavelength(&self) -> T {
        self.wavelengths[argmax(&self.intensities)]
    }
}

pub(crate) fn argmax<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Trapezoid quadrature weights for a (possibly non-uniform) axis.
pub(crate) fn trapezoid_weights<T: Real>(axis: &[T]) -> Vec<T> {
    let n = axis.len();
    let half = T::lit(0.5);
    (0..n)
        .map(|k| {
            let left = if k > 0 { axis[k] - axis[k - 1] } else { T::zero() };
            let right = if k + 1 < n { axis[k + 1] - axis[k] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

/// Full width between the outermost half-maximum crossings, linearly
/// interpolated.
pub fn fwhm<T: Real>(spectrum: &Spectrum<T>) -> Result<T> {
    let x = &spectrum.wavelengths;
    let y = &spectrum.intensities;
    let peak = argmax(y);
    let half = y[peak] / T::lit(2.0);
    if !(half > T::zero()) {
        return Err(Error::UnresolvedWidth("spectrum is identically zero".into()));
    }
    let left = (0..=peak)
        .find(|&k| y[k] >= half)
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::UnresolvedWidth("no half-maximum crossing below the peak".into()))?;
    let right = (peak..y.len())
        .rev()
        .find(|&k| y[k] >= half)
        .filter(|&k| k + 1 < y.len())
        .ok_or_else(|| Error::UnresolvedWidth("no half-maximum crossing above the peak".into()))?;
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    Ok(cross(right, right + 1) - cross(left - 1, left))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn gaussian_fwhm() {
        let sigma = 1.3;
        let x = axis(4001, -10.0, 10.0);
        let step = x[1] - x[0];
        let y = x.iter().map(|v| (-v * v / (2.0 * sigma * sigma)).exp()).collect();
        let s = Spectrum::new(x, y).unwrap();
        let expected = 2.0 * (2.0f64 * 2f64.ln()).sqrt() * sigma;
        assert!((fwhm(&s).unwrap() - expected).abs() < 0.005 * step);
    }

    #[test]
    fn triangle_fwhm() {
        let w = 4.0;
        let x = axis(101, -5.0, 5.0);
        let y = x.iter().map(|v| (1.0 - 2.0 * v.abs() / w).max(0.0)).collect();
        let s = Spectrum::new(x, y).unwrap();
        assert!((fwhm(&s).unwrap() - w / 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_is_unresolved() {
        let x = axis(50, 0.0, 1.0);
        let y = x.clone();
        let s = Spectrum::new(x, y).unwrap();
        assert!(matches!(fwhm(&s), Err(Error::UnresolvedWidth(_))));
    }

    #[test]
    fn zero_spectrum_is_flagged() {
        let s = Spectrum::new(axis(5, 0.0, 1.0), vec![0.0; 5]).unwrap();
        assert!(!s.normalized);
        assert!(s.intensities.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_bad_axis() {
        assert!(Spectrum::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 2.0], vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn trapezoid_weights_integrate_linear() {
        let x = vec![0.0, 0.5, 2.0, 3.0];
        let w = trapezoid_weights(&x);
        let integral: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum();
        assert!((integral - 4.5).abs() < 1e-15);
    }
}
