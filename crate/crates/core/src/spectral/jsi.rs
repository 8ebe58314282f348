use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectrum::{argmax, trapezoid_weights, Spectrum};
use super::{refractive_index, sinc, CrystalConfig, Polarization};
use crate::error::{invalid, Result};
use crate::num::Real;

/// Default half-widths of the signal and idler axes around the design point.
pub const DEFAULT_SIGNAL_HALF_SPAN: f64 = 12e-9;
pub const DEFAULT_IDLER_HALF_SPAN: f64 = 40e-9;

/// Signal and idler wavelength axes (meters, strictly increasing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid<T> {
    signal_axis: Vec<T>,
    idler_axis: Vec<T>,
}

fn check_axis<T: Real>(name: &str, axis: &[T]) -> Result<()> {
    if axis.len() < 2 {
        return Err(invalid(format!("{name} axis needs at least 2 points")));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{name} axis must be finite and strictly increasing")));
    }
    Ok(())
}

impl<T: Real> SpectralGrid<T> {
    pub fn new(signal_axis: Vec<T>, idler_axis: Vec<T>) -> Result<Self> {
        check_axis("signal", &signal_axis)?;
        check_axis("idler", &idler_axis)?;
        Ok(Self { signal_axis, idler_axis })
    }

    /// `n` evenly spaced points on `[center − half_span, center + half_span]`.
    pub fn uniform_axis(center: T, half_span: T, n: usize) -> Vec<T> {
        let lo = center - half_span;
        let step = T::lit(2.0) * half_span / T::lit(n.saturating_sub(1).max(1) as f64);
        (0..n).map(|k| lo + step * T::lit(k as f64)).collect()
    }

    /// Default spans around the design wavelengths.
    pub fn around_design(config: &CrystalConfig<T>, n_signal: usize, n_idler: usize) -> Result<Self> {
        Self::new(
            Self::uniform_axis(config.design_signal, T::lit(DEFAULT_SIGNAL_HALF_SPAN), n_signal),
            Self::uniform_axis(config.design_idler, T::lit(DEFAULT_IDLER_HALF_SPAN), n_idler),
        )
    }

    pub fn signal_axis(&self) -> &[T] {
        &self.signal_axis
    }

    pub fn idler_axis(&self) -> &[T] {
        &self.idler_axis
    }
}

/// JSI samples; `values[s * n_idler + i]` belongs to `(signal[s], idler[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct JsiGrid<T> {
    pub grid: SpectralGrid<T>,
    pub values: Vec<T>,
}

impl<T: Real> JsiGrid<T> {
    pub fn get(&self, s: usize, i: usize) -> T {
        self.values[s * self.grid.idler_axis.len() + i]
    }

    /// Trapezoid integral over both axes (m²).
    pub fn integrated(&self) -> T {
        let ws = trapezoid_weights(&self.grid.signal_axis);
        let wi = trapezoid_weights(&self.grid.idler_axis);
        let n = wi.len();
        ws.iter().enumerate().fold(T::zero(), |acc, (s, w)| {
            let row = &self.values[s * n..(s + 1) * n];
            acc + *w * row.iter().zip(&wi).fold(T::zero(), |r, (v, u)| r + *v * *u)
        })
    }

    /// `(signal, idler, value)` at the first grid maximum.
    pub fn peak(&self) -> (T, T, T) {
        let k = argmax(&self.values);
        let n = self.grid.idler_axis.len();
        (self.grid.signal_axis[k / n], self.grid.idler_axis[k % n], self.values[k])
    }
}

/// `|α|² = exp(−4 ln2 (δ/w)²)` with `δ = 1/λs + 1/λi − 1/λp` and the pump
/// width mapped to inverse wavelength.
fn pump_envelope<T: Real>(config: &CrystalConfig<T>, lambda_s: T, lambda_i: T) -> T {
    let lp = config.pump_center;
    let detuning = T::one() / lambda_s + T::one() / lambda_i - T::one() / lp;
    let width = config.pump_fwhm / (lp * lp);
    (-T::lit(4.0 * std::f64::consts::LN_2) * (detuning / width).powi(2)).exp()
}

fn phase_matching<T: Real>(config: &CrystalConfig<T>, lambda_s: T, n_s: T, lambda_i: T, n_i: T) -> Result<T> {
    let lambda_p = config.pump_for(lambda_s, lambda_i);
    let n_p = refractive_index(config, lambda_p, Polarization::ExtraordinaryAt(config.cut_angle))?;
    let dk = T::TAU() * (n_p / lambda_p - n_s / lambda_s - n_i / lambda_i);
    Ok(sinc(dk * config.length / T::lit(2.0)).powi(2))
}

fn ordinary_indices<T: Real>(config: &CrystalConfig<T>, axis: &[T]) -> Result<Vec<T>> {
    axis.iter()
        .map(|l| refractive_index(config, *l, Polarization::Ordinary))
        .collect()
}

/// Joint spectral intensity `|α|² sinc²(Δk L / 2)`. Values lie in [0, 1]
/// and reach 1 at the phase-matched, energy-conserving design point of a
/// calibrated config.
pub fn jsi<T: Real>(config: &CrystalConfig<T>, grid: &SpectralGrid<T>) -> Result<JsiGrid<T>> {
    let n_s = ordinary_indices(config, &grid.signal_axis)?;
    let n_i = ordinary_indices(config, &grid.idler_axis)?;
    let rows: Vec<Vec<T>> = grid
        .signal_axis
        .par_iter()
        .zip(&n_s)
        .map(|(ls, ns)| {
            grid.idler_axis
                .iter()
                .zip(&n_i)
                .map(|(li, ni)| Ok(pump_envelope(config, *ls, *li) * phase_matching(config, *ls, *ns, *li, *ni)?))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(JsiGrid {
        grid: grid.clone(),
        values: rows.into_iter().flatten().collect(),
    })
}

/// Idler marginal `Σ_s w_s JSI(s, i)` with trapezoid weights, peak-normalized.
/// An all-zero grid yields an all-zero spectrum with `normalized = false`.
pub fn spdc_marginal<T: Real>(grid: &JsiGrid<T>) -> Spectrum<T> {
    let ws = trapezoid_weights(&grid.grid.signal_axis);
    let n = grid.grid.idler_axis.len();
    let mut sums = vec![T::zero(); n];
    for (s, w) in ws.iter().enumerate() {
        for (acc, v) in sums.iter_mut().zip(&grid.values[s * n..(s + 1) * n]) {
            *acc = *acc + *w * *v;
        }
    }
    Spectrum::peak_normalized(grid.grid.idler_axis.clone(), sums)
}

/// Stimulated idler spectrum for a monochromatic seed: the JSI slice at
/// `seed_wavelength`, peak-normalized.
pub fn dfg_spectrum<T: Real>(config: &CrystalConfig<T>, seed_wavelength: T, idler_axis: &[T]) -> Result<Spectrum<T>> {
    check_axis("idler", idler_axis)?;
    let n_seed = refractive_index(config, seed_wavelength, Polarization::Ordinary)?;
    let n_i = ordinary_indices(config, idler_axis)?;
    let values = idler_axis
        .iter()
        .zip(&n_i)
        .map(|(li, ni)| {
            Ok(pump_envelope(config, seed_wavelength, *li) * phase_matching(config, seed_wavelength, n_seed, *li, *ni)?)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(Spectrum::peak_normalized(idler_axis.to_vec(), values))
}
