//! Fidelity, concurrence, purity and the HH/VV relative phase.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, singular_values, CMat4};
use crate::num::Real;
use crate::state::DensityMatrix;

/// Default floor on `|<VV|rho|HH>|` below which the phase is undefined.
pub const COHERENCE_FLOOR: f64 = 1e-6;

const PURE_TOL: f64 = 1e-8;

fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// `Tr(rho²)`.
pub fn purity<T: Real>(rho: &DensityMatrix<T>) -> T {
    rho.matrix().trace_product(rho.matrix()).re
}

fn is_pure<T: Real>(rho: &DensityMatrix<T>) -> bool {
    (purity(rho) - T::one()).abs() <= T::lit(PURE_TOL.max(T::VALIDATION_TOL))
}

/// `<psi|rho|psi>` for a pure `target = |psi><psi|`.
pub fn fidelity_to_pure<T: Real>(rho: &DensityMatrix<T>, target: &DensityMatrix<T>) -> Result<T> {
    if !is_pure(target) {
        return Err(invalid(format!(
            "fidelity_to_pure: target purity {} is not 1; use fidelity_mixed",
            purity(target)
        )));
    }
    Ok(clamp_unit(rho.matrix().trace_product(target.matrix()).re))
}

fn psd_sqrt<T: Real>(rho: &DensityMatrix<T>) -> CMat4<T> {
    hermitian_eigen(rho.matrix()).map_values(|x| x.max(T::zero()).sqrt())
}

/// Uhlmann fidelity `(Tr √(√rho1 rho2 √rho1))²`, evaluated as the squared
/// trace norm of `√rho1 √rho2`. Reduces to `Tr(rho1 rho2)` when either
/// argument is pure.
pub fn fidelity_mixed<T: Real>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> T {
    if is_pure(rho1) || is_pure(rho2) {
        return clamp_unit(rho1.matrix().trace_product(rho2.matrix()).re);
    }
    let prod = psd_sqrt(rho1) * psd_sqrt(rho2);
    let trace_norm = singular_values(&prod).iter().fold(T::zero(), |s, &x| s + x);
    clamp_unit(trace_norm * trace_norm)
}

/// `σy ⊗ σy` in the (HH, HV, VH, VV) basis.
fn sigma_yy<T: Real>() -> CMat4<T> {
    let one = Complex::new(T::one(), T::zero());
    let mut m = CMat4::zeros();
    m[(0, 3)] = -one;
    m[(3, 0)] = -one;
    m[(1, 2)] = one;
    m[(2, 1)] = one;
    m
}

/// Wootters concurrence `max(0, λ1 - λ2 - λ3 - λ4)`.
///
/// The λ are the singular values of `τ = Ψᵀ (σy⊗σy) Ψ`, where the columns
/// of `Ψ` are the subnormalized eigenvectors `√μ_k e_k` of rho. These equal
/// the square roots of the eigenvalues of `rho (σy⊗σy) rho* (σy⊗σy)` without
/// taking square roots of near-zero eigenvalues.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> T {
    let eig = hermitian_eigen(rho.matrix());
    let psi = CMat4::from_fn(|i, k| eig.vectors[(i, k)] * eig.values[k].max(T::zero()).sqrt());
    let tau = (psi.transpose() * sigma_yy()) * psi;
    let sv = singular_values(&tau);
    clamp_unit(sv[0] - sv[1] - sv[2] - sv[3])
}

/// `arg(<VV|rho|HH>)` in `(-π, π]` with the default coherence floor.
pub fn relative_phase<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    relative_phase_with_floor(rho, T::lit(COHERENCE_FLOOR))
}

pub fn relative_phase_with_floor<T: Real>(rho: &DensityMatrix<T>, floor: T) -> Result<T> {
    let c = rho.get(3, 0);
    let mag = c.norm();
    if !(mag > floor) {
        return Err(Error::UndefinedPhase {
            magnitude: mag.to_f64_lossy(),
            floor: floor.to_f64_lossy(),
        });
    }
    let mut phase = c.im.atan2(c.re);
    if phase <= -T::PI() {
        phase = phase + T::lit(2.0) * T::PI();
    }
    Ok(phase)
}

/// Trace distance, used only for diagnostics.
pub fn trace_distance<T: Real>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> T {
    let diff = *rho1.matrix() - *rho2.matrix();
    let e = hermitian_eigen(&diff);
    e.values.iter().fold(T::zero(), |s, x| s + x.abs()) * T::lit(0.5)
}
