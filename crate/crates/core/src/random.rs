//! Random state ensembles: Haar-uniform pure states, normalized Wishart
//! mixed states and Haar local unitaries.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMat2, CMat4};
use crate::num::Real;
use crate::state::DensityMatrix;

fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Haar-random normalized ket in C⁴.
pub fn haar_ket<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [Complex<T>; 4] {
    loop {
        let v: [Complex<T>; 4] = std::array::from_fn(|_| gaussian_complex(rng));
        let n = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
        if n > T::lit(1e-6) {
            return v.map(|z| z / n);
        }
    }
}

pub fn haar_pure<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<T> {
    let ket = haar_ket(rng);
    DensityMatrix::from_trusted(CMat4::outer(&ket, &ket))
}

/// `A A† / Tr(A A†)` with `A` a 4×4 complex Ginibre matrix.
pub fn wishart_mixed<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<T> {
    let a = CMat4::from_fn(|_, _| gaussian_complex(rng));
    DensityMatrix::from_trusted(a * a.adjoint())
}

/// Haar-random element of U(2).
pub fn haar_unitary2<T: Real, R: Rng + ?Sized>(rng: &mut R) -> CMat2<T> {
    let (a, b) = loop {
        let a: Complex<T> = gaussian_complex(rng);
        let b: Complex<T> = gaussian_complex(rng);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n > T::lit(1e-6) {
            break (a / n, b / n);
        }
    };
    let u: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let phase = Complex::from_polar(T::one(), T::lit(u));
    CMat2::from_rows([[a * phase, -b.conj() * phase], [b * phase, a.conj() * phase]])
}

/// Local unitary `u_s ⊗ u_i`.
pub fn local_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R) -> CMat4<T> {
    let us = haar_unitary2(rng);
    let ui = haar_unitary2(rng);
    us.kron(&ui)
}
