//! Two-qubit polarization states in the ordered basis (HH, HV, VH, VV),
//! signal ⊗ idler.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, CMat2, CMat4};
use crate::num::Real;

/// Basis labels in file order.
pub const BASIS_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// Eigenvalues in `[-tol, 0)` are treated as round-off and clamped to zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-10;

/// Single-qubit polarization state `(h, v)` with unit norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesVector<T> {
    h: Complex<T>,
    v: Complex<T>,
}

impl<T: Real> JonesVector<T> {
    /// Fails unless `|h|² + |v|² = 1` within 1e-12 (scaled for the scalar type).
    pub fn new(h: Complex<T>, v: Complex<T>) -> Result<Self> {
        let norm = h.norm_sqr() + v.norm_sqr();
        let tol = T::lit(T::VALIDATION_TOL * 1e-2);
        if !norm.is_finite() || (norm - T::one()).abs() > tol {
            return Err(invalid(format!(
                "Jones vector must have unit norm, got |psi|^2 = {norm}"
            )));
        }
        Ok(Self { h, v })
    }

    /// Normalizes an arbitrary nonzero pair.
    pub fn normalized(h: Complex<T>, v: Complex<T>) -> Result<Self> {
        let n = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(invalid("cannot normalize a zero Jones vector"));
        }
        Ok(Self { h: h / n, v: v / n })
    }

    pub fn h(&self) -> Complex<T> {
        self.h
    }

    pub fn v(&self) -> Complex<T> {
        self.v
    }

    pub fn components(&self) -> [Complex<T>; 2] {
        [self.h, self.v]
    }

    /// Complex-conjugate polarization (swaps R and L, fixes linear states).
    pub fn conj(&self) -> Self {
        Self {
            h: self.h.conj(),
            v: self.v.conj(),
        }
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> CMat2<T> {
        CMat2::outer(&self.components(), &self.components())
    }

    /// Stokes components `(1, <Z>, <X>, <Y>)` in the Pauli order I, σz, σx, σy.
    pub fn stokes(&self) -> [T; 4] {
        let hv = self.h.conj() * self.v;
        [
            self.h.norm_sqr() + self.v.norm_sqr(),
            self.h.norm_sqr() - self.v.norm_sqr(),
            T::lit(2.0) * hv.re,
            T::lit(2.0) * hv.im,
        ]
    }
}

/// The six analysis/seed polarizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisState {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl BasisState {
    pub const ALL: [BasisState; 6] = [
        BasisState::H,
        BasisState::V,
        BasisState::D,
        BasisState::A,
        BasisState::R,
        BasisState::L,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Orthogonal partner in the same basis.
    pub fn orthogonal(self) -> Self {
        match self {
            BasisState::H => BasisState::V,
            BasisState::V => BasisState::H,
            BasisState::D => BasisState::A,
            BasisState::A => BasisState::D,
            BasisState::R => BasisState::L,
            BasisState::L => BasisState::R,
        }
    }

    /// Jones vector with the circular convention R = (1, -i)/√2, L = (1, i)/√2.
    pub fn jones<T: Real>(self) -> JonesVector<T> {
        let s = T::FRAC_1_SQRT_2();
        let z = T::zero();
        let (h, v) = match self {
            BasisState::H => (Complex::one(), Complex::zero()),
            BasisState::V => (Complex::zero(), Complex::one()),
            BasisState::D => (Complex::new(s, z), Complex::new(s, z)),
            BasisState::A => (Complex::new(s, z), Complex::new(-s, z)),
            BasisState::R => (Complex::new(s, z), Complex::new(z, -s)),
            BasisState::L => (Complex::new(s, z), Complex::new(z, s)),
        };
        JonesVector { h, v }
    }

    pub fn label(self) -> &'static str {
        match self {
            BasisState::H => "H",
            BasisState::V => "V",
            BasisState::D => "D",
            BasisState::A => "A",
            BasisState::R => "R",
            BasisState::L => "L",
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" => Ok(BasisState::H),
            "V" => Ok(BasisState::V),
            "D" => Ok(BasisState::D),
            "A" => Ok(BasisState::A),
            "R" => Ok(BasisState::R),
            "L" => Ok(BasisState::L),
            other => Err(invalid(format!("unknown polarization label `{other}`"))),
        }
    }
}

/// Hermitian 4×4 operator on the two-qubit space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitOperator<T> {
    matrix: CMat4<T>,
    projector: bool,
}

impl<T: Real> TwoQubitOperator<T> {
    /// Wraps a Hermitian matrix (checked within the validation tolerance).
    pub fn new(matrix: CMat4<T>) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(invalid("operator has non-finite entries"));
        }
        let defect = matrix.hermiticity_defect();
        if defect > T::lit(T::VALIDATION_TOL) {
            return Err(invalid(format!("operator is not Hermitian (defect {defect})")));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            projector: false,
        })
    }

    pub fn matrix(&self) -> &CMat4<T> {
        &self.matrix
    }

    /// Whether the operator was built as a rank-1 product projector.
    pub fn is_projector(&self) -> bool {
        self.projector
    }
}

/// `|psi_s><psi_s| ⊗ |psi_i><psi_i|`.
pub fn projector2q<T: Real>(signal: &JonesVector<T>, idler: &JonesVector<T>) -> TwoQubitOperator<T> {
    TwoQubitOperator {
        matrix: signal.projector().kron(&idler.projector()),
        projector: true,
    }
}

/// Two-qubit product ket `signal ⊗ idler`.
pub fn product_ket<T: Real>(signal: &JonesVector<T>, idler: &JonesVector<T>) -> [Complex<T>; 4] {
    let s = signal.components();
    let i = idler.components();
    [s[0] * i[0], s[0] * i[1], s[1] * i[0], s[1] * i[1]]
}

/// Hermitian, unit-trace, positive-semidefinite 4×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: CMat4<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and PSD (tolerance 1e-10 for f64).
    /// The stored matrix is the exact Hermitian part of the input.
    pub fn new(matrix: CMat4<T>) -> Result<Self> {
        let tol = T::lit(T::VALIDATION_TOL);
        if !matrix.is_finite() {
            return Err(invalid("density matrix has non-finite entries"));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(invalid(format!("density matrix is not Hermitian (defect {defect})")));
        }
        let tr = matrix.trace().re;
        if (tr - T::one()).abs() > tol {
            return Err(invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let herm = matrix.hermitian_part();
        let min_eig = hermitian_eigen(&herm).values[0];
        if min_eig < -tol {
            return Err(invalid(format!(
                "density matrix is not positive semidefinite (min eigenvalue {min_eig})"
            )));
        }
        Ok(Self { matrix: herm })
    }

    /// Projects an arbitrary Hermitian candidate onto the state space by
    /// clamping negative eigenvalues and renormalizing the trace.
    pub fn physicalize(matrix: &CMat4<T>) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(invalid("candidate matrix has non-finite entries"));
        }
        let eig = hermitian_eigen(matrix);
        let total = eig.values.iter().fold(T::zero(), |s, &x| s + x.max(T::zero()));
        if !(total > T::zero()) {
            return Ok(Self::maximally_mixed());
        }
        let m = eig.map_values(|x| x.max(T::zero()) / total);
        Ok(Self::from_trusted(m))
    }

    /// Pure state `|psi><psi|` from a (not necessarily normalized) ket.
    pub fn pure(ket: &[Complex<T>; 4]) -> Result<Self> {
        let n = ket.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if !(n > T::zero()) || !n.is_finite() {
            return Err(invalid("cannot build a pure state from a zero ket"));
        }
        let k = ket.map(|z| z / n.sqrt());
        Ok(Self::from_trusted(CMat4::outer(&k, &k)))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: CMat4::identity().scale(T::lit(0.25)),
        }
    }

    /// Mixture `sum w_k rho_k` with weights renormalized to sum 1.
    pub fn mixture(parts: &[(T, DensityMatrix<T>)]) -> Result<Self> {
        let total = parts.iter().fold(T::zero(), |s, (w, _)| s + *w);
        if parts.iter().any(|(w, _)| *w < T::zero()) || !(total > T::zero()) {
            return Err(invalid("mixture weights must be nonnegative with a positive sum"));
        }
        let m = parts
            .iter()
            .fold(CMat4::zeros(), |acc, (w, r)| acc + r.matrix.scale(*w / total));
        Ok(Self::from_trusted(m))
    }

    /// Internal constructor for matrices that are physical by construction.
    pub(crate) fn from_trusted(matrix: CMat4<T>) -> Self {
        let mut m = matrix.hermitian_part();
        let tr = m.trace().re;
        if tr > T::zero() && tr != T::one() {
            m = m.scale(T::one() / tr);
        }
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMat4<T> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.matrix[(row, col)]
    }

    /// Eigenvalues ascending, with values in `[-1e-10, 0)` clamped to zero.
    pub fn eigenvalues(&self) -> [T; 4] {
        let floor = T::lit(T::VALIDATION_TOL);
        hermitian_eigen(&self.matrix)
            .values
            .map(|x| if x < T::zero() && x >= -floor { T::zero() } else { x })
    }

    /// `U rho U^dagger` for a unitary `U`.
    pub fn transform(&self, unitary: &CMat4<T>) -> Self {
        Self::from_trusted((unitary * &self.matrix) * unitary.adjoint())
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        let m = CMat4::from_fn(|i, j| {
            let z = self.matrix[(i, j)];
            Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy()))
        });
        DensityMatrix::from_trusted(m)
    }
}

/// `(|HH> + e^{i theta}|VV>)/√2` as a density matrix.
pub fn bell_state<T: Real>(theta: T) -> Result<DensityMatrix<T>> {
    if !theta.is_finite() {
        return Err(invalid("bell_state: theta must be finite"));
    }
    let s = T::FRAC_1_SQRT_2();
    let ket = [
        Complex::new(s, T::zero()),
        Complex::zero(),
        Complex::zero(),
        Complex::from_polar(s, theta),
    ];
    Ok(DensityMatrix {
        matrix: CMat4::outer(&ket, &ket),
    })
}

/// `p |Psi><Psi| + (1 - p) I/4` with `Psi = bell_state(0)`.
pub fn werner<T: Real>(p: T) -> Result<DensityMatrix<T>> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(invalid(format!("Werner weight must lie in [0, 1], got {p}")));
    }
    DensityMatrix::mixture(&[
        (p, bell_state(T::zero())?),
        (T::one() - p, DensityMatrix::maximally_mixed()),
    ])
}

/// Born rule `Tr(rho Π)`; clamped to `[0, 1]` when `op` is a projector.
pub fn born_probability<T: Real>(rho: &DensityMatrix<T>, op: &TwoQubitOperator<T>) -> T {
    let p = rho.matrix.trace_product(op.matrix()).re;
    if op.is_projector() {
        p.max(T::zero()).min(T::one())
    } else {
        p
    }
}
