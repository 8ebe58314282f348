//! Density-matrix reconstruction from measurement records.
//!
//! The physical state is parametrized as `rho = T†T / Tr(T†T)` with `T`
//! lower triangular (4 real diagonal entries, 6 complex sub-diagonal
//! entries), so every parameter vector maps to a valid state. The fit
//! minimizes a weighted least-squares (or optionally Poisson) objective
//! starting from a physicalized linear inversion.

mod bootstrap;
pub mod optimize;

use std::cmp::Ordering;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap, bootstrap_fits, summarize, BootstrapOptions, BootstrapStats, Metric};
pub use optimize::{StopReason, StopRule};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, hermitian_eigen, least_squares, CMat2, CMat4};
use crate::measurement::{normalize_records, MeasurementRecord, NormalizedRecord, PowerCalibration, ValueKind};
use crate::num::Real;
use crate::state::DensityMatrix;

/// Eigenvalue lift applied before Cholesky factorization.
pub const EIGENVALUE_LIFT: f64 = 1e-12;
/// Minimum eigenvalue below which a linear estimate is flagged non-physical.
pub const NONPHYSICAL_THRESHOLD: f64 = -1e-8;

/// Sub-diagonal positions of `T`, in parameter order.
const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// The 16 real parameters of the lower-triangular factor `T`: the four
/// diagonal entries followed by (re, im) pairs of the sub-diagonal entries
/// (1,0), (2,0), (2,1), (3,0), (3,1), (3,2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TParams<T> {
    pub t: [T; 16],
}

impl<T: Real> TParams<T> {
    pub fn new(t: [T; 16]) -> Self {
        Self { t }
    }

    pub fn lower_triangular(&self) -> CMat4<T> {
        let mut m = CMat4::zeros();
        for i in 0..4 {
            m[(i, i)] = Complex::new(self.t[i], T::zero());
        }
        for (k, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
            m[(i, j)] = Complex::new(self.t[4 + 2 * k], self.t[5 + 2 * k]);
        }
        m
    }

    fn from_lower_triangular(m: &CMat4<T>) -> Self {
        let mut t = [T::zero(); 16];
        for (i, ti) in t.iter_mut().enumerate().take(4) {
            *ti = m[(i, i)].re;
        }
        for (k, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
            t[4 + 2 * k] = m[(i, j)].re;
            t[5 + 2 * k] = m[(i, j)].im;
        }
        Self { t }
    }

    fn norm_sqr(&self) -> T {
        self.t.iter().fold(T::zero(), |s, x| s + *x * *x)
    }
}

/// `T†T / Tr(T†T)`.
pub fn rho_from_t<T: Real>(params: &TParams<T>) -> Result<DensityMatrix<T>> {
    let n = params.norm_sqr();
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::DegenerateParameters);
    }
    let lt = params.lower_triangular();
    let m = (lt.adjoint() * lt).scale(T::one() / n);
    Ok(DensityMatrix::from_trusted(m))
}

/// Inverse of [`rho_from_t`] after lifting eigenvalues to at least 1e-12.
///
/// With `R` the index-reversal permutation, `R rho R = L L†` gives
/// `rho = (R L R)(R L R)†` with `R L R` upper triangular, so `T = (R L R)†`.
pub fn t_from_rho<T: Real>(rho: &DensityMatrix<T>) -> TParams<T> {
    let lift = T::lit(EIGENVALUE_LIFT);
    let eig = hermitian_eigen(rho.matrix());
    let total = eig.values.iter().fold(T::zero(), |s, &x| s + x.max(lift));
    let lifted = eig.map_values(|x| x.max(lift) / total).hermitian_part();
    let reversed = CMat4::from_fn(|i, j| lifted[(3 - i, 3 - j)]);
    // the lift keeps the matrix positive definite; fall back to a larger lift
    // only if round-off defeats the factorization
    let l = cholesky(&reversed).unwrap_or_else(|| {
        let bumped = reversed + CMat4::identity().scale(T::lit(1e-9));
        cholesky(&bumped).unwrap_or_else(CMat4::identity)
    });
    let upper = CMat4::from_fn(|i, j| l[(3 - i, 3 - j)]);
    TParams::from_lower_triangular(&upper.adjoint())
}

/// Pauli matrices in the order I, σz, σx, σy.
fn paulis<T: Real>() -> [CMat2<T>; 4] {
    let o = T::one();
    let z = T::zero();
    let c = |re: T, im: T| Complex::new(re, im);
    [
        CMat2::from_rows([[c(o, z), c(z, z)], [c(z, z), c(o, z)]]),
        CMat2::from_rows([[c(o, z), c(z, z)], [c(z, z), c(-o, z)]]),
        CMat2::from_rows([[c(z, z), c(o, z)], [c(o, z), c(z, z)]]),
        CMat2::from_rows([[c(z, z), c(z, -o)], [c(z, o), c(z, z)]]),
    ]
}

/// Least-squares estimate before physicality is imposed.
#[derive(Clone, Debug)]
pub struct LinearEstimate<T> {
    /// Hermitian, unit trace; possibly with negative eigenvalues.
    pub matrix: CMat4<T>,
    pub min_eigenvalue: T,
    pub physical: bool,
}

impl<T: Real> LinearEstimate<T> {
    /// Eigenvalue-clamped projection onto the state space.
    pub fn physicalized(&self) -> Result<DensityMatrix<T>> {
        DensityMatrix::physicalize(&self.matrix)
    }
}

/// Solves `Tr(rho Π_k) ∝ y_k` in the two-qubit Pauli basis. The overall
/// scale (pair number or power calibration) is a free coefficient of the
/// identity term, removed by fixing the trace to one.
pub fn linear_inversion<T: Real>(records: &[NormalizedRecord<T>], seed_conjugation: bool) -> Result<LinearEstimate<T>> {
    let basis = pauli_products::<T>();
    let rows: Vec<Vec<T>> = records
        .iter()
        .map(|r| {
            let op = r.setting.projector::<T>(seed_conjugation);
            basis.iter().map(|b| op.matrix().trace_product(b).re).collect()
        })
        .collect();
    let y: Vec<T> = records.iter().map(|r| r.value).collect();
    let coeffs = least_squares(&rows, &y, 16).map_err(|rank| Error::IncompletePlan { rank })?;
    let norm = coeffs[0] * T::lit(4.0);
    let matrix = if norm > T::zero() {
        basis
            .iter()
            .zip(&coeffs)
            .fold(CMat4::zeros(), |acc, (b, c)| acc + b.scale(*c / norm))
            .hermitian_part()
    } else {
        CMat4::identity().scale(T::lit(0.25))
    };
    let min_eigenvalue = hermitian_eigen(&matrix).values[0];
    Ok(LinearEstimate {
        matrix,
        min_eigenvalue,
        physical: min_eigenvalue >= T::lit(NONPHYSICAL_THRESHOLD),
    })
}

fn pauli_products<T: Real>() -> Vec<CMat4<T>> {
    let p = paulis::<T>();
    let mut out = Vec::with_capacity(16);
    for a in &p {
        for b in &p {
            out.push(a.kron(b));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mle,
    Linear,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mle => "mle",
            Method::Linear => "linear",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `Σ (y - μ)² / (2σ²)`.
    GaussianLeastSquares,
    /// `Σ μ - y ln μ` (counts only; powers fall back to least squares).
    Poisson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions<T> {
    pub objective: Objective,
    pub calibration: PowerCalibration<T>,
    /// Relative detector noise for power records; sets the uniform σ.
    pub power_noise_rel: T,
    pub seed_conjugation: bool,
    pub ftol: T,
    pub xtol: T,
    pub max_evals: usize,
    /// Initial simplex edge in parameter units (parameters have unit norm).
    pub simplex_step: T,
    /// Polish the simplex result with damped finite-difference Newton steps.
    pub refine: bool,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            objective: Objective::GaussianLeastSquares,
            calibration: PowerCalibration::default(),
            power_noise_rel: T::lit(0.01),
            seed_conjugation: false,
            ftol: T::lit(1e-10),
            xtol: T::lit(1e-9),
            max_evals: 50_000,
            simplex_step: T::lit(0.05),
            refine: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult<T> {
    pub rho: DensityMatrix<T>,
    pub objective_value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub stop_reason: Option<StopReason>,
    pub method: Method,
}

/// Forward model over a fixed, canonically ordered record set.
struct Model<T> {
    kets: Vec<[Complex<T>; 4]>,
    y: Vec<T>,
    kind: ValueKind,
    objective: Objective,
    sigma_sq: T,
    total: T,
}

/// Records sorted by (setting, value) so the objective's summation order is
/// independent of the caller's ordering.
fn canonical<T: Real>(records: &[NormalizedRecord<T>]) -> Vec<NormalizedRecord<T>> {
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| {
        a.setting
            .cmp(&b.setting)
            .then(a.value.partial_cmp(&b.value).unwrap_or(Ordering::Equal))
    });
    sorted
}

impl<T: Real> Model<T> {
    fn new(records: &[NormalizedRecord<T>], options: &FitOptions<T>) -> Self {
        let records = canonical(records);
        let kind = records[0].kind;
        let y: Vec<T> = records.iter().map(|r| r.value).collect();
        let total = y.iter().fold(T::zero(), |s, v| s + *v);
        let mean_abs = y.iter().fold(T::zero(), |s, v| s + v.abs()) / T::lit(y.len() as f64);
        let rel = options.power_noise_rel.max(T::lit(1e-4));
        let sigma = if mean_abs > T::zero() { rel * mean_abs } else { rel };
        Self {
            kets: records.iter().map(|r| r.setting.ket(options.seed_conjugation)).collect(),
            y,
            kind,
            objective: options.objective,
            sigma_sq: sigma * sigma,
            total,
        }
    }

    /// Born probabilities `‖T ψ_k‖² / ‖T‖²`.
    fn probabilities(&self, lt: &CMat4<T>, norm: T) -> Vec<T> {
        self.kets
            .iter()
            .map(|k| lt.mul_vec(k).iter().fold(T::zero(), |s, z| s + z.norm_sqr()) / norm)
            .collect()
    }

    fn objective_from(&self, p: &[T]) -> T {
        let psum = p.iter().fold(T::zero(), |s, v| s + *v);
        // overall scale profiled out: pair number for counts, calibration error for powers
        let scale = if psum > T::zero() { self.total / psum } else { T::zero() };
        let two = T::lit(2.0);
        let poisson = self.kind == ValueKind::Counts && self.objective == Objective::Poisson;
        let mut acc = T::zero();
        for (pk, yk) in p.iter().zip(&self.y) {
            let mu = scale * *pk;
            acc = acc
                + if poisson {
                    let m = mu.max(T::min_positive_value());
                    let ylogy = if *yk > T::zero() { *yk * yk.ln() } else { T::zero() };
                    m - *yk * m.ln() - (*yk - ylogy)
                } else if self.kind == ValueKind::Counts {
                    (*yk - mu).powi(2) / (two * mu.max(T::one()))
                } else {
                    (*yk - mu).powi(2) / (two * self.sigma_sq)
                };
        }
        acc
    }

    fn eval_params(&self, t: &[T]) -> T {
        let mut arr = [T::zero(); 16];
        arr.copy_from_slice(t);
        let params = TParams::new(arr);
        let norm = params.norm_sqr();
        if !(norm > T::zero()) {
            return T::infinity();
        }
        let p = self.probabilities(&params.lower_triangular(), norm);
        self.objective_from(&p)
    }

    fn eval_rho(&self, rho: &DensityMatrix<T>) -> T {
        let p: Vec<T> = self
            .kets
            .iter()
            .map(|k| {
                let v = rho.matrix().mul_vec(k);
                k.iter().zip(&v).fold(Complex::zero(), |s: Complex<T>, (a, b)| s + a.conj() * *b).re
            })
            .collect();
        self.objective_from(&p)
    }
}

fn prepare<T: Real>(records: &[MeasurementRecord<T>], options: &FitOptions<T>) -> Result<Vec<NormalizedRecord<T>>> {
    if records.len() < 16 {
        return Err(invalid(format!(
            "reconstruction needs at least 16 records, got {}",
            records.len()
        )));
    }
    normalize_records(records, &options.calibration)
}

/// Objective value of `rho` on `records` under `options`.
pub fn objective_at<T: Real>(records: &[MeasurementRecord<T>], rho: &DensityMatrix<T>, options: &FitOptions<T>) -> Result<T> {
    let normalized = prepare(records, options)?;
    Ok(Model::new(&normalized, options).eval_rho(rho))
}

/// Linear inversion followed by eigenvalue clamping.
pub fn linear_fit<T: Real>(records: &[MeasurementRecord<T>], options: &FitOptions<T>) -> Result<ReconstructionResult<T>> {
    let normalized = prepare(records, options)?;
    let estimate = linear_inversion(&canonical(&normalized), options.seed_conjugation)?;
    let rho = estimate.physicalized()?;
    let objective_value = Model::new(&normalized, options).eval_rho(&rho);
    Ok(ReconstructionResult {
        rho,
        objective_value,
        iterations: 0,
        evaluations: 1,
        converged: true,
        stop_reason: None,
        method: Method::Linear,
    })
}

/// Maximum-likelihood reconstruction. Non-convergence is reported through
/// `converged = false`, never as an error.
pub fn mle_fit<T: Real>(
    records: &[MeasurementRecord<T>],
    init: Option<&DensityMatrix<T>>,
    options: &FitOptions<T>,
) -> Result<ReconstructionResult<T>> {
    let normalized = prepare(records, options)?;
    let ordered = canonical(&normalized);
    let estimate = linear_inversion(&ordered, options.seed_conjugation)?;
    let start = match init {
        Some(rho) => *rho,
        None => estimate.physicalized()?,
    };
    let model = Model::new(&ordered, options);

    let mut t0 = t_from_rho(&start);
    let n = t0.norm_sqr().sqrt();
    t0.t.iter_mut().for_each(|x| *x = *x / n);

    let rule = StopRule {
        ftol: options.ftol,
        xtol: options.xtol,
        max_evals: options.max_evals,
    };
    let objective = |x: &[T]| model.eval_params(x);
    let mut best = optimize::nelder_mead(&t0.t, options.simplex_step, rule, objective);
    if options.refine && best.evaluations < rule.max_evals {
        let remaining = StopRule {
            max_evals: rule.max_evals - best.evaluations,
            ..rule
        };
        let refined = optimize::newton_refine(&best.x, remaining, objective);
        best.evaluations += refined.evaluations;
        best.iterations += refined.iterations;
        if refined.f <= best.f {
            best.x = refined.x;
            best.f = refined.f;
        }
        if !refined.reason.converged() {
            best.reason = refined.reason;
        }
    }

    let mut arr = [T::zero(); 16];
    arr.copy_from_slice(&best.x);
    let rho = rho_from_t(&TParams::new(arr))?;
    Ok(ReconstructionResult {
        rho,
        objective_value: best.f,
        iterations: best.iterations,
        evaluations: best.evaluations,
        converged: best.reason.converged(),
        stop_reason: Some(best.reason),
        method: Method::Mle,
    })
}

/// Dispatches on [`Method`].
pub fn reconstruct<T: Real>(
    records: &[MeasurementRecord<T>],
    method: Method,
    options: &FitOptions<T>,
) -> Result<ReconstructionResult<T>> {
    match method {
        Method::Mle => mle_fit(records, None, options),
        Method::Linear => linear_fit(records, options),
    }
}
