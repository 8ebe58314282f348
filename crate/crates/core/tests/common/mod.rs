//! Reference computations that avoid the library's own decompositions.
#![allow(dead_code)]

use num_complex::Complex64;
use pairtomo::linalg::CMat4;
use pairtomo::random::{haar_pure, wishart_mixed};
use pairtomo::rng::stream;
use pairtomo::DensityMatrix;

type Real8 = [[f64; 8]; 8];

/// Classical cyclic Jacobi on a real symmetric 8×8 matrix.
#[allow(clippy::needless_range_loop)]
fn jacobi8(mut a: Real8) -> ([f64; 8], Real8) {
    let mut v = [[0.0; 8]; 8];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..200 {
        let off: f64 = (0..8)
            .flat_map(|i| (0..8).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..8 {
            for q in p + 1..8 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..8 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..8 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    (std::array::from_fn(|i| a[i][i]), v)
}

/// Real embedding `[[A, -B], [B, A]]` of `A + iB`.
fn embed(m: &CMat4<f64>) -> Real8 {
    let mut r = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let z = m[(i, j)];
            r[i][j] = z.re;
            r[i + 4][j + 4] = z.re;
            r[i][j + 4] = -z.im;
            r[i + 4][j] = z.im;
        }
    }
    r
}

/// Eigenvalues of a Hermitian 4×4, ascending (each appears twice in the
/// embedding; every other one is kept).
pub fn herm_eigenvalues(m: &CMat4<f64>) -> [f64; 4] {
    let (mut vals, _) = jacobi8(embed(m));
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [vals[0], vals[2], vals[4], vals[6]]
}

/// `f(m)` for Hermitian `m`, via the real embedding.
pub fn herm_function(m: &CMat4<f64>, f: impl Fn(f64) -> f64) -> CMat4<f64> {
    let (vals, v) = jacobi8(embed(m));
    let mut r = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            r[i][j] = (0..8).map(|k| v[i][k] * f(vals[k]) * v[j][k]).sum();
        }
    }
    CMat4::from_fn(|i, j| Complex64::new(r[i][j], r[i + 4][j]))
}

pub fn psd_sqrt(m: &CMat4<f64>) -> CMat4<f64> {
    herm_function(m, |x| x.max(0.0).sqrt())
}

/// `(Tr √(√ρ1 ρ2 √ρ1))²`.
pub fn uhlmann(r1: &DensityMatrix, r2: &DensityMatrix) -> f64 {
    let s = psd_sqrt(r1.matrix());
    let inner = s * *r2.matrix() * s;
    let inner = (inner + inner.adjoint()).scale(0.5);
    // eigenvalues at round-off level would contribute spurious square roots
    let t: f64 = herm_eigenvalues(&inner)
        .iter()
        .map(|&x: &f64| if x < 1e-13 { 0.0 } else { x.sqrt() })
        .sum();
    t * t
}

pub fn sigma_yy() -> CMat4<f64> {
    let mut m = CMat4::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m
}

/// Wootters concurrence from the eigenvalues of `√ρ ρ̃ √ρ`, which share the
/// spectrum of `ρ ρ̃`.
pub fn concurrence_oracle(rho: &DensityMatrix) -> f64 {
    let s = psd_sqrt(rho.matrix());
    let tilde = sigma_yy() * rho.matrix().conj() * sigma_yy();
    let r = s * tilde * s;
    let r = (r + r.adjoint()).scale(0.5);
    let mut l: Vec<f64> = herm_eigenvalues(&r).iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Entrywise `<a|M|b>` computed directly.
pub fn sandwich(a: &[Complex64; 4], m: &CMat4<f64>, b: &[Complex64; 4]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            s += a[i].conj() * m[(i, j)] * b[j];
        }
    }
    s
}

/// Random states: even indices Haar pure, odd indices Wishart mixed.
pub fn random_state(seed: u64, index: u64) -> DensityMatrix {
    let mut rng = stream(seed, "test-states", index);
    if index.is_multiple_of(2) {
        haar_pure(&mut rng)
    } else {
        wishart_mixed(&mut rng)
    }
}

pub fn mixed_state(seed: u64) -> DensityMatrix {
    wishart_mixed(&mut stream(seed, "test-mixed", 0))
}

pub fn pure_state(seed: u64) -> DensityMatrix {
    haar_pure(&mut stream(seed, "test-pure", 0))
}

/// Hermiticity defect, trace error and minimum eigenvalue (oracle solver).
pub fn validity(rho: &CMat4<f64>) -> (f64, f64, f64) {
    let herm = rho.max_abs_diff(&rho.adjoint());
    let tr = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    let hpart = (*rho + rho.adjoint()).scale(0.5);
    (herm, tr, herm_eigenvalues(&hpart)[0])
}
