//! Small dense complex linear algebra: fixed-size matrices, a cyclic Jacobi
//! eigensolver for Hermitian matrices, one-sided Jacobi singular values,
//! Cholesky factorization and a rank-revealing least-squares solve.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::num::Real;

/// Square complex matrix of fixed dimension `N`, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<T, const N: usize> {
    pub(crate) m: [[Complex<T>; N]; N],
}

pub type CMat2<T> = CMat<T, 2>;
pub type CMat4<T> = CMat<T, 4>;

impl<T: Real, const N: usize> CMat<T, N> {
    pub fn zeros() -> Self {
        Self {
            m: [[Complex::zero(); N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            out.m[i][i] = Complex::one();
        }
        out
    }

    pub fn from_rows(m: [[Complex<T>; N]; N]) -> Self {
        Self { m }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                out.m[i][j] = f(i, j);
            }
        }
        out
    }

    pub fn diag(d: [T; N]) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            out.m[i][i] = Complex::new(d[i], T::zero());
        }
        out
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex<T>; N], b: &[Complex<T>; N]) -> Self {
        Self::from_fn(|i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> &[[Complex<T>; N]; N] {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.m[i][j].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..N).fold(Complex::zero(), |acc, i| acc + self.m[i][i])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(|i, j| (self.m[i][j] + self.m[j][i].conj()) * half)
    }

    /// Largest entrywise modulus of `A - A^dagger`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..N {
            for j in i..N {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        let mut acc = Complex::zero();
        for i in 0..N {
            for k in 0..N {
                acc = acc + self.m[i][k] * other.m[k][i];
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[Complex<T>; N]) -> [Complex<T>; N] {
        let mut out = [Complex::zero(); N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).fold(Complex::zero(), |acc, k| acc + self.m[i][k] * v[k]);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..N {
            for j in 0..N {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> CMat2<T> {
    /// Kronecker product `self ⊗ other`, row index `2*i_self + i_other`.
    pub fn kron(&self, other: &CMat2<T>) -> CMat4<T> {
        CMat4::from_fn(|r, c| self.m[r / 2][c / 2] * other.m[r % 2][c % 2])
    }
}

impl<T, const N: usize> Index<(usize, usize)> for CMat<T, N> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.m[i][j]
    }
}

impl<T, const N: usize> IndexMut<(usize, usize)> for CMat<T, N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.m[i][j]
    }
}

impl<T: Real, const N: usize> Mul for &CMat<T, N> {
    type Output = CMat<T, N>;
    fn mul(self, rhs: Self) -> CMat<T, N> {
        CMat::from_fn(|i, j| (0..N).fold(Complex::zero(), |acc, k| acc + self.m[i][k] * rhs.m[k][j]))
    }
}

impl<T: Real, const N: usize> Mul for CMat<T, N> {
    type Output = CMat<T, N>;
    fn mul(self, rhs: Self) -> CMat<T, N> {
        Mul::mul(&self, &rhs)
    }
}

impl<T: Real, const N: usize> Add for CMat<T, N> {
    type Output = CMat<T, N>;
    fn add(self, rhs: Self) -> CMat<T, N> {
        CMat::from_fn(|i, j| self.m[i][j] + rhs.m[i][j])
    }
}

impl<T: Real, const N: usize> Sub for CMat<T, N> {
    type Output = CMat<T, N>;
    fn sub(self, rhs: Self) -> CMat<T, N> {
        CMat::from_fn(|i, j| self.m[i][j] - rhs.m[i][j])
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T, const N: usize> {
    /// Eigenvalues in ascending order.
    pub values: [T; N],
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat<T, N>,
}

impl<T: Real, const N: usize> HermitianEigen<T, N> {
    pub fn vector(&self, k: usize) -> [Complex<T>; N] {
        std::array::from_fn(|i| self.vectors.m[i][k])
    }

    /// Rebuilds `V f(D) V^dagger`.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> CMat<T, N> {
        let mut out = CMat::zeros();
        for k in 0..N {
            let w = f(self.values[k]);
            if w == T::zero() {
                continue;
            }
            let v = self.vector(k);
            for i in 0..N {
                for j in 0..N {
                    out.m[i][j] = out.m[i][j] + v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver for a Hermitian matrix. Only the
/// Hermitian part of `a` is used.
pub fn hermitian_eigen<T: Real, const N: usize>(a: &CMat<T, N>) -> HermitianEigen<T, N> {
    let mut a = a.hermitian_part();
    let mut v = CMat::<T, N>::identity();
    let eps = T::epsilon();

    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..N {
            scale = scale + a.m[i][i].re * a.m[i][i].re;
            for j in 0..N {
                if i != j {
                    off = off + a.m[i][j].norm_sqr();
                }
            }
        }
        if off <= eps * eps * (scale + off) || off == T::zero() {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.m[p][q];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                // Phase `apq = mag e^{i phi}` is removed by a diagonal unitary,
                // leaving a real symmetric 2x2 rotation.
                let phase = apq / mag;
                let app = a.m[p][p].re;
                let aqq = a.m[q][q].re;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // J = D R with D = diag(.., 1 at p, e^{-i phi} at q, ..).
                let jpp = Complex::new(c, T::zero());
                let jpq = Complex::new(s, T::zero());
                let jqp = phase.conj() * (-s);
                let jqq = phase.conj() * c;
                // A <- A J (columns p, q)
                for k in 0..N {
                    let akp = a.m[k][p];
                    let akq = a.m[k][q];
                    a.m[k][p] = akp * jpp + akq * jqp;
                    a.m[k][q] = akp * jpq + akq * jqq;
                }
                // A <- J^dagger A (rows p, q)
                for k in 0..N {
                    let apk = a.m[p][k];
                    let aqk = a.m[q][k];
                    a.m[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a.m[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a.m[p][q] = Complex::zero();
                a.m[q][p] = Complex::zero();
                a.m[p][p].im = T::zero();
                a.m[q][q].im = T::zero();
                for k in 0..N {
                    let vkp = v.m[k][p];
                    let vkq = v.m[k][q];
                    v.m[k][p] = vkp * jpp + vkq * jqp;
                    v.m[k][q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&x, &y| a.m[x][x].re.partial_cmp(&a.m[y][y].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = std::array::from_fn(|k| a.m[order[k]][order[k]].re);
    let vectors = CMat::from_fn(|i, k| v.m[i][order[k]]);
    HermitianEigen { values, vectors }
}

/// Singular values (descending) by one-sided Hestenes-Jacobi rotations on
/// the columns. Small singular values keep absolute accuracy ~ eps·‖A‖.
pub fn singular_values<T: Real, const N: usize>(a: &CMat<T, N>) -> [T; N] {
    let mut cols: [[Complex<T>; N]; N] = std::array::from_fn(|j| std::array::from_fn(|i| a.m[i][j]));
    let eps = T::epsilon();

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..N {
            for q in (p + 1)..N {
                let alpha: T = cols[p].iter().fold(T::zero(), |s, z| s + z.norm_sqr());
                let beta: T = cols[q].iter().fold(T::zero(), |s, z| s + z.norm_sqr());
                let gamma = cols[p]
                    .iter()
                    .zip(cols[q].iter())
                    .fold(Complex::zero(), |s: Complex<T>, (x, y)| s + x.conj() * *y);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = c * t;
                for i in 0..N {
                    let xp = cols[p][i];
                    let xq = cols[q][i] * phase.conj();
                    cols[p][i] = xp * c - xq * s;
                    cols[q][i] = xp * s + xq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: [T; N] = std::array::from_fn(|j| cols[j].iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt());
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Lower-triangular `L` with `A = L L^dagger` for Hermitian positive-definite
/// `A`. Returns `None` if a pivot is not strictly positive.
pub fn cholesky<T: Real, const N: usize>(a: &CMat<T, N>) -> Option<CMat<T, N>> {
    let mut l = CMat::<T, N>::zeros();
    for j in 0..N {
        let mut d = a.m[j][j].re;
        for k in 0..j {
            d = d - l.m[j][k].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let ljj = d.sqrt();
        l.m[j][j] = Complex::new(ljj, T::zero());
        for i in (j + 1)..N {
            let mut s = a.m[i][j];
            for k in 0..j {
                s = s - l.m[i][k] * l.m[j][k].conj();
            }
            l.m[i][j] = s / ljj;
        }
    }
    Some(l)
}

/// Least-squares solution of `A x = b` (rows of `A` given as slices) through
/// the normal equations with complete pivoting. `Err(rank)` when the design
/// is rank deficient.
pub fn least_squares<T: Real>(rows: &[Vec<T>], b: &[T], ncols: usize) -> Result<Vec<T>, usize> {
    let mut ata = vec![vec![T::zero(); ncols]; ncols];
    let mut atb = vec![T::zero(); ncols];
    for (row, &bk) in rows.iter().zip(b) {
        for i in 0..ncols {
            if row[i] == T::zero() {
                continue;
            }
            atb[i] = atb[i] + row[i] * bk;
            for j in 0..ncols {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
        }
    }

    let scale = ata
        .iter()
        .enumerate()
        .fold(T::zero(), |m, (i, r)| m.max(r[i].abs()));
    let tol = T::lit(1e-10) * scale.max(T::min_positive_value());

    let mut perm: Vec<usize> = (0..ncols).collect();
    let mut rank = 0;
    for k in 0..ncols {
        let (mut pr, mut pc, mut best) = (k, k, T::zero());
        for (i, row) in ata.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.abs() > best {
                    best = v.abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= tol {
            break;
        }
        rank += 1;
        ata.swap(k, pr);
        atb.swap(k, pr);
        for row in ata.iter_mut() {
            row.swap(k, pc);
        }
        perm.swap(k, pc);
        for i in (k + 1)..ncols {
            let f = ata[i][k] / ata[k][k];
            if f == T::zero() {
                continue;
            }
            for j in k..ncols {
                ata[i][j] = ata[i][j] - f * ata[k][j];
            }
            atb[i] = atb[i] - f * atb[k];
        }
    }
    if rank < ncols {
        return Err(rank);
    }

    let mut y = vec![T::zero(); ncols];
    for k in (0..ncols).rev() {
        let mut s = atb[k];
        for j in (k + 1)..ncols {
            s = s - ata[k][j] * y[j];
        }
        y[k] = s / ata[k][k];
    }
    let mut x = vec![T::zero(); ncols];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample_hermitian() -> CMat4<f64> {
        let a = CMat4::from_fn(|i, j| c((i * 3 + j) as f64 * 0.1 - 0.4, ((i + 2 * j) % 5) as f64 * 0.07 - 0.1));
        (a + a.adjoint()).scale(0.5)
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let a = sample_hermitian();
        let e = hermitian_eigen(&a);
        let back = e.map_values(|x| x);
        assert!(back.max_abs_diff(&a) < 1e-13);
        for k in 1..4 {
            assert!(e.values[k - 1] <= e.values[k]);
        }
        let vhv = e.vectors.adjoint() * e.vectors;
        assert!(vhv.max_abs_diff(&CMat4::identity()) < 1e-13);
    }

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let e = hermitian_eigen(&CMat4::diag([3.0, -1.0, 2.0, 0.5]));
        assert_eq!(e.values, [-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn singular_values_match_eigenvalues_of_gram() {
        let a = CMat4::from_fn(|i, j| c((i + j) as f64 * 0.3 - 0.5, (i as f64 - j as f64) * 0.2));
        let sv = singular_values(&a);
        let gram = a.adjoint() * a;
        let e = hermitian_eigen(&gram);
        for k in 0..4 {
            assert!((sv[k] * sv[k] - e.values[3 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_of_rank_one_are_tiny() {
        let v = [c(0.5, 0.1), c(0.2, -0.3), c(0.0, 0.4), c(0.6, 0.0)];
        let a = CMat4::outer(&v, &v);
        let sv = singular_values(&a);
        assert!(sv[1] < 1e-15 && sv[3] < 1e-15);
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = sample_hermitian() + CMat4::identity().scale(3.0);
        let l = cholesky(&a).unwrap();
        assert!((l * l.adjoint()).max_abs_diff(&a) < 1e-13);
        assert!(l[(0, 1)] == c(0.0, 0.0));
        assert!(cholesky(&CMat4::<f64>::diag([1.0, 0.0, 1.0, 1.0])).is_none());
    }

    #[test]
    fn least_squares_detects_rank() {
        let rows = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 2.0]];
        assert_eq!(least_squares(&rows, &[1.0, 2.0, 3.0], 3), Err(2));
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]];
        let x = least_squares(&rows, &[1.0, 4.0, 3.0], 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
