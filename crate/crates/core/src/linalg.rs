//! Small dense complex linear algebra.
//!
//! Everything here is sized for the receiver's state space (a handful of
//! complex dimensions), so storage is inline up to a 4x4 matrix and the
//! factorizations are the plain textbook loops.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Real;

type VecStore<T> = SmallVec<[Complex<T>; 4]>;
type MatStore<T> = SmallVec<[Complex<T>; 16]>;

/// Complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec<T> {
    data: VecStore<T>,
}

impl<T: Real> CVec<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: SmallVec::from_elem(Complex::new(T::zero(), T::zero()), n),
        }
    }

    pub fn from_slice(xs: &[Complex<T>]) -> Self {
        Self {
            data: SmallVec::from_slice(xs),
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> Complex<T>) -> Self {
        Self {
            data: (0..n).map(f).collect(),
        }
    }

    /// Real-valued vector (zero imaginary parts).
    pub fn from_reals(xs: &[T]) -> Self {
        Self::from_fn(xs.len(), |i| Complex::new(xs[i], T::zero()))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex<T>> {
        self.data.iter()
    }

    /// `self^H other`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            data: self.data.iter().map(|z| z.scale(s)).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self {
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + b.scale(s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Contiguous sub-vector `[start, start + len)`.
    pub fn segment(&self, start: usize, len: usize) -> Self {
        Self::from_slice(&self.data[start..start + len])
    }

    /// Concatenation `[self; other]`.
    pub fn stack(&self, other: &Self) -> Self {
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<usize> for CVec<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, i: usize) -> &Complex<T> {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for CVec<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.data[i]
    }
}

impl<T: Real> Add for &CVec<T> {
    type Output = CVec<T>;
    fn add(self, rhs: &CVec<T>) -> CVec<T> {
        debug_assert_eq!(self.len(), rhs.len());
        CVec {
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CVec<T> {
    type Output = CVec<T>;
    fn sub(self, rhs: &CVec<T>) -> CVec<T> {
        debug_assert_eq!(self.len(), rhs.len());
        CVec {
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: MatStore<T>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: SmallVec::from_elem(Complex::new(T::zero(), T::zero()), rows * cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diag(&vec![T::one(); n])
    }

    pub fn from_real_diag(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = MatStore::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// `v v^H`.
    pub fn outer(v: &CVec<T>) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.scale(s)).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + b.scale(s);
        }
    }

    /// Adds `s` to every diagonal entry.
    pub fn add_diag(&mut self, s: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)].re = self[(i, i)].re + s;
        }
    }

    pub fn mul_vec(&self, v: &CVec<T>) -> CVec<T> {
        debug_assert_eq!(self.cols, v.len());
        CVec::from_fn(self.rows, |i| {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            row.iter()
                .zip(v.iter())
                .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
        })
    }

    /// Real part of the trace.
    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].re).sum()
    }

    /// Block `[r0, r0 + nr) x [c0, c0 + nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()).scale(half)
        })
    }

    /// Largest elementwise `|A - A^H|`.
    pub fn hermitian_error(&self) -> T {
        let mut e = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                e = e.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        e
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Hermitian Cholesky factorization `A = L L^H`.
    ///
    /// Only the lower triangle of `self` is read.
    pub fn cholesky(&self) -> Result<Cholesky<T>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("cholesky of non-square matrix".into()));
        }
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d = d - l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::SingularCovariance);
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex::new(ljj, T::zero());
            let inv = ljj.recip();
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s.scale(inv);
            }
        }
        Ok(Cholesky { l })
    }

    /// Semidefinite factor `A = L L^H` that tolerates zero pivots (below
    /// `tol * trace`); such columns of `L` are set to zero.
    pub fn psd_factor(&self) -> Self {
        let n = self.rows;
        let tol = T::lit(1e-13) * self.trace().abs();
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d = d - l[(j, k)].norm_sqr();
            }
            if d <= tol {
                continue;
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex::new(ljj, T::zero());
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s.scale(ljj.recip());
            }
        }
        l
    }

    /// Real symmetric embedding `[[Re A, -Im A], [Im A, Re A]]` as a row-major
    /// `2n x 2n` buffer. Each eigenvalue of a Hermitian `A` appears twice in it.
    fn real_embedding(&self) -> Vec<T> {
        let n = self.rows;
        let m = 2 * n;
        let mut e = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                e[i * m + j] = z.re;
                e[(i + n) * m + j + n] = z.re;
                e[i * m + j + n] = -z.im;
                e[(i + n) * m + j] = z.im;
            }
        }
        e
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        let h = self.hermitian_part();
        let m = 2 * h.rows;
        let (mut vals, _) = jacobi_eigen(h.real_embedding(), m);
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // eigenvalues come in pairs
        vals.into_iter().step_by(2).collect()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.hermitian_eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    /// Replaces every eigenvalue of the Hermitian part below `floor` by `floor`.
    pub fn clamp_eigenvalues(&self, floor: T) -> Self {
        let h = self.hermitian_part();
        let n = h.rows;
        let m = 2 * n;
        let (vals, vecs) = jacobi_eigen(h.real_embedding(), m);
        let clamped: Vec<T> = vals.iter().map(|&v| v.max(floor)).collect();
        // V diag(clamped) V^T is a spectral function of the embedding, so it
        // keeps the complex block structure.
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut re = T::zero();
                let mut im = T::zero();
                for k in 0..m {
                    re = re + vecs[i * m + k] * clamped[k] * vecs[j * m + k];
                    im = im + vecs[(i + n) * m + k] * clamped[k] * vecs[j * m + k];
                }
                out[(i, j)] = Complex::new(re, im);
            }
        }
        out.hermitian_part()
    }

    /// Symmetrizes and lifts eigenvalues below `rel * trace` up to that floor.
    ///
    /// The eigen-decomposition is skipped when a Cholesky of `A - floor I`
    /// succeeds, since then every eigenvalue is already above the floor.
    pub fn repair_psd(&self, rel: T) -> Self {
        let h = self.hermitian_part();
        let floor = rel * h.trace().abs();
        let mut shifted = h.clone();
        shifted.add_diag(-floor);
        if shifted.cholesky().is_ok() {
            return h;
        }
        h.clamp_eigenvalues(floor)
    }

    /// Positive semidefinite within `-rel * trace`, Hermitian within `herm_tol`.
    pub fn is_psd(&self, herm_tol: T, rel: T) -> bool {
        self.is_square() && self.hermitian_error() <= herm_tol && self.min_eigenvalue() >= -rel * self.trace().abs()
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMat<T> {
    type Output = CMat<T>;
    fn add(self, rhs: &CMat<T>) -> CMat<T> {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMat<T> {
    type Output = CMat<T>;
    fn sub(self, rhs: &CMat<T>) -> CMat<T> {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMat<T> {
    type Output = CMat<T>;
    fn mul(self, rhs: &CMat<T>) -> CMat<T> {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: CMat<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(&self) -> &CMat<T> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    /// `log det A = 2 sum log L_ii`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.dim()).map(|i| self.l[(i, i)].re.ln()).sum::<T>() * two
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &CVec<T>) -> CVec<T> {
        let n = self.dim();
        let mut z = b.clone();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * z[k];
            }
            z[i] = s.unscale(self.l[(i, i)].re);
        }
        z
    }

    /// Solves `L^H x = z`.
    pub fn backward(&self, z: &CVec<T>) -> CVec<T> {
        let n = self.dim();
        let mut x = z.clone();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - self.l[(k, i)].conj() * x[k];
            }
            x[i] = s.unscale(self.l[(i, i)].re);
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &CVec<T>) -> CVec<T> {
        self.backward(&self.forward(b))
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &CMat<T>) -> CMat<T> {
        let mut out = CMat::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col = CVec::from_fn(b.rows, |i| b[(i, j)]);
            let x = self.solve(&col);
            for i in 0..b.rows {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    /// `b^H A^{-1} b`.
    pub fn quad_form(&self, b: &CVec<T>) -> T {
        self.forward(b).norm_sqr()
    }

    /// `A^{-1}`, Hermitian.
    pub fn inverse(&self) -> CMat<T> {
        let n = self.dim();
        // L^{-1}, lower triangular, column by column
        let l = &self.l;
        let mut linv = CMat::zeros(n, n);
        for j in 0..n {
            linv[(j, j)] = Complex::new(l[(j, j)].re.recip(), T::zero());
            for i in j + 1..n {
                let mut s = Complex::new(T::zero(), T::zero());
                for k in j..i {
                    s = s - l[(i, k)] * linv[(k, j)];
                }
                linv[(i, j)] = s.unscale(l[(i, i)].re);
            }
        }
        // A^{-1} = L^{-H} L^{-1}
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = Complex::new(T::zero(), T::zero());
                for k in i.max(j)..n {
                    s = s + linv[(k, i)].conj() * linv[(k, j)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        out
    }
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric row-major `n x n`
/// matrix. Returns eigenvalues and the eigenvector matrix (eigenvectors in
/// columns, row-major).
fn jacobi_eigen<T: Real>(mut a: Vec<T>, n: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + a[i * n + i] * a[i * n + i];
            for j in 0..n {
                if i != j {
                    off = off + a[i * n + j] * a[i * n + j];
                }
            }
        }
        if off <= eps * eps * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}
