//! Dense complex square matrices.
//!
//! The simulated systems have at most four levels, so everything here is a
//! plain row-major `Vec` with O(n³) kernels. Eigenvalues of Hermitian
//! matrices come from cyclic Jacobi sweeps on the real symmetric embedding
//! `[[A, -B], [B, A]]` of `A + iB`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ComplexMatrix<T> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self { dim, entries: vec![C::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { C::one() } else { C::zero() })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { re(values[i]) } else { C::zero() })
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C<T>], v: &[C<T>]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
        }
        Ok(Self::from_fn(u.len(), |i, j| u[i] * v[j].conj()))
    }

    /// Projector |u⟩⟨u|.
    pub fn projector(u: &[C<T>]) -> Self {
        Self::from_fn(u.len(), |i, j| u[i] * u[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [C<T>] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<C<T>> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * k).collect() }
    }

    pub fn scale_real(&self, k: T) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * k).collect() }
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// {A, B} = AB + BA.
    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// A X A†.
    pub fn congruence(&self, x: &Self) -> Self {
        &(self * x) * &self.adjoint()
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dimension");
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// ⟨u|A|v⟩.
    pub fn sandwich(&self, u: &[C<T>], v: &[C<T>]) -> C<T> {
        let av = self.mul_vec(v);
        u.iter().zip(av).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> T {
        (0..self.dim).map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<T>()).fold(T::zero(), T::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    /// max over (i, j) of |m[i][j] − conj(m[j][i])|.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Tolerance below which a matrix counts as Hermitian for the
    /// eigenvalue routines.
    fn hermitian_tolerance(&self) -> T {
        let floor = T::lit(1e-10).max(T::epsilon() * T::lit(256.0));
        floor * self.max_abs().max(T::one())
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<T>> {
        let defect = self.hermitian_defect();
        if defect > self.hermitian_tolerance() {
            return Err(Error::NotHermitian { defect: defect.as_f64() });
        }
        let n = self.dim;
        let m = 2 * n;
        let mut a = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                // Symmetrize so round-off in the input cannot stall the sweeps.
                let z = (self[(i, j)] + self[(j, i)].conj()) * T::lit(0.5);
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[(i + n) * m + j] = z.im;
                a[i * m + (j + n)] = -z.im;
            }
        }
        jacobi_symmetric(&mut a, m);
        let mut ev: Vec<T> = (0..m).map(|i| a[i * m + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        // The embedding doubles every eigenvalue.
        Ok(ev.chunks(2).map(|p| (p[0] + p[1]) * T::lit(0.5)).collect())
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eigenvalues_hermitian()?[0])
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn expm(&self) -> Self {
        let norm = self.one_norm();
        let half = T::lit(0.5);
        let mut squarings = 0u32;
        let mut scaled_norm = norm;
        while scaled_norm > half {
            scaled_norm *= half;
            squarings += 1;
        }
        let a = self.scale_real(T::lit(2.0).powi(-(squarings as i32)));
        let mut result = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=30 {
            term = (&term * &a).scale_real(T::one() / T::from_usize(k).expect("small integer"));
            result = &result + &term;
            if term.max_abs() <= T::epsilon() * result.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }
}

/// In-place cyclic Jacobi diagonalization of a real symmetric `m × m`
/// matrix; on return the diagonal holds the eigenvalues.
fn jacobi_symmetric<T: Real>(a: &mut [T], m: usize) {
    let frob: T = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    if frob == T::zero() {
        return;
    }
    let threshold = T::epsilon() * frob;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..m {
            for q in (p + 1)..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off.sqrt() <= threshold {
            return;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = cs * akp - sn * akq;
                    a[k * m + q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = cs * apk - sn * aqk;
                    a[q * m + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
}

/// max over (i, j) of |m[i][j] − conj(m[j][i])|.
pub fn hermitian_defect<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.hermitian_defect()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    m.min_eigenvalue()
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.entries[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.entries[i * self.dim + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![C::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        ComplexMatrix { dim: n, entries: out }
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn neg(self) -> ComplexMatrix<T> {
        ComplexMatrix { dim: self.dim, entries: self.entries.iter().map(|a| -a).collect() }
    }
}
