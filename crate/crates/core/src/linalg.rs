//! Small dense complex matrices and the reflection-based orthonormal
//! completion used to parametrize the communication constraint.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    /// Outer product `x yᵀ` (no conjugation of `y`).
    pub fn outer(x: &[C64], y: &[C64]) -> Self {
        Self::from_fn(x.len(), y.len(), |r, c| x[r] * y[c])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self† · x`, without forming the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: x.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (r, xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        Ok(out)
    }

    /// `x† · self`, the row vector obtained by projecting every column onto `x`.
    pub fn left_project(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: x.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (r, xr) in x.iter().enumerate() {
            let w = xr.conj();
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += w * a;
            }
        }
        Ok(out)
    }

    /// Squared Frobenius norm, i.e. `tr(A A†)`.
    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl core::ops::Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shapes differ");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Conjugate-linear inner product `x† y`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    libm::sqrt(norm_sqr(x))
}

/// Unitary matrix whose first column is parallel to `x`.
///
/// Built from the single Householder reflection `H = I - 2 w w† / (w† w)`
/// with `w = x - beta e1`, `beta = -exp(i arg x0) ||x||`, so that
/// `H x = beta e1`. `H` is Hermitian and unitary, hence `H e1 = x / beta`
/// and columns `1..n` are an orthonormal basis of the complement of `x`.
/// The sign choice for `beta` keeps `w` away from cancellation.
pub fn householder_completion(x: &[C64]) -> Result<CMatrix> {
    let n = x.len();
    let nrm = norm(x);
    if n == 0 || nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::InvalidArray("cannot complete a zero or non-finite vector"));
    }
    let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
    let beta = -phase * nrm;

    let mut w = x.to_vec();
    w[0] -= beta;
    let wnorm2 = norm_sqr(&w);

    Ok(CMatrix::from_fn(n, n, |r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        C64::new(delta, 0.0) - w[r] * w[c].conj() * (2.0 / wnorm2)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn completion_is_unitary_with_parallel_first_column() {
        let x = [c(0.3, -1.2), c(2.0, 0.5), c(-0.7, 0.0), c(0.0, 0.9)];
        let h = householder_completion(&x).unwrap();
        let gram = h.adjoint().matmul(&h).unwrap();
        assert!(gram.max_abs_diff(&CMatrix::identity(4)) < 1e-14);

        let first = h.column(0);
        let overlap = dot(&first, &x).norm();
        assert!((overlap - norm(&x)).abs() < 1e-13);
        for col in 1..4 {
            assert!(dot(&h.column(col), &x).norm() < 1e-14);
        }
    }

    #[test]
    fn completion_with_zero_leading_entry() {
        let x = [c(0.0, 0.0), c(1.0, 0.0)];
        let h = householder_completion(&x).unwrap();
        assert!(dot(&h.column(1), &x).norm() < 1e-15);
        assert!((norm(&h.column(1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn completion_rejects_zero_vector() {
        assert!(householder_completion(&[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn matvec_shapes() {
        let m = CMatrix::from_fn(2, 3, |r, c| C64::new((r * 3 + c) as f64, 1.0));
        assert_eq!(m.mul_vec(&[c(1.0, 0.0); 2]), Err(Error::DimensionMismatch { expected: 3, found: 2 }));
        let x = [c(1.0, 2.0), c(-1.0, 0.5)];
        let direct = m.adjoint().mul_vec(&x).unwrap();
        let fused = m.adjoint_mul_vec(&x).unwrap();
        for (a, b) in direct.iter().zip(&fused) {
            assert!((a - b).norm() < 1e-14);
        }
        let row = m.left_project(&x).unwrap();
        for (a, b) in row.iter().zip(&fused) {
            assert!((a - b.conj()).norm() < 1e-14);
        }
    }
}
