use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Rows of `b` processed per pass in [`ComplexMatrix::matmul`]; keeps the
/// active slice of `b` resident in L2.
const MATMUL_BLOCK: usize = 64;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(idx) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: idx / cols.max(1),
                col: idx % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Wraps a buffer produced internally by a numerical kernel. Finite
    /// entries are the kernel's responsibility.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Columns `start..end` as a new `rows x (end - start)` matrix.
    pub fn columns(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.cols {
            return Err(Error::OutOfRange(format!(
                "columns {start}..{end} of a matrix with {} columns",
                self.cols
            )));
        }
        let width = end - start;
        let mut data = Vec::with_capacity(self.rows * width);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[start..end]);
        }
        Ok(Self::from_raw(self.rows, width, data))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, z) in self.row(i).iter().enumerate() {
                out.data[j * self.rows + i] = z.conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &z) in self.row(i).iter().enumerate() {
                out.data[j * self.rows + i] = z;
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![C64::zero(); m * n];
        for kb in (0..k).step_by(MATMUL_BLOCK) {
            let kend = (kb + MATMUL_BLOCK).min(k);
            for i in 0..m {
                let arow = &self.data[i * k..(i + 1) * k];
                let crow = &mut out[i * n..(i + 1) * n];
                for (kk, &a) in arow.iter().enumerate().take(kend).skip(kb) {
                    if a.is_zero() {
                        continue;
                    }
                    let brow = &rhs.data[kk * n..(kk + 1) * n];
                    for (c, &b) in crow.iter_mut().zip(brow) {
                        c.re += a.re * b.re - a.im * b.im;
                        c.im += a.re * b.im + a.im * b.re;
                    }
                }
            }
        }
        Ok(Self::from_raw(m, n, out))
    }

    /// `self * self^H`, exploiting the Hermitian result.
    pub fn gram(&self) -> Self {
        let p = self.rows;
        let mut out = Self::zeros(p, p);
        for i in 0..p {
            let ri = self.row(i);
            for j in i..p {
                let rj = self.row(j);
                let mut acc = C64::zero();
                for (a, b) in ri.iter().zip(rj) {
                    acc.re += a.re * b.re + a.im * b.im;
                    acc.im += a.im * b.re - a.re * b.im;
                }
                out.data[i * p + j] = acc;
                out.data[j * p + i] = acc.conj();
            }
            out.data[i * p + i].im = 0.0;
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| z * s).collect(),
        )
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| z * s).collect(),
        )
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    /// `||self - other||_F`; panics on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `||self^H self - I||_F`, the departure of the columns from orthonormality.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().gram();
        g.distance(&Self::identity(self.cols))
    }

    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self[(i, j)].norm() <= tol))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        if self.rows * self.cols > 64 {
            return write!(f, "  [...]");
        }
        for i in 0..self.rows {
            write!(f, "  [")?;
            for (j, z) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        let err = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
    }

    #[test]
    fn matmul_matches_naive_triple_loop() {
        let a = ComplexMatrix::from_fn(7, 130, |i, j| c((i * 3 + j) as f64 * 0.1, (j as f64) - 2.0 * i as f64));
        let b = ComplexMatrix::from_fn(130, 5, |i, j| c((i as f64).sin(), (j as f64 * 0.3).cos()));
        let fast = a.matmul(&b).unwrap();
        for i in 0..7 {
            for j in 0..5 {
                let naive: C64 = (0..130).map(|k| a[(i, k)] * b[(k, j)]).sum();
                assert!((fast[(i, j)] - naive).norm() < 1e-9 * naive.norm().max(1.0));
            }
        }
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn gram_equals_product_with_adjoint() {
        let a = ComplexMatrix::from_fn(4, 9, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.5));
        let g = a.gram();
        let reference = a.matmul(&a.adjoint()).unwrap();
        assert!(g.distance(&reference) < 1e-10);
    }

    #[test]
    fn columns_slices_and_bounds() {
        let a = ComplexMatrix::from_fn(2, 4, |i, j| c((10 * i + j) as f64, 0.0));
        let w = a.columns(1, 3).unwrap();
        assert_eq!(w.row(1), &[c(11.0, 0.0), c(12.0, 0.0)]);
        assert!(a.columns(2, 5).is_err());
    }
}
