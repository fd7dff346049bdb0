//! Dense complex matrices with finite entries.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{modulus, Real};

/// A non-empty dense complex matrix whose entries are all finite.
///
/// Storage is column-major (nalgebra); the row-major view is only used for
/// serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    inner: DMatrix<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn from_dmatrix(inner: DMatrix<Complex<T>>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix must be non-empty (got {}x{})",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if let Some(pos) = inner.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            let (r, c) = (pos % inner.nrows(), pos / inner.nrows());
            return Err(Error::InvalidArgument(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self { inner })
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::identity(n, n))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.inner[(row, col)]
    }

    #[inline]
    pub fn as_dmatrix(&self) -> &DMatrix<Complex<T>> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex<T>> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.inner[(r, c)]);
            }
        }
        out
    }

    pub fn column_norm(&self, col: usize) -> T {
        self.inner.column(col).norm()
    }

    pub fn column_norms(&self) -> Vec<T> {
        (0..self.cols()).map(|c| self.column_norm(c)).collect()
    }

    /// Columns `start..end`, or `None` if the range is empty.
    pub fn column_range(&self, start: usize, end: usize) -> Option<Self> {
        if start >= end || end > self.cols() {
            return None;
        }
        Some(Self { inner: self.inner.columns(start, end - start).into_owned() })
    }

    /// Columns at `indices`, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.cols()) {
            return Err(Error::IndexSet(format!("column {bad} out of range for {} columns", self.cols())));
        }
        Self::from_dmatrix(self.inner.select_columns(indices))
    }

    /// `selfᴴ · other`.
    pub fn adjoint_mul(&self, other: &Self) -> Result<DMatrix<Complex<T>>> {
        if self.rows() != other.rows() {
            return Err(Error::DimensionMismatch(format!("row counts differ: {} vs {}", self.rows(), other.rows())));
        }
        Ok(self.inner.ad_mul(&other.inner))
    }

    pub fn gram(&self) -> DMatrix<Complex<T>> {
        self.inner.ad_mul(&self.inner)
    }

    /// Singular values in descending order (`min(rows, cols)` of them).
    pub fn singular_values(&self) -> Vec<T> {
        singular_values(&self.inner)
    }

    pub fn spectral_norm(&self) -> T {
        spectral_norm_of(&self.inner)
    }
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.spectral_norm()
}

pub(crate) fn singular_values<T: Real>(m: &DMatrix<Complex<T>>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<T> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Spectral norm of an arbitrary (possibly empty) matrix; 0 for empty.
pub(crate) fn spectral_norm_of<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Largest entry modulus; 0 for an empty matrix.
pub(crate) fn max_abs_entry<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, &z| acc.max(modulus(z)))
}

/// `‖G - I‖` for a square matrix `G`.
pub(crate) fn hollow_norm<T: Real>(gram: &DMatrix<Complex<T>>) -> T {
    let mut h = gram.clone();
    for i in 0..h.nrows().min(h.ncols()) {
        h[(i, i)] -= Complex::new(T::one(), T::zero());
    }
    spectral_norm_of(&h)
}
