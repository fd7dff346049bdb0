use itertools::Itertools;
use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::Real;

pub const L0_MAX_COLUMNS: usize = 32;
pub const L0_MAX_SPARSITY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L0Result {
    /// Smallest support size that explains `y`, if any up to the cap.
    pub k_star: Option<usize>,
    /// Every support of size `k_star` that explains `y`.
    pub supports: Vec<Vec<usize>>,
}

impl L0Result {
    pub fn is_unique(&self) -> bool {
        self.k_star.is_some() && self.supports.len() == 1
    }
}

/// Exhaustive search for the sparsest `x` with `‖D x − y‖₂ ≤ tol`.
///
/// `tol` defaults to `1e-8·‖y‖₂`. Restricted to `N ≤ 32` and `k_max ≤ 4`.
pub fn brute_force_l0<T: Real>(
    d: &ComplexMatrix<T>,
    y: &DVector<Complex<T>>,
    k_max: usize,
    tol: Option<T>,
) -> Result<L0Result> {
    if d.cols() > L0_MAX_COLUMNS || k_max > L0_MAX_SPARSITY {
        return Err(Error::CapExceeded(format!(
            "exhaustive search allows N <= {L0_MAX_COLUMNS} and k <= {L0_MAX_SPARSITY} (got N = {}, k = {k_max})",
            d.cols()
        )));
    }
    if y.len() != d.rows() {
        return Err(Error::DimensionMismatch(format!(
            "measurement has length {}, dictionary has {} rows",
            y.len(),
            d.rows()
        )));
    }
    let y_norm = y.norm();
    let tol = tol.unwrap_or_else(|| T::lit(1e-8) * y_norm);
    if y_norm <= tol {
        return Ok(L0Result { k_star: Some(0), supports: vec![Vec::new()] });
    }
    for k in 1..=k_max.min(d.cols()) {
        let supports: Vec<Vec<usize>> =
            (0..d.cols()).combinations(k).filter(|support| residual(d, y, support).is_some_and(|r| r <= tol)).collect();
        if !supports.is_empty() {
            return Ok(L0Result { k_star: Some(k), supports });
        }
    }
    Ok(L0Result { k_star: None, supports: Vec::new() })
}

fn residual<T: Real>(d: &ComplexMatrix<T>, y: &DVector<Complex<T>>, support: &[usize]) -> Option<T> {
    let sub = d.as_dmatrix().select_columns(support);
    let coeffs = sub.clone().svd(true, true).solve(y, T::lit(1e-12)).ok()?;
    Some((sub * coeffs - y).norm())
}
