use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{modulus, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BpSolverConfig<T: Real> {
    /// Initial augmented-Lagrangian penalty. Adapted by residual balancing.
    pub step: T,
    pub max_iterations: usize,
    pub primal_tolerance: T,
    pub dual_tolerance: T,
}

impl<T: Real> Default for BpSolverConfig<T> {
    fn default() -> Self {
        Self { step: T::one(), max_iterations: 100_000, primal_tolerance: T::lit(1e-8), dual_tolerance: T::lit(1e-8) }
    }
}

impl<T: Real> BpSolverConfig<T> {
    // Negated comparisons so that NaN is rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !(self.primal_tolerance > T::zero()) || !(self.dual_tolerance > T::zero()) {
            return Err(Error::InvalidArgument("step and tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpSolution<T: Real> {
    pub x_hat: DVector<Complex<T>>,
    pub l1_value: T,
    /// `‖D x̂ − y‖₂ / max(1, ‖y‖₂)`
    pub feasibility_residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the returned point is the least-squares fit on the ADMM support.
    pub polished: bool,
}

pub(crate) fn l1_norm<T: Real>(x: &DVector<Complex<T>>) -> T {
    x.iter().fold(T::zero(), |acc, &z| acc + modulus(z))
}

fn soft_threshold<T: Real>(w: &DVector<Complex<T>>, kappa: T) -> DVector<Complex<T>> {
    w.map(|z| {
        let r = modulus(z);
        if r <= kappa {
            Complex::new(T::zero(), T::zero())
        } else {
            z * ((r - kappa) / r)
        }
    })
}

/// Basis pursuit `min ‖x‖₁ s.t. Dx = y` by ADMM.
///
/// The `x`-step is the Euclidean projection onto `{Dx = y}` and the `z`-step
/// soft-thresholds moduli, so complex phases are carried through unchanged.
/// Non-convergence is reported through `converged`, never as an error.
pub fn solve_bp<T: Real>(
    d: &ComplexMatrix<T>,
    y: &DVector<Complex<T>>,
    cfg: &BpSolverConfig<T>,
) -> Result<BpSolution<T>> {
    cfg.validate()?;
    let dm = d.as_dmatrix();
    if y.len() != dm.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "measurement has length {}, dictionary has {} rows",
            y.len(),
            dm.nrows()
        )));
    }
    let n = dm.ncols();
    let pinv = dm.clone().pseudo_inverse(T::lit(1e-12)).map_err(|e| Error::Numerical(e.to_string()))?;
    let project = |v: &DVector<Complex<T>>| -> DVector<Complex<T>> { v - &pinv * (dm * v - y) };

    let y_norm = y.norm();
    let scale = T::one().max(y_norm);
    let mut rho = cfg.step;
    let mut x = &pinv * y;
    let mut z = x.clone();
    let mut u = DVector::<Complex<T>>::zeros(n);
    let mut converged = false;
    let mut iterations = 0;
    let adapt_until = cfg.max_iterations / 2;

    for k in 1..=cfg.max_iterations {
        iterations = k;
        x = project(&(&z - &u));
        let z_prev = std::mem::replace(&mut z, soft_threshold(&(&x + &u), T::one() / rho));
        u += &x - &z;

        let r = (&x - &z).norm();
        let s = rho * (&z - &z_prev).norm();
        let dual_scale = T::one().max(rho * u.norm());
        if r <= cfg.primal_tolerance * scale && s <= cfg.dual_tolerance * dual_scale {
            converged = true;
            break;
        }
        if k % 10 == 0 && k < adapt_until {
            let ten = T::lit(10.0);
            let two = T::lit(2.0);
            if r > ten * s {
                rho *= two;
                u.unscale_mut(two);
            } else if s > ten * r {
                rho /= two;
                u.scale_mut(two);
            }
        }
    }

    let residual = |v: &DVector<Complex<T>>| (dm * v - y).norm() / scale;
    let mut x_hat = x;
    let mut polished = false;
    if let Some(candidate) = polish(d, y, &z) {
        if residual(&candidate) <= cfg.primal_tolerance
            && l1_norm(&candidate) <= l1_norm(&x_hat) + T::lit(1e-12) * scale
        {
            x_hat = candidate;
            polished = true;
        }
    }
    let feasibility_residual = residual(&x_hat);
    Ok(BpSolution {
        l1_value: l1_norm(&x_hat),
        feasibility_residual,
        iterations,
        converged: converged && feasibility_residual <= cfg.primal_tolerance,
        polished,
        x_hat,
    })
}

/// Least-squares refit of `y` on the support of `z`, if that support is
/// small enough to determine the coefficients.
fn polish<T: Real>(
    d: &ComplexMatrix<T>,
    y: &DVector<Complex<T>>,
    z: &DVector<Complex<T>>,
) -> Option<DVector<Complex<T>>> {
    let support: Vec<usize> = (0..z.len()).filter(|&i| modulus(z[i]) > T::zero()).collect();
    let mut out = DVector::<Complex<T>>::zeros(z.len());
    if support.is_empty() {
        return Some(out);
    }
    if support.len() > d.rows() {
        return None;
    }
    let sub = d.as_dmatrix().select_columns(&support);
    let coeffs = sub.svd(true, true).solve(y, T::lit(1e-12)).ok()?;
    for (k, &i) in support.iter().enumerate() {
        out[i] = coeffs[k];
    }
    Some(out)
}
