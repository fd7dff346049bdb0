//! Partitioned dictionaries `D = [A B]`: construction, coherence and spectral statistics.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{max_abs_entry, ComplexMatrix};
use crate::scalar::{modulus, polar, Real};

/// An `m x N` dictionary with unit-norm columns, split after column `Na`
/// into the sub-dictionaries `A` (first `Na` columns) and `B` (the rest).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedDictionary<T: Real> {
    matrix: ComplexMatrix<T>,
    split: usize,
}

impl<T: Real> PartitionedDictionary<T> {
    /// Validates unit column norms against [`Real::unit_tol`].
    pub fn new(matrix: ComplexMatrix<T>, split: usize) -> Result<Self> {
        Self::with_tolerance(matrix, split, T::unit_tol())
    }

    pub fn with_tolerance(matrix: ComplexMatrix<T>, split: usize, tol: T) -> Result<Self> {
        if split > matrix.cols() {
            return Err(Error::InvalidArgument(format!("split point Na = {split} exceeds N = {}", matrix.cols())));
        }
        for (index, norm) in matrix.column_norms().into_iter().enumerate() {
            if (norm - T::one()).abs() > tol {
                return Err(Error::NonUnitColumn { index, norm: norm.as_f64() });
            }
        }
        Ok(Self { matrix, split })
    }

    /// Same columns, different split point.
    pub fn with_split(&self, split: usize) -> Result<Self> {
        if split > self.n() {
            return Err(Error::InvalidArgument(format!("split point Na = {split} exceeds N = {}", self.n())));
        }
        Ok(Self { matrix: self.matrix.clone(), split })
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    #[inline]
    pub fn na(&self) -> usize {
        self.split
    }

    #[inline]
    pub fn nb(&self) -> usize {
        self.n() - self.split
    }

    pub fn block_a(&self) -> Option<ComplexMatrix<T>> {
        self.matrix.column_range(0, self.split)
    }

    pub fn block_b(&self) -> Option<ComplexMatrix<T>> {
        self.matrix.column_range(self.split, self.n())
    }
}

/// Coherence and spectral summary of a [`PartitionedDictionary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DictionaryStats<T: Real> {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Na")]
    pub na: usize,
    #[serde(rename = "Nb")]
    pub nb: usize,
    pub mu: T,
    pub mu_a: T,
    pub mu_b: T,
    /// `false` when `A` has fewer than two columns and `mu_a` is reported as 0.
    pub mu_a_defined: bool,
    pub mu_b_defined: bool,
    pub spec_a: T,
    pub spec_b: T,
    pub spec_d: T,
    pub welch: T,
    /// `|‖A‖² − Na/m|`
    pub tight_dev_a: T,
    pub tight_dev_b: T,
}

fn max_off_diagonal<T: Real>(gram: &DMatrix<Complex<T>>, lo: usize, hi: usize) -> T {
    let mut best = T::zero();
    for j in lo..hi {
        for i in lo..j {
            best = best.max(modulus(gram[(i, j)]));
        }
    }
    best
}

/// `max_{i≠j} |m_iᴴ m_j|`.
pub fn coherence<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    if m.cols() < 2 {
        return Err(Error::UndefinedCoherence(m.cols()));
    }
    Ok(max_off_diagonal(&m.gram(), 0, m.cols()))
}

/// `max_{i,j} |a_iᴴ b_j|`.
pub fn cross_coherence<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    Ok(max_abs_entry(&a.adjoint_mul(b)?))
}

/// Welch lower bound `√((N−m)/(m(N−1)))` on the coherence of `N` unit vectors in `C^m`.
pub fn welch_bound<T: Real>(m: usize, n: usize) -> Result<T> {
    if m == 0 || n < 2 {
        return Err(Error::InvalidArgument(format!("Welch bound needs m >= 1 and N >= 2 (got m = {m}, N = {n})")));
    }
    if n < m {
        return Err(Error::InvalidArgument(format!(
            "Welch bound is not defined for undercomplete dictionaries (N = {n} < m = {m})"
        )));
    }
    let (m, n) = (T::from_count(m), T::from_count(n));
    Ok(((n - m) / (m * (n - T::one()))).sqrt())
}

pub fn is_odd_prime(p: usize) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `[I_m, F_m]` with `F_m` the unitary DFT matrix; `Na = m`.
pub fn build_two_onb<T: Real>(m: usize) -> Result<PartitionedDictionary<T>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("two-ONB dictionary needs m >= 2 (got {m})")));
    }
    let scale = T::one() / T::from_count(m).sqrt();
    let step = T::two_pi() / T::from_count(m);
    let matrix = ComplexMatrix::from_fn(m, 2 * m, |t, col| {
        if col < m {
            if t == col {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        } else {
            let k = col - m;
            polar(scale, -step * T::from_count((t * k) % m))
        }
    })?;
    PartitionedDictionary::new(matrix, m)
}

/// The `p + 1` mutually unbiased bases of `C^p` for an odd prime `p`:
/// the identity followed by the chirp bases
/// `v_{a,b}[t] = p^{-1/2} exp(2πi (a t² + b t) / p)`, `a, b = 0..p`.
/// `A` is the identity basis (`Na = p`).
pub fn build_mub<T: Real>(p: usize) -> Result<PartitionedDictionary<T>> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let scale = T::one() / T::from_count(p).sqrt();
    let step = T::two_pi() / T::from_count(p);
    let matrix = ComplexMatrix::from_fn(p, p * (p + 1), |t, col| {
        if col < p {
            if t == col {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        } else {
            let (a, b) = ((col - p) / p, (col - p) % p);
            let phase = (a * t * t + b * t) % p;
            polar(scale, step * T::from_count(phase))
        }
    })?;
    PartitionedDictionary::new(matrix, p)
}

/// `N` columns drawn i.i.d. uniformly from the unit sphere of `C^m`; `Na = 0`.
pub fn build_random_dictionary<T: Real>(m: usize, n: usize, seed: u64) -> Result<PartitionedDictionary<T>> {
    if m == 0 || n < m {
        return Err(Error::InvalidArgument(format!("random dictionary needs N >= m >= 1 (got m = {m}, N = {n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = DMatrix::<Complex<f64>>::zeros(m, n);
    for c in 0..n {
        loop {
            for r in 0..m {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                raw[(r, c)] = Complex::new(re, im);
            }
            let norm = raw.column(c).norm();
            if norm > 1e-6 {
                raw.column_mut(c).unscale_mut(norm);
                break;
            }
        }
    }
    let matrix = ComplexMatrix::from_dmatrix(raw.map(|z| Complex::new(T::lit(z.re), T::lit(z.im))))?;
    PartitionedDictionary::new(matrix, 0)
}

/// Coherences, spectral norms, Welch bound and tight-frame deviations.
///
/// Sub-block coherences of blocks with fewer than two columns are reported
/// as 0 and flagged through `mu_a_defined` / `mu_b_defined`.
pub fn analyze<T: Real>(d: &PartitionedDictionary<T>) -> DictionaryStats<T> {
    let (m, n, na, nb) = (d.m(), d.n(), d.na(), d.nb());
    let gram = d.matrix().gram();
    let mu = max_off_diagonal(&gram, 0, n);
    let mu_a = max_off_diagonal(&gram, 0, na);
    let mu_b = max_off_diagonal(&gram, na, n);
    let spec_a = d.block_a().map_or_else(T::zero, |a| a.spectral_norm());
    let spec_b = d.block_b().map_or_else(T::zero, |b| b.spectral_norm());
    let spec_d = d.matrix().spectral_norm();
    let welch = welch_bound(m, n).unwrap_or_else(|_| T::zero());
    let mf = T::from_count(m);
    DictionaryStats {
        m,
        n,
        na,
        nb,
        mu,
        mu_a,
        mu_b,
        mu_a_defined: na >= 2,
        mu_b_defined: nb >= 2,
        spec_a,
        spec_b,
        spec_d,
        welch,
        tight_dev_a: (spec_a * spec_a - T::from_count(na) / mf).abs(),
        tight_dev_b: (spec_b * spec_b - T::from_count(nb) / mf).abs(),
    }
}
