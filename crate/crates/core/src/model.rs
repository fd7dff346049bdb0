//! Hybrid sparse coefficient model: arbitrary support on `A`, uniformly random
//! support on `B`, continuous magnitudes and i.i.d. uniform phases.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dictionary::PartitionedDictionary;
use crate::error::{Error, Result};
use crate::rng::{trial_rng, TrialRng};
use crate::scalar::{polar, Real};

/// Law of the moduli of the nonzero coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeLaw {
    /// Always 1. Not continuous; kept for worst-case style experiments.
    Unit,
    /// Modulus of a standard complex Gaussian (Rayleigh).
    #[default]
    HalfNormalModulus,
    /// Uniform on (0, 1].
    Uniform,
}

impl MagnitudeLaw {
    pub fn is_continuous(self) -> bool {
        !matches!(self, MagnitudeLaw::Unit)
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            MagnitudeLaw::Unit => 1.0,
            MagnitudeLaw::HalfNormalModulus => loop {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                let r = ((re * re + im * im) / 2.0).sqrt();
                if r > 1e-12 {
                    break r;
                }
            },
            MagnitudeLaw::Uniform => 1.0 - rng.random::<f64>(),
        }
    }
}

impl FromStr for MagnitudeLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Self::Unit),
            "half-normal-modulus" | "gaussian" => Ok(Self::HalfNormalModulus),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown magnitude law '{other}'"))),
        }
    }
}

/// Coefficient law. Phases are always i.i.d. uniform on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub magnitude: MagnitudeLaw,
}

/// How the support on `A` is picked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportStrategy {
    Prescribed(Vec<usize>),
    FirstN,
    /// `floor(i * Na / nA)` for `i = 0..nA`.
    Spread,
    /// Uniformly random. With a seed the set is fixed; without one it is
    /// drawn from the caller's stream (a fresh set per trial).
    RandomBaseline {
        seed: Option<u64>,
    },
}

impl SupportStrategy {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SupportStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportStrategy::Prescribed(idx) => {
                let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                write!(f, "prescribed:{}", list.join(";"))
            }
            SupportStrategy::FirstN => f.write_str("first-n"),
            SupportStrategy::Spread => f.write_str("spread"),
            SupportStrategy::RandomBaseline { seed: None } => f.write_str("random"),
            SupportStrategy::RandomBaseline { seed: Some(s) } => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for SupportStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown support strategy '{s}'"));
        match s.split_once(':') {
            None => match s {
                "first-n" => Ok(Self::FirstN),
                "spread" => Ok(Self::Spread),
                "random" | "random-baseline" => Ok(Self::RandomBaseline { seed: None }),
                _ => Err(bad()),
            },
            Some(("random" | "random-baseline", seed)) => {
                Ok(Self::RandomBaseline { seed: Some(seed.parse().map_err(|_| bad())?) })
            }
            Some(("prescribed", list)) => {
                let idx = list
                    .split([',', ';'])
                    .filter(|t| !t.is_empty())
                    .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Prescribed(idx))
            }
            _ => Err(bad()),
        }
    }
}

/// Uniformly random `nb`-subset of `0..nb_total`, sorted ascending.
pub fn sample_support_b<R: Rng + ?Sized>(nb_total: usize, nb: usize, rng: &mut R) -> Result<Vec<usize>> {
    if nb > nb_total {
        return Err(Error::IndexSet(format!("cannot draw {nb} columns from a block of {nb_total}")));
    }
    let mut idx = rand::seq::index::sample(rng, nb_total, nb).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

fn validate_index_set(idx: &[usize], bound: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(idx.len());
    for &i in idx {
        if i >= bound {
            return Err(Error::IndexSet(format!("index {i} out of range (block has {bound} columns)")));
        }
        if !seen.insert(i) {
            return Err(Error::IndexSet(format!("duplicate index {i}")));
        }
    }
    Ok(())
}

/// Picks `na` columns of a block of `na_total` columns according to `strategy`.
pub fn choose_support_a<R: Rng + ?Sized>(
    strategy: &SupportStrategy,
    na_total: usize,
    na: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if na > na_total {
        return Err(Error::IndexSet(format!("cannot choose {na} columns from a block of {na_total}")));
    }
    match strategy {
        SupportStrategy::Prescribed(idx) => {
            if idx.len() != na {
                return Err(Error::IndexSet(format!("prescribed support has {} indices, expected {na}", idx.len())));
            }
            validate_index_set(idx, na_total)?;
            Ok(idx.clone())
        }
        SupportStrategy::FirstN => Ok((0..na).collect()),
        SupportStrategy::Spread => Ok((0..na).map(|i| i * na_total / na).collect()),
        SupportStrategy::RandomBaseline { seed: Some(seed) } => {
            sample_support_b(na_total, na, &mut trial_rng(*seed, 0))
        }
        SupportStrategy::RandomBaseline { seed: None } => sample_support_b(na_total, na, rng),
    }
}

/// Support on `A` plus the number of random columns on `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridSupportSpec {
    pub support_a: Vec<usize>,
    pub nb: usize,
    pub seed: u64,
}

impl HybridSupportSpec {
    pub fn na(&self) -> usize {
        self.support_a.len()
    }

    /// Stream 0 of this spec's seed.
    pub fn rng(&self) -> TrialRng {
        trial_rng(self.seed, 0)
    }

    pub fn validate<T: Real>(&self, d: &PartitionedDictionary<T>) -> Result<()> {
        validate_index_set(&self.support_a, d.na())?;
        if self.nb > d.nb() {
            return Err(Error::IndexSet(format!("nB = {} exceeds Nb = {}", self.nb, d.nb())));
        }
        Ok(())
    }
}

/// A planted sparse vector `x` and its measurements `y = Dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseInstance<T: Real> {
    /// Global column indices (A part first, then `Na + j` for B columns).
    pub support: Vec<usize>,
    pub values: Vec<Complex<T>>,
    pub x: DVector<Complex<T>>,
    pub y: DVector<Complex<T>>,
}

impl<T: Real> SparseInstance<T> {
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }
}

pub fn sample_instance<T: Real, R: Rng + ?Sized>(
    d: &PartitionedDictionary<T>,
    spec: &HybridSupportSpec,
    coeff: &CoefficientSpec,
    rng: &mut R,
) -> Result<SparseInstance<T>> {
    spec.validate(d)?;
    let b_part = sample_support_b(d.nb(), spec.nb, rng)?;
    let support: Vec<usize> = spec.support_a.iter().copied().chain(b_part.into_iter().map(|j| d.na() + j)).collect();
    let values: Vec<Complex<T>> = support
        .iter()
        .map(|_| {
            let r = coeff.magnitude.sample(rng);
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            polar(T::lit(r), T::lit(theta))
        })
        .collect();
    let mut x = DVector::<Complex<T>>::zeros(d.n());
    for (&i, &v) in support.iter().zip(&values) {
        x[i] = v;
    }
    let y = d.matrix().as_dmatrix() * &x;
    Ok(SparseInstance { support, values, x, y })
}
