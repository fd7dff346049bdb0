//! Smallest singular values of hybrid sub-dictionaries and the chain of norm
//! and moment bounds that controls them.
//!
//! A sub-dictionary `S = [A' B']` holds `nA` chosen columns of `A` followed by
//! `nB` uniformly random columns of `B`. The hollow Gram norms are
//! `Ξ_S = ‖SᴴS − I‖`, `Ξ_A = ‖A'ᴴA' − I‖`, `Ξ_B = ‖B'ᴴB' − I‖` and `Ξ_X = ‖A'ᴴB'‖`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{analyze, DictionaryStats, PartitionedDictionary};
use crate::error::{Error, Result};
use crate::matrix::{hollow_norm, singular_values, spectral_norm_of, ComplexMatrix};
use crate::model::{choose_support_a, sample_support_b, SupportStrategy};
use crate::rng::trial_rng;
use crate::scalar::Real;
use crate::summary::{bootstrap_mean_interval, Histogram};
use crate::threshold::{cond_a_lhs, cond_b_lhs, feasible_gamma};

/// Per-inequality slack used when auditing the bound chain.
pub const CHAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SubDictionary<T: Real> {
    pub columns_a: Vec<usize>,
    pub columns_b: Vec<usize>,
    pub s: ComplexMatrix<T>,
}

impl<T: Real> SubDictionary<T> {
    pub fn na(&self) -> usize {
        self.columns_a.len()
    }

    pub fn nb(&self) -> usize {
        self.columns_b.len()
    }
}

fn check_distinct(idx: &[usize], bound: usize, block: &str) -> Result<()> {
    let mut seen = vec![false; bound];
    for &i in idx {
        if i >= bound {
            return Err(Error::IndexSet(format!("{block} index {i} out of range (block has {bound} columns)")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::IndexSet(format!("{block} index {i} repeated")));
        }
    }
    Ok(())
}

/// `S = [A' B']`; `columns_b` index into `B` (not into `D`).
pub fn extract_subdictionary<T: Real>(
    d: &PartitionedDictionary<T>,
    columns_a: &[usize],
    columns_b: &[usize],
) -> Result<SubDictionary<T>> {
    check_distinct(columns_a, d.na(), "A")?;
    check_distinct(columns_b, d.nb(), "B")?;
    if columns_a.is_empty() && columns_b.is_empty() {
        return Err(Error::IndexSet("empty sub-dictionary".into()));
    }
    let global: Vec<usize> = columns_a.iter().copied().chain(columns_b.iter().map(|j| d.na() + j)).collect();
    Ok(SubDictionary {
        columns_a: columns_a.to_vec(),
        columns_b: columns_b.to_vec(),
        s: d.matrix().select_columns(&global)?,
    })
}

/// Smallest of the `cols` singular values of `S`: zero when `S` has more
/// columns than rows, and values below `1e-10·σ_max` are reported as zero.
pub fn sigma_min<T: Real>(s: &ComplexMatrix<T>) -> T {
    if s.cols() > s.rows() {
        return T::zero();
    }
    let sv = s.singular_values();
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min < T::lit(1e-10) * max {
        T::zero()
    } else {
        min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProofChainRecord<T: Real> {
    pub sigma_min: T,
    pub xi_s: T,
    pub xi_a: T,
    pub xi_b: T,
    pub xi_x: T,
    /// `‖B'ᴴA'‖`, computed separately from `xi_x`.
    pub xi_x_adjoint: T,
    /// `‖A'ᴴB‖_{1,2}`: largest column norm of `A'ᴴB`.
    pub row_norm_ab: T,
    /// `(nA − 1)·μA`
    pub gersgorin_rhs: T,
    /// `max{Ξ_A, Ξ_B} + Ξ_X`
    pub max_bound: T,
    /// `Ξ_A + Ξ_B + Ξ_X`
    pub sum_bound: T,
    /// `√(μ² nA)`
    pub row_norm_rhs: T,
    /// `‖A‖·‖B‖`
    pub cross_rhs: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainInequality {
    SigmaMinLowerBound,
    BlockMax,
    BlockSum,
    Gersgorin,
    RowNorm,
    CrossSubmultiplicative,
    AdjointSymmetry,
}

impl ChainInequality {
    pub const ALL: [ChainInequality; 7] = [
        ChainInequality::SigmaMinLowerBound,
        ChainInequality::BlockMax,
        ChainInequality::BlockSum,
        ChainInequality::Gersgorin,
        ChainInequality::RowNorm,
        ChainInequality::CrossSubmultiplicative,
        ChainInequality::AdjointSymmetry,
    ];
}

impl<T: Real> ProofChainRecord<T> {
    /// Inequalities of the bound chain that fail by more than `slack`.
    pub fn violations(&self, slack: T) -> Vec<ChainInequality> {
        use ChainInequality::*;
        let checks = [
            (SigmaMinLowerBound, self.sigma_min * self.sigma_min >= T::one() - self.xi_s - slack),
            (BlockMax, self.xi_s <= self.max_bound + slack),
            (BlockSum, self.xi_s <= self.sum_bound + slack),
            (Gersgorin, self.xi_a <= self.gersgorin_rhs + slack),
            (RowNorm, self.row_norm_ab <= self.row_norm_rhs + slack),
            (CrossSubmultiplicative, self.xi_x <= self.cross_rhs + slack),
            (AdjointSymmetry, (self.xi_x - self.xi_x_adjoint).abs() <= slack),
        ];
        checks.into_iter().filter(|(_, ok)| !ok).map(|(c, _)| c).collect()
    }
}

fn block<T: Real>(
    g: &DMatrix<Complex<T>>,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> DMatrix<Complex<T>> {
    g.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

/// Every quantity of the bound chain for one sub-dictionary.
pub fn proof_chain<T: Real>(
    d: &PartitionedDictionary<T>,
    sub: &SubDictionary<T>,
    stats: &DictionaryStats<T>,
) -> ProofChainRecord<T> {
    let (na, k) = (sub.na(), sub.na() + sub.nb());
    let g = sub.s.gram();
    let xi_s = hollow_norm(&g);
    let xi_a = hollow_norm(&block(&g, 0..na, 0..na));
    let xi_b = hollow_norm(&block(&g, na..k, na..k));
    let xi_x = spectral_norm_of(&block(&g, 0..na, na..k));

    let a_sel = sub.s.as_dmatrix().columns(0, na);
    let b_sel = sub.s.as_dmatrix().columns(na, k - na);
    let xi_x_adjoint = spectral_norm_of(&b_sel.ad_mul(&a_sel));

    let row_norm_ab = match d.block_b() {
        Some(b) if na > 0 => {
            let prod = a_sel.ad_mul(b.as_dmatrix());
            (0..prod.ncols()).fold(T::zero(), |acc, c| acc.max(prod.column(c).norm()))
        }
        _ => T::zero(),
    };
    ProofChainRecord {
        sigma_min: sigma_min(&sub.s),
        xi_s,
        xi_a,
        xi_b,
        xi_x,
        xi_x_adjoint,
        row_norm_ab,
        gersgorin_rhs: T::from_count(na.saturating_sub(1)) * stats.mu_a,
        max_bound: xi_a.max(xi_b) + xi_x,
        sum_bound: xi_a + xi_b + xi_x,
        row_norm_rhs: (stats.mu * stats.mu * T::from_count(na)).sqrt(),
        cross_rhs: stats.spec_a * stats.spec_b,
    }
}

/// Moment-bound constants `α`, `β`, the moment floor `Q1` and the default
/// deviation `u = √(4 s log N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TailBoundSpec<T: Real> {
    pub alpha: T,
    pub beta: T,
    pub q1: T,
    pub u: T,
    /// Set when `nB = 0`: `Q1` is fixed to 4 and only the A-terms contribute.
    pub degenerate: bool,
}

/// `α = 6√(μB² nB) + 3√(μ² nA/2)`,
/// `β = (nA−1)μA + 2nB‖B‖²/Nb + √(nB/Nb)‖A‖‖B‖`,
/// `Q1 = max{4 log(nB/2+1), 4 log nB, 4}`.
///
/// `(nA − 1)` is clamped at 0 for `nA = 0`.
pub fn alpha_beta<T: Real>(stats: &DictionaryStats<T>, na: usize, nb: usize, s: T) -> Result<TailBoundSpec<T>> {
    if nb > stats.nb || na > stats.na {
        return Err(Error::InvalidArgument(format!(
            "(nA, nB) = ({na}, {nb}) exceeds block sizes ({}, {})",
            stats.na, stats.nb
        )));
    }
    let (naf, nbf) = (T::from_count(na), T::from_count(nb));
    let four = T::lit(4.0);
    let a_term = T::lit(3.0) * (stats.mu * stats.mu * naf / T::lit(2.0)).sqrt();
    let u = (four * s * T::from_count(stats.n).ln()).sqrt();
    if nb == 0 {
        return Ok(TailBoundSpec {
            alpha: a_term,
            beta: T::from_count(na.saturating_sub(1)) * stats.mu_a,
            q1: four,
            u,
            degenerate: true,
        });
    }
    let ratio = nbf / T::from_count(stats.nb);
    let alpha = T::lit(6.0) * (stats.mu_b * stats.mu_b * nbf).sqrt() + a_term;
    let beta = T::from_count(na.saturating_sub(1)) * stats.mu_a
        + T::lit(2.0) * ratio * stats.spec_b * stats.spec_b
        + ratio.sqrt() * stats.spec_a * stats.spec_b;
    let q1 = (four * (nbf / T::lit(2.0) + T::one()).ln()).max(four * nbf.ln()).max(four);
    Ok(TailBoundSpec { alpha, beta, q1, u, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TailBound<T: Real> {
    /// `e^{1/4}(α u + β)`
    pub threshold: T,
    /// `e^{−u²/4}`
    pub bound: T,
}

/// `P{R ≥ e^{1/4}(αu + β)} ≤ e^{−u²/4}`, valid for `u ≥ √Q1`.
pub fn tail_probability<T: Real>(u: T, spec: &TailBoundSpec<T>) -> Result<TailBound<T>> {
    if u < spec.q1.sqrt() {
        return Err(Error::InvalidArgument(format!("u = {u} is below sqrt(Q1) = {}", spec.q1.sqrt())));
    }
    Ok(TailBound {
        threshold: T::lit(0.25f64.exp()) * (spec.alpha * u + spec.beta),
        bound: (-(u * u) / T::lit(4.0)).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SminTrial<T: Real> {
    pub trial: usize,
    pub record: ProofChainRecord<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SminSummary<T: Real> {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub na: usize,
    pub nb: usize,
    pub s: T,
    pub strategy: String,
    pub trials: usize,
    pub master_seed: u64,
    pub failures: usize,
    pub empirical_failure_rate: f64,
    /// `N^{−s}`, computed as the tail bound at `u = √(4 s log N)`.
    pub lemma1_bound: T,
    pub tail: TailBoundSpec<T>,
    pub tail_threshold: T,
    /// Trials with `Ξ_S ≥ e^{1/4}(αu + β)`.
    pub tail_exceedances: usize,
    pub cond_a_lhs: T,
    pub cond_b_lhs: T,
    /// Whether some `γ ∈ [0, 1]` satisfies both block conditions.
    pub conditions_hold: bool,
    pub feasible_gamma: Option<T>,
    /// `empirical_failure_rate ≤ lemma1_bound`, only meaningful when the conditions hold.
    pub bound_respected: Option<bool>,
    pub chain_violations: usize,
    pub min_sigma_min: T,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SminExperimentResult<T: Real> {
    pub trials: Vec<SminTrial<T>>,
    pub summary: SminSummary<T>,
}

impl<T: Real> SminExperimentResult<T> {
    /// `trialIndex,sigmaMin,xiS,xiA,xiB,xiX`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trialIndex,sigmaMin,xiS,xiA,xiB,xiX\n");
        for t in &self.trials {
            let r = &t.record;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t.trial,
                r.sigma_min.as_f64(),
                r.xi_s.as_f64(),
                r.xi_a.as_f64(),
                r.xi_b.as_f64(),
                r.xi_x.as_f64()
            ));
        }
        out
    }
}

/// Draws `trials` sub-dictionaries (`nA` columns of `A` by `strategy`, `nB`
/// uniformly random columns of `B`) and records the bound chain for each.
pub fn run_smin_trials<T: Real>(
    d: &PartitionedDictionary<T>,
    strategy: &SupportStrategy,
    na: usize,
    nb: usize,
    trials: usize,
    s: T,
    master_seed: u64,
) -> Result<SminExperimentResult<T>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if d.n() <= 2 {
        return Err(Error::InvalidArgument(format!("N must exceed 2 (got {})", d.n())));
    }
    let stats = analyze(d);
    let tail = alpha_beta(&stats, na, nb, s)?;
    let tb = tail_probability(tail.u, &tail)?;
    // Validate the support choice once so that per-trial failures cannot occur.
    choose_support_a(strategy, d.na(), na, &mut trial_rng(master_seed, 0))?;
    sample_support_b(d.nb(), nb, &mut trial_rng(master_seed, 0))?;

    let records: Vec<SminTrial<T>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t as u64);
            let cols_a = choose_support_a(strategy, d.na(), na, &mut rng)?;
            let cols_b = sample_support_b(d.nb(), nb, &mut rng)?;
            let sub = extract_subdictionary(d, &cols_a, &cols_b)?;
            Ok(SminTrial { trial: t, record: proof_chain(d, &sub, &stats) })
        })
        .collect::<Result<_>>()?;

    let cutoff = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let failures = records.iter().filter(|r| r.record.sigma_min <= cutoff).count();
    let rate = failures as f64 / trials as f64;
    let slack = T::lit(CHAIN_SLACK);
    let chain_violations = records.iter().map(|r| r.record.violations(slack).len()).sum();
    let tail_exceedances = records.iter().filter(|r| r.record.xi_s >= tb.threshold).count();
    let gamma = feasible_gamma(&stats, s, na, nb);
    let min_sigma_min = records.iter().fold(T::lit(f64::INFINITY), |acc, r| acc.min(r.record.sigma_min));
    let histogram = Histogram::new(records.iter().map(|r| r.record.sigma_min.as_f64()), 0.0, 1.0, 20);

    let summary = SminSummary {
        m: d.m(),
        n: d.n(),
        na,
        nb,
        s,
        strategy: strategy.label(),
        trials,
        master_seed,
        failures,
        empirical_failure_rate: rate,
        lemma1_bound: tb.bound,
        tail,
        tail_threshold: tb.threshold,
        tail_exceedances,
        cond_a_lhs: cond_a_lhs(stats.mu, stats.mu_a, stats.n, s, na),
        cond_b_lhs: cond_b_lhs(stats.mu_b, stats.spec_a, stats.spec_b, stats.nb, stats.n, s, nb),
        conditions_hold: gamma.is_some(),
        feasible_gamma: gamma,
        bound_respected: gamma.map(|_| T::lit(rate) <= tb.bound),
        chain_violations,
        min_sigma_min,
        histogram,
    };
    Ok(SminExperimentResult { trials: records, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSide {
    /// `(mean of Ξ^q)^{1/q}`
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
}

impl MomentSide {
    pub fn within_bound(&self) -> bool {
        self.ci_high <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub na: usize,
    pub nb: usize,
    pub q: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// `[E Ξ_B^q]^{1/q}` against `6√(μB² nB)√q + 2nB‖B‖²/Nb`.
    pub xi_b: MomentSide,
    /// `[E Ξ_X^q]^{1/q}` against `3√r2·√(μ² nA) + √(nB/Nb)‖A‖‖B‖`, `r2 = max{2, 2 log nB, q/2}`.
    pub xi_x: MomentSide,
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const MIN_MOMENT_TRIALS: usize = 1000;

/// Smallest admissible moment order `max{4 log(nB/2+1), 4}`.
pub fn moment_floor(nb: usize) -> f64 {
    (4.0 * (nb as f64 / 2.0 + 1.0).ln()).max(4.0)
}

/// Per-trial `Ξ_B` and `Ξ_X` for one random draw of `B'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockNormSample {
    pub trial: usize,
    pub xi_b: f64,
    pub xi_x: f64,
}

/// Draws `trials` random `B'` (`nB` columns of `B`) and records `Ξ_B = ‖B'ᴴB' − I‖`
/// and `Ξ_X = ‖A'ᴴB'‖`, with `A'` the first `nA` columns of `A`.
pub fn sample_block_norms<T: Real>(
    d: &PartitionedDictionary<T>,
    na: usize,
    nb: usize,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<BlockNormSample>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if nb == 0 || nb > d.nb() || na > d.na() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= nB <= Nb and nA <= Na (got nA = {na}, nB = {nb}, Na = {}, Nb = {})",
            d.na(),
            d.nb()
        )));
    }
    let cols_a: Vec<usize> = (0..na).collect();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t as u64);
            let cols_b = sample_support_b(d.nb(), nb, &mut rng)?;
            let sub = extract_subdictionary(d, &cols_a, &cols_b)?;
            let g = sub.s.gram();
            let k = na + nb;
            Ok(BlockNormSample {
                trial: t,
                xi_b: hollow_norm(&block(&g, na..k, na..k)).as_f64(),
                xi_x: spectral_norm_of(&block(&g, 0..na, na..k)).as_f64(),
            })
        })
        .collect()
}

/// Monte Carlo estimate of the `q`-th moments of `Ξ_B` and `Ξ_X` over random
/// choices of `B'`, with `A'` the first `nA` columns of `A`.
pub fn estimate_moment<T: Real>(
    d: &PartitionedDictionary<T>,
    na: usize,
    nb: usize,
    q: f64,
    trials: usize,
    master_seed: u64,
) -> Result<MomentEstimate> {
    check_moment_order(q, nb)?;
    if trials < MIN_MOMENT_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "moment estimation needs at least {MIN_MOMENT_TRIALS} trials (got {trials})"
        )));
    }
    let samples = sample_block_norms(d, na, nb, trials, master_seed)?;
    moment_from_samples(&analyze(d), &samples, na, nb, q, master_seed)
}

fn check_moment_order(q: f64, nb: usize) -> Result<()> {
    if q >= moment_floor(nb) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("q = {q} is below the validity floor {}", moment_floor(nb))))
    }
}

/// Moment estimate and bounds from precomputed samples. The bootstrap stream
/// is derived from `master_seed`, so equal inputs give equal intervals.
pub fn moment_from_samples<T: Real>(
    stats: &DictionaryStats<T>,
    samples: &[BlockNormSample],
    na: usize,
    nb: usize,
    q: f64,
    master_seed: u64,
) -> Result<MomentEstimate> {
    check_moment_order(q, nb)?;
    if samples.len() < MIN_MOMENT_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "moment estimation needs at least {MIN_MOMENT_TRIALS} trials (got {})",
            samples.len()
        )));
    }
    if nb == 0 || nb > stats.nb || na > stats.na {
        return Err(Error::InvalidArgument(format!("(nA, nB) = ({na}, {nb}) exceeds the block sizes")));
    }
    let (mu, mu_b) = (stats.mu.as_f64(), stats.mu_b.as_f64());
    let (spec_a, spec_b) = (stats.spec_a.as_f64(), stats.spec_b.as_f64());
    let (naf, nbf, nb_total) = (na as f64, nb as f64, stats.nb as f64);
    let bound_b = 6.0 * (mu_b * mu_b * nbf).sqrt() * q.sqrt() + 2.0 * nbf * spec_b * spec_b / nb_total;
    let r2 = 2f64.max(2.0 * nbf.ln()).max(q / 2.0);
    let bound_x = 3.0 * r2.sqrt() * (mu * mu * naf).sqrt() + (nbf / nb_total).sqrt() * spec_a * spec_b;

    let mut boot_rng = trial_rng(master_seed, u64::MAX);
    let mut side = |values: Vec<f64>, bound: f64| {
        let powered: Vec<f64> = values.iter().map(|v| v.powf(q)).collect();
        let mean = powered.iter().sum::<f64>() / powered.len() as f64;
        let (lo, hi) = bootstrap_mean_interval(&powered, BOOTSTRAP_RESAMPLES, &mut boot_rng);
        MomentSide { estimate: mean.powf(1.0 / q), ci_low: lo.powf(1.0 / q), ci_high: hi.powf(1.0 / q), bound }
    };
    let xi_b = side(samples.iter().map(|s| s.xi_b).collect(), bound_b);
    let xi_x = side(samples.iter().map(|s| s.xi_x).collect(), bound_x);
    Ok(MomentEstimate { na, nb, q, trials: samples.len(), master_seed, xi_b, xi_x })
}

/// Singular values of `S` in descending order.
pub fn singular_spectrum<T: Real>(s: &ComplexMatrix<T>) -> Vec<T> {
    singular_values(s.as_dmatrix())
}
