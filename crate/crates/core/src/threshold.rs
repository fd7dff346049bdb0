//! Closed-form sparsity conditions for partitioned dictionaries.
//!
//! All logarithms are natural. Strict conditions (`eq1`, `eq5`, `classical`)
//! hold iff `lhs < rhs`; the others iff `lhs <= rhs`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dictionary::DictionaryStats;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower bound on the constant in the two-ONB sparsity condition.
pub const TWO_ONB_CONSTANT: f64 = 0.004212;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TheoremParams<T: Real> {
    pub s: T,
    pub gamma: T,
    pub na: usize,
    pub nb: usize,
}

impl<T: Real> TheoremParams<T> {
    pub fn new(s: T, gamma: T, na: usize, nb: usize) -> Result<Self> {
        let p = Self { s, gamma, na, nb };
        p.validate()?;
        Ok(p)
    }

    // Negated comparison so that NaN is rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.s >= T::one()) {
            return Err(Error::InvalidArgument(format!("s must be >= 1 (got {})", self.s)));
        }
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1] (got {})", self.gamma)));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.na + self.nb
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionId {
    Eq1,
    Eq2,
    Eq3,
    Eq4,
    Eq5,
    Eq6,
    Classical,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionId::Eq1 => "eq1",
            ConditionId::Eq2 => "eq2",
            ConditionId::Eq3 => "eq3",
            ConditionId::Eq4 => "eq4",
            ConditionId::Eq5 => "eq5",
            ConditionId::Eq6 => "eq6",
            ConditionId::Classical => "classical",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Condition<T: Real> {
    pub id: ConditionId,
    pub lhs: T,
    pub rhs: T,
    pub strict: bool,
    pub satisfied: bool,
}

impl<T: Real> Condition<T> {
    pub fn new(id: ConditionId, lhs: T, rhs: T, strict: bool) -> Self {
        let satisfied = if strict { lhs < rhs } else { lhs <= rhs };
        Self { id, lhs, rhs, strict, satisfied }
    }

    /// `rhs - lhs`
    pub fn margin(&self) -> T {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConditionReport<T: Real> {
    pub params: TheoremParams<T>,
    pub conditions: Vec<Condition<T>>,
    /// Premise for uniqueness of the sparsest representation.
    pub p0_unique: bool,
    /// Premise for uniqueness under both the sparsest and the ℓ1 problem.
    pub p0_p1: bool,
    pub notes: Vec<String>,
}

impl<T: Real> ConditionReport<T> {
    pub fn get(&self, id: ConditionId) -> Option<&Condition<T>> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Adds a warning when a non-continuous magnitude law is used with the
    /// uniqueness premises, which assume continuous coefficient values.
    pub fn note_magnitude_law(&mut self, continuous: bool) {
        if !continuous && self.p0_unique {
            self.notes.push("magnitude law is not continuous: the uniqueness premises do not apply to it".into());
        }
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>24} {:>24} {:>6}  {}\n", "condition", "lhs", "rhs", "op", "ok");
        for c in &self.conditions {
            out.push_str(&format!(
                "{:<10} {:>24.16e} {:>24.16e} {:>6}  {}\n",
                c.id.to_string(),
                c.lhs.as_f64(),
                c.rhs.as_f64(),
                if c.strict { "<" } else { "<=" },
                if c.satisfied { "yes" } else { "no" }
            ));
        }
        out
    }
}

/// Classical coherence threshold `(1 + 1/μ)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum SparsityThreshold<T: Real> {
    Finite(T),
    /// `μ = 0`: every representation is unique.
    Unbounded,
}

impl<T: Real> SparsityThreshold<T> {
    pub fn value(self) -> T {
        match self {
            SparsityThreshold::Finite(v) => v,
            SparsityThreshold::Unbounded => T::lit(f64::INFINITY),
        }
    }
}

pub fn classical_threshold<T: Real>(mu: T) -> SparsityThreshold<T> {
    if mu <= T::zero() {
        SparsityThreshold::Unbounded
    } else {
        SparsityThreshold::Finite((T::one() + T::one() / mu) / T::lit(2.0))
    }
}

fn log_n<T: Real>(n: usize) -> T {
    T::from_count(n).ln()
}

fn inv_sq<T: Real>(mu: T) -> T {
    T::one() / (mu * mu)
}

fn e_quarter<T: Real>() -> T {
    T::lit((-0.25f64).exp())
}

fn require_n_gt_2(n: usize) -> Result<()> {
    if n <= 2 {
        return Err(Error::InvalidArgument(format!("the sparsity conditions assume N > 2 (got N = {n})")));
    }
    Ok(())
}

fn classical<T: Real>(mu: T, total: usize) -> Condition<T> {
    Condition::new(ConditionId::Classical, T::from_count(total), classical_threshold(mu).value(), true)
}

/// Two-ONB conditions with the default constant [`TWO_ONB_CONSTANT`].
pub fn check_theorem1<T: Real>(mu: T, n: usize, params: &TheoremParams<T>) -> Result<ConditionReport<T>> {
    check_theorem1_with_constant(mu, n, params, T::lit(TWO_ONB_CONSTANT))
}

pub fn check_theorem1_with_constant<T: Real>(
    mu: T,
    n: usize,
    params: &TheoremParams<T>,
    c: T,
) -> Result<ConditionReport<T>> {
    require_n_gt_2(n)?;
    params.validate()?;
    let total = T::from_count(params.total());
    let mu_inv2 = inv_sq(mu);
    let rhs1 = (c * mu_inv2 / (params.s * log_n::<T>(n))).min(mu_inv2 / T::lit(2.0));
    let eq1 = Condition::new(ConditionId::Eq1, total, rhs1, true);
    let eq2 = Condition::new(ConditionId::Eq2, total, l1_rhs(mu, n, params.s), false);
    Ok(ConditionReport {
        params: *params,
        p0_unique: eq1.satisfied,
        p0_p1: eq1.satisfied && eq2.satisfied,
        conditions: vec![eq1, eq2, classical(mu, params.total())],
        notes: Vec::new(),
    })
}

fn l1_rhs<T: Real>(mu: T, n: usize, s: T) -> T {
    inv_sq(mu) / (T::lit(8.0) * (s + T::one()) * log_n::<T>(n))
}

/// Condition on the arbitrary part: `6√2·√(nA μ² s log N) + 2(nA−1)μA ≤ (1−γ)e^{−1/4}`.
///
/// For `nA = 0` the left-hand side is taken as 0.
pub fn check_cond_a<T: Real>(mu: T, mu_a: T, n: usize, params: &TheoremParams<T>) -> Condition<T> {
    let rhs = (T::one() - params.gamma) * e_quarter::<T>();
    let lhs = cond_a_lhs(mu, mu_a, n, params.s, params.na);
    Condition::new(ConditionId::Eq3, lhs, rhs, false)
}

pub(crate) fn cond_a_lhs<T: Real>(mu: T, mu_a: T, n: usize, s: T, na: usize) -> T {
    if na == 0 {
        return T::zero();
    }
    let root = (T::from_count(na) * mu * mu * s * log_n::<T>(n)).sqrt();
    T::lit(6.0 * std::f64::consts::SQRT_2) * root + T::lit(2.0) * T::from_count(na - 1) * mu_a
}

/// Condition on the random part:
/// `24√(nB μB² s log N) + 4 nB ‖B‖²/Nb + 2√(nB/Nb)‖A‖‖B‖ ≤ γ e^{−1/4}`.
pub fn check_cond_b<T: Real>(
    mu_b: T,
    spec_a: T,
    spec_b: T,
    nb_total: usize,
    n: usize,
    params: &TheoremParams<T>,
) -> Condition<T> {
    let rhs = params.gamma * e_quarter::<T>();
    let lhs = cond_b_lhs(mu_b, spec_a, spec_b, nb_total, n, params.s, params.nb);
    Condition::new(ConditionId::Eq4, lhs, rhs, false)
}

pub(crate) fn cond_b_lhs<T: Real>(mu_b: T, spec_a: T, spec_b: T, nb_total: usize, n: usize, s: T, nb: usize) -> T {
    if nb == 0 {
        return T::zero();
    }
    if nb_total == 0 {
        return T::lit(f64::INFINITY);
    }
    let nbf = T::from_count(nb);
    let ratio = nbf / T::from_count(nb_total);
    T::lit(24.0) * (nbf * mu_b * mu_b * s * log_n::<T>(n)).sqrt()
        + T::lit(4.0) * ratio * spec_b * spec_b
        + T::lit(2.0) * ratio.sqrt() * spec_a * spec_b
}

/// `nA + nB < μ⁻²/2` (strict) and `nA + nB ≤ μ⁻²/(8(s+1) log N)`.
pub fn check_l0_l1<T: Real>(mu: T, n: usize, params: &TheoremParams<T>) -> (Condition<T>, Condition<T>) {
    let total = T::from_count(params.total());
    (
        Condition::new(ConditionId::Eq5, total, inv_sq(mu) / T::lit(2.0), true),
        Condition::new(ConditionId::Eq6, total, l1_rhs(mu, n, params.s), false),
    )
}

/// All conditions of the partitioned-dictionary result for one parameter tuple.
pub fn check_theorem2<T: Real>(stats: &DictionaryStats<T>, params: &TheoremParams<T>) -> Result<ConditionReport<T>> {
    require_n_gt_2(stats.n)?;
    params.validate()?;
    if params.na > stats.na || params.nb > stats.nb {
        return Err(Error::InvalidArgument(format!(
            "(nA, nB) = ({}, {}) exceeds block sizes ({}, {})",
            params.na, params.nb, stats.na, stats.nb
        )));
    }
    let eq3 = check_cond_a(stats.mu, stats.mu_a, stats.n, params);
    let eq4 = check_cond_b(stats.mu_b, stats.spec_a, stats.spec_b, stats.nb, stats.n, params);
    let (eq5, eq6) = check_l0_l1(stats.mu, stats.n, params);
    let mut notes = Vec::new();
    if params.na == 0 {
        notes.push("nA = 0: condition eq3 is taken as satisfied with lhs = 0".into());
    }
    let p0_unique = eq3.satisfied && eq4.satisfied && eq5.satisfied;
    Ok(ConditionReport {
        params: *params,
        p0_unique,
        p0_p1: p0_unique && eq6.satisfied,
        conditions: vec![eq3, eq4, eq5, eq6, classical(stats.mu, params.total())],
        notes,
    })
}

/// Some `γ ∈ [0, 1]` for which both block conditions hold, if one exists.
pub fn feasible_gamma<T: Real>(stats: &DictionaryStats<T>, s: T, na: usize, nb: usize) -> Option<T> {
    let lhs_a = cond_a_lhs(stats.mu, stats.mu_a, stats.n, s, na);
    let lhs_b = cond_b_lhs(stats.mu_b, stats.spec_a, stats.spec_b, stats.nb, stats.n, s, nb);
    let inv = T::lit(0.25f64.exp());
    [lhs_b * inv, T::one() - lhs_a * inv].into_iter().map(|g| g.max(T::zero()).min(T::one())).find(|&gamma| {
        let p = TheoremParams { s, gamma, na, nb };
        check_cond_a(stats.mu, stats.mu_a, stats.n, &p).satisfied
            && check_cond_b(stats.mu_b, stats.spec_a, stats.spec_b, stats.nb, stats.n, &p).satisfied
    })
}

/// `{0, 0.05, ..., 1}`.
pub fn default_gamma_grid<T: Real>() -> Vec<T> {
    (0..=20).map(|i| T::lit(i as f64 / 20.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub na_max: usize,
    pub nb_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GammaOptimum<T: Real> {
    pub gamma: T,
    pub na: usize,
    pub nb: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SparsitySearch<T: Real> {
    pub best_na: usize,
    pub best_nb: usize,
    pub best_gamma: T,
    pub per_gamma: Vec<GammaOptimum<T>>,
    pub report: ConditionReport<T>,
}

/// Largest `k` in `lo..=hi` with `pred(k)`, for a predicate that is true
/// on a prefix of the range; `pred(lo)` must hold.
fn last_true(mut lo: usize, mut hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// The lexicographically largest `(nA + nB, nA)` satisfying all four hybrid conditions at a
/// fixed `γ`. Relies on the block left-hand sides being nondecreasing in
/// `nA` and `nB`.
pub fn max_sparsity_at_gamma<T: Real>(
    stats: &DictionaryStats<T>,
    s: T,
    gamma: T,
    limits: SearchLimits,
) -> GammaOptimum<T> {
    let p = |na: usize, nb: usize| TheoremParams { s, gamma, na, nb };
    let na_max = last_true(0, limits.na_max, |na| check_cond_a(stats.mu, stats.mu_a, stats.n, &p(na, 0)).satisfied);
    let nb_max = last_true(0, limits.nb_max, |nb| {
        check_cond_b(stats.mu_b, stats.spec_a, stats.spec_b, stats.nb, stats.n, &p(0, nb)).satisfied
    });
    let total = last_true(0, na_max + nb_max, |t| {
        let (eq5, eq6) = check_l0_l1(stats.mu, stats.n, &p(t, 0));
        eq5.satisfied && eq6.satisfied
    });
    let na = na_max.min(total);
    GammaOptimum { gamma, na, nb: total - na }
}

/// Maximizes `nA + nB` (then `nA`) subject to the four hybrid conditions over a grid of `γ`.
/// Ties keep the first grid value. `limits` defaults to the block sizes.
pub fn max_sparsity_search<T: Real>(
    stats: &DictionaryStats<T>,
    s: T,
    gamma_grid: &[T],
    limits: Option<SearchLimits>,
) -> Result<SparsitySearch<T>> {
    require_n_gt_2(stats.n)?;
    if gamma_grid.is_empty() {
        return Err(Error::InvalidArgument("gamma grid is empty".into()));
    }
    if let Some(g) = gamma_grid.iter().find(|g| !(**g >= T::zero() && **g <= T::one())) {
        return Err(Error::InvalidArgument(format!("gamma {g} outside [0, 1]")));
    }
    TheoremParams::new(s, gamma_grid[0], 0, 0)?;
    let limits = limits.unwrap_or(SearchLimits { na_max: stats.na, nb_max: stats.nb });
    let limits = SearchLimits { na_max: limits.na_max.min(stats.na), nb_max: limits.nb_max.min(stats.nb) };
    let per_gamma: Vec<GammaOptimum<T>> =
        gamma_grid.iter().map(|&g| max_sparsity_at_gamma(stats, s, g, limits)).collect();
    let mut best = per_gamma[0];
    for cand in &per_gamma[1..] {
        if (cand.na + cand.nb, cand.na) > (best.na + best.nb, best.na) {
            best = *cand;
        }
    }
    let report = check_theorem2(stats, &TheoremParams { s, gamma: best.gamma, na: best.na, nb: best.nb })?;
    Ok(SparsitySearch { best_na: best.na, best_nb: best.nb, best_gamma: best.gamma, per_gamma, report })
}

/// Dimensionless ratios behind the asymptotic requirements on the dictionary:
/// `r1 = μ√m`, `r2 = μA·m/log N`, `r3 = Na·log N/m`,
/// `r4 = ‖B‖²·m/(Nb log N)`, `r5 = ‖A‖²‖B‖²·m/(Nb log N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScalingReport<T: Real> {
    pub r1: T,
    pub r2: T,
    pub r3: T,
    pub r4: T,
    pub r5: T,
}

pub fn scaling_report<T: Real>(stats: &DictionaryStats<T>) -> Result<ScalingReport<T>> {
    require_n_gt_2(stats.n)?;
    if stats.nb == 0 {
        return Err(Error::InvalidArgument("scaling ratios need a non-empty B block".into()));
    }
    let m = T::from_count(stats.m);
    let log = log_n::<T>(stats.n);
    let nb = T::from_count(stats.nb);
    let b2 = stats.spec_b * stats.spec_b;
    let a2 = stats.spec_a * stats.spec_a;
    Ok(ScalingReport {
        r1: stats.mu * m.sqrt(),
        r2: stats.mu_a * m / log,
        r3: T::from_count(stats.na) * log / m,
        r4: b2 * m / (nb * log),
        r5: a2 * b2 * m / (nb * log),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{analyze, build_mub};

    fn params(s: f64, gamma: f64, na: usize, nb: usize) -> TheoremParams<f64> {
        TheoremParams::new(s, gamma, na, nb).unwrap()
    }

    #[test]
    fn classical_threshold_examples() {
        assert_eq!(classical_threshold(1.0), SparsityThreshold::Finite(1.0));
        assert_eq!(classical_threshold(0.5), SparsityThreshold::Finite(1.5));
        let v = classical_threshold(1.0 / 3f64.sqrt()).value();
        assert!((v - 1.366_025_403_784_438_6).abs() < 1e-12);
        assert_eq!(classical_threshold(0.0f64), SparsityThreshold::Unbounded);
    }

    #[test]
    fn uniform_support_examples() {
        let r = check_theorem1(0.01, 200, &params(1.0, 0.0, 3, 4)).unwrap();
        let eq1 = r.get(ConditionId::Eq1).unwrap();
        let expected = 0.004212 * 1e4 / 200f64.ln();
        assert!((eq1.rhs - expected).abs() < 1e-9);
        assert!((eq1.rhs - 7.9497).abs() < 1e-4);
        assert!(eq1.satisfied);

        let r = check_theorem1(0.01, 200, &params(1.0, 0.0, 4, 4)).unwrap();
        assert!(!r.get(ConditionId::Eq1).unwrap().satisfied);

        let r = check_theorem1(0.3, 10, &params(1.0, 0.0, 0, 0)).unwrap();
        assert!(r.p0_unique && r.p0_p1);
        assert!(check_theorem1(0.3, 2, &params(1.0, 0.0, 0, 0)).is_err());
    }

    #[test]
    fn cond_a_examples() {
        assert_eq!(check_cond_a(0.0, 0.9, 100, &params(1.0, 0.0, 1, 0)).lhs, 0.0);
        let c = check_cond_a(0.01, 0.0, 100, &params(1.0, 0.0, 1, 0));
        let expected = 6.0 * 2f64.sqrt() * (1e-4 * 100f64.ln()).sqrt();
        assert!((c.lhs - expected).abs() < 1e-14);
        assert!((c.lhs - 0.182_09).abs() < 1e-4);
        assert!((c.rhs - (-0.25f64).exp()).abs() < 1e-15);
        assert!(c.satisfied);
        let c = check_cond_a(0.1, 0.0, 100, &params(1.0, 0.0, 1, 0));
        assert!((c.lhs - 1.820_9).abs() < 1e-3);
        assert!(!c.satisfied);
        // nA = 0 convention
        let c = check_cond_a(0.5, 0.5, 100, &params(1.0, 1.0, 0, 0));
        assert!(c.satisfied && c.lhs == 0.0);
    }

    #[test]
    fn cond_b_examples() {
        assert_eq!(check_cond_b(0.3, 2.0, 2.0, 10, 100, &params(1.0, 0.0, 0, 0)).lhs, 0.0);
        let c = check_cond_b(0.0, 1.0, 1.0, 100, 100, &params(1.0, 1.0, 0, 1));
        assert!((c.lhs - 0.24).abs() < 1e-14);
        assert!(c.satisfied);
        // With mu_b = 0.1 the coherence term alone is 24·√(0.01·log 100) ≈ 5.150.
        let c = check_cond_b(0.1, 1.0, 1.0, 100, 100, &params(1.0, 1.0, 0, 1));
        let expected = 24.0 * (0.01 * 100f64.ln()).sqrt() + 0.24;
        assert!((c.lhs - expected).abs() < 1e-12);
        assert!((c.lhs - 5.390_3).abs() < 1e-3);
        assert!(!c.satisfied);
    }

    #[test]
    fn l0_l1_examples() {
        let (eq5, eq6) = check_l0_l1(0.125, 1000, &params(1.0, 0.0, 0, 1));
        assert_eq!(eq5.rhs, 32.0);
        assert!((eq6.rhs - 0.579_06).abs() < 1e-5);
        assert!(!eq6.satisfied);
        let (eq5, eq6) = check_l0_l1(0.125, 1000, &params(1.0, 0.0, 0, 0));
        assert!(eq5.satisfied && eq6.satisfied);
    }

    #[test]
    fn gamma_split_sums_to_one() {
        for g in default_gamma_grid::<f64>() {
            let p = params(1.0, g, 1, 1);
            let a = check_cond_a(0.1, 0.0, 50, &p).rhs;
            let b = check_cond_b(0.1, 1.0, 1.0, 10, 50, &p).rhs;
            assert!(((a + b) / (-0.25f64).exp() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_l1_rhs_matches_hybrid_l1_rhs() {
        for (mu, n, s) in [(0.1, 50, 1.0), (0.02, 1000, 2.5), (0.3, 3, 1.0)] {
            let p = params(s, 0.5, 1, 2);
            let r = check_theorem1(mu, n, &p).unwrap();
            let (_, eq6) = check_l0_l1(mu, n, &p);
            assert_eq!(r.get(ConditionId::Eq2).unwrap().rhs, eq6.rhs);
        }
    }

    #[test]
    fn search_returns_zero_when_l1_condition_forbids_everything() {
        let stats = analyze(&build_mub::<f64>(3).unwrap());
        let grid = default_gamma_grid::<f64>();
        let r = max_sparsity_search(&stats, 1.0, &grid, None).unwrap();
        assert_eq!((r.best_na, r.best_nb, r.best_gamma), (0, 0, 0.0));
    }

    #[test]
    fn search_result_revalidates() {
        let mut stats = analyze(&build_mub::<f64>(7).unwrap());
        stats.mu = 1e-3;
        stats.mu_b = 1e-3;
        let r = max_sparsity_search(&stats, 1.0, &default_gamma_grid(), None).unwrap();
        assert!(r.best_na + r.best_nb > 0);
        assert!(r.report.p0_p1, "{}", r.report.table());
    }

    #[test]
    fn search_rejects_bad_grid() {
        let stats = analyze(&build_mub::<f64>(3).unwrap());
        assert!(max_sparsity_search(&stats, 1.0, &[], None).is_err());
        assert!(max_sparsity_search(&stats, 1.0, &[1.5], None).is_err());
    }

    #[test]
    fn scaling_report_mub7() {
        let stats = analyze(&build_mub::<f64>(7).unwrap());
        let r = scaling_report(&stats).unwrap();
        assert!((r.r1 - 1.0).abs() < 1e-12);
        assert!(r.r2.abs() < 1e-12);
        assert!((r.r4 - 1.0 / 56f64.ln()).abs() < 1e-9);
        assert!((r.r4 - 0.248_4).abs() < 1e-4);
    }

    #[test]
    fn feasible_gamma_matches_grid_feasibility() {
        let mut stats = analyze(&build_mub::<f64>(7).unwrap());
        stats.mu = 1e-3;
        stats.mu_b = 1e-3;
        let g = feasible_gamma(&stats, 1.0, 3, 0).unwrap();
        let p = params(1.0, g, 3, 0);
        assert!(check_cond_a(stats.mu, stats.mu_a, stats.n, &p).satisfied);
        assert!(feasible_gamma(&stats, 1.0, 0, 40).is_none());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(TheoremParams::new(0.5, 0.5, 0, 0).is_err());
        assert!(TheoremParams::new(1.0, 1.5, 0, 0).is_err());
    }
}
