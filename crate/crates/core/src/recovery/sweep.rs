use std::ops::RangeInclusive;

use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bp::{solve_bp, BpSolution, BpSolverConfig};
use crate::dictionary::PartitionedDictionary;
use crate::error::{Error, Result};
use crate::model::{
    choose_support_a, sample_instance, CoefficientSpec, HybridSupportSpec, SparseInstance, SupportStrategy,
};
use crate::rng::{mix, trial_rng};
use crate::scalar::{modulus, Real};
use crate::summary::wilson_interval;

/// A trial succeeds when `‖x̂ − x‖₂ / ‖x‖₂ ≤ SUCCESS_TOLERANCE`.
pub const SUCCESS_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOutcome<T: Real> {
    pub x_hat: DVector<Complex<T>>,
    pub relative_l2_error: T,
    pub support_match: bool,
    pub l1_value: T,
    pub feasibility_residual: T,
    pub iterations: usize,
    pub converged: bool,
    pub success: bool,
}

impl<T: Real> RecoveryOutcome<T> {
    /// Scores a solver run against the planted vector.
    ///
    /// Entries of `x̂` count as nonzero above `1e-6·max|x̂|`.
    pub fn evaluate(solution: BpSolution<T>, x_true: &DVector<Complex<T>>) -> Self {
        let x_hat = solution.x_hat;
        let true_norm = x_true.norm();
        let err = (&x_hat - x_true).norm();
        let relative_l2_error = if true_norm > T::zero() { err / true_norm } else { err };
        let peak = x_hat.iter().fold(T::zero(), |acc, &z| acc.max(modulus(z)));
        let floor = T::lit(1e-6) * peak;
        let support_match =
            x_hat.iter().zip(x_true.iter()).all(|(&a, &b)| (modulus(a) > floor) == (modulus(b) > T::zero()));
        Self {
            relative_l2_error,
            support_match,
            l1_value: solution.l1_value,
            feasibility_residual: solution.feasibility_residual,
            iterations: solution.iterations,
            converged: solution.converged,
            success: relative_l2_error <= T::lit(SUCCESS_TOLERANCE),
            x_hat,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryTrial<T: Real> {
    pub instance: SparseInstance<T>,
    pub outcome: RecoveryOutcome<T>,
}

/// Samples one hybrid instance and runs basis pursuit on it.
pub fn recovery_trial<T: Real, R: Rng + ?Sized>(
    d: &PartitionedDictionary<T>,
    spec: &HybridSupportSpec,
    coeff: &CoefficientSpec,
    cfg: &BpSolverConfig<T>,
    rng: &mut R,
) -> Result<RecoveryTrial<T>> {
    let instance = sample_instance(d, spec, coeff, rng)?;
    let solution = solve_bp(d.matrix(), &instance.y, cfg)?;
    let outcome = RecoveryOutcome::evaluate(solution, &instance.x);
    Ok(RecoveryTrial { instance, outcome })
}

/// Runs `trials` independent recovery trials at a fixed `(nA, nB)`; trial `t`
/// uses stream `t` of `master_seed`.
#[allow(clippy::too_many_arguments)]
pub fn run_recovery_trials<T: Real>(
    d: &PartitionedDictionary<T>,
    strategy: &SupportStrategy,
    na: usize,
    nb: usize,
    trials: usize,
    coeff: &CoefficientSpec,
    cfg: &BpSolverConfig<T>,
    master_seed: u64,
) -> Result<Vec<RecoveryTrial<T>>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    cfg.validate()?;
    choose_support_a(strategy, d.na(), na, &mut trial_rng(master_seed, 0))?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t as u64);
            let support_a = choose_support_a(strategy, d.na(), na, &mut rng)?;
            let spec = HybridSupportSpec { support_a, nb, seed: master_seed };
            recovery_trial(d, &spec, coeff, cfg, &mut rng)
        })
        .collect()
}

/// One row per trial. `support` is `;`-separated, `values` are `re:im` pairs.
pub fn trials_to_csv<T: Real>(trials: &[RecoveryTrial<T>]) -> String {
    let mut out = String::from(
        "trialIndex,support,values,relativeL2Error,supportMatch,l1Value,feasibilityResidual,iterations,converged,success\n",
    );
    for (t, trial) in trials.iter().enumerate() {
        let support: Vec<String> = trial.instance.support.iter().map(|i| i.to_string()).collect();
        let values: Vec<String> =
            trial.instance.values.iter().map(|z| format!("{}:{}", z.re.as_f64(), z.im.as_f64())).collect();
        let o = &trial.outcome;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            t,
            support.join(";"),
            values.join(";"),
            o.relative_l2_error.as_f64(),
            o.support_match,
            o.l1_value.as_f64(),
            o.feasibility_residual.as_f64(),
            o.iterations,
            o.converged,
            o.success
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub na_range: RangeInclusive<usize>,
    pub nb_range: RangeInclusive<usize>,
    pub trials_per_cell: usize,
    pub strategies: Vec<SupportStrategy>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub na: usize,
    pub nb: usize,
    pub strategy: String,
    pub trials: usize,
    pub successes: usize,
    pub converged: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalSummary {
    pub total: usize,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionGrid {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub cells: Vec<GridCell>,
}

impl PhaseTransitionGrid {
    pub fn cell(&self, strategy: &str, na: usize, nb: usize) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.strategy == strategy && c.na == na && c.nb == nb)
    }

    pub fn strategies(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.strategy) {
                out.push(c.strategy.clone());
            }
        }
        out
    }

    /// Pooled success rate for each total sparsity `nA + nB`, with Wilson intervals.
    pub fn rate_by_total(&self, strategy: &str) -> Vec<TotalSummary> {
        let mut totals: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
        for c in self.cells.iter().filter(|c| c.strategy == strategy) {
            let e = totals.entry(c.na + c.nb).or_default();
            e.0 += c.trials;
            e.1 += c.successes;
        }
        totals
            .into_iter()
            .map(|(total, (trials, successes))| {
                let (ci_low, ci_high) = wilson_interval(successes, trials);
                TotalSummary { total, trials, successes, rate: successes as f64 / trials as f64, ci_low, ci_high }
            })
            .collect()
    }

    /// `nA,nB,strategy,trials,successes,rate`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nA,nB,strategy,trials,successes,rate\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{},{},{},{}\n", c.na, c.nb, c.strategy, c.trials, c.successes, c.rate));
        }
        out
    }
}

/// Success-rate grid over `(nA, nB)`, one series per A-support strategy.
///
/// Trial `t` of cell `(strategy, nA, nB)` uses its own stream derived from
/// the master seed, so the grid is identical for any thread count.
pub fn run_recovery_sweep<T: Real>(
    d: &PartitionedDictionary<T>,
    sweep: &SweepSpec,
    coeff: &CoefficientSpec,
    cfg: &BpSolverConfig<T>,
) -> Result<PhaseTransitionGrid> {
    if sweep.na_range.is_empty() || sweep.nb_range.is_empty() || sweep.strategies.is_empty() {
        return Err(Error::InvalidArgument("sweep ranges and strategy list must be non-empty".into()));
    }
    if *sweep.na_range.end() > d.na() || *sweep.nb_range.end() > d.nb() {
        return Err(Error::InvalidArgument(format!(
            "sweep ranges exceed block sizes (Na = {}, Nb = {})",
            d.na(),
            d.nb()
        )));
    }
    if sweep.trials_per_cell == 0 {
        return Err(Error::InvalidArgument("trials per cell must be >= 1".into()));
    }
    cfg.validate()?;

    let mut cells = Vec::new();
    for (si, strategy) in sweep.strategies.iter().enumerate() {
        for na in sweep.na_range.clone() {
            choose_support_a(strategy, d.na(), na, &mut trial_rng(0, 0))?;
            for nb in sweep.nb_range.clone() {
                cells.push((si, strategy, na, nb));
            }
        }
    }

    let results: Vec<GridCell> = cells
        .par_iter()
        .map(|&(si, strategy, na, nb)| {
            let cell_key = mix(mix(si as u64, na as u64), nb as u64);
            let outcomes: Vec<(bool, bool)> = (0..sweep.trials_per_cell)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(sweep.master_seed, mix(cell_key, t as u64));
                    let support_a = choose_support_a(strategy, d.na(), na, &mut rng)?;
                    let spec = HybridSupportSpec { support_a, nb, seed: sweep.master_seed };
                    let trial = recovery_trial(d, &spec, coeff, cfg, &mut rng)?;
                    Ok((trial.outcome.success, trial.outcome.converged))
                })
                .collect::<Result<_>>()?;
            let successes = outcomes.iter().filter(|o| o.0).count();
            let converged = outcomes.iter().filter(|o| o.1).count();
            Ok(GridCell {
                na,
                nb,
                strategy: strategy.label(),
                trials: sweep.trials_per_cell,
                successes,
                converged,
                rate: successes as f64 / sweep.trials_per_cell as f64,
            })
        })
        .collect::<Result<_>>()?;

    Ok(PhaseTransitionGrid { m: d.m(), n: d.n(), cells: results })
}
