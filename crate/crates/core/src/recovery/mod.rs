//! Sparse recovery: ℓ1 minimization, exhaustive ℓ0 search, and Monte Carlo
//! experiments under the hybrid support model.

mod bp;
mod l0;
mod sweep;

pub use bp::{solve_bp, BpSolution, BpSolverConfig};
pub use l0::{brute_force_l0, L0Result, L0_MAX_COLUMNS, L0_MAX_SPARSITY};
pub use sweep::{
    recovery_trial, run_recovery_sweep, run_recovery_trials, trials_to_csv, GridCell, PhaseTransitionGrid,
    RecoveryOutcome, RecoveryTrial, SweepSpec, TotalSummary, SUCCESS_TOLERANCE,
};
