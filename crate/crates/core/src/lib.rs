//! Sparse recovery with partially random supports.
//!
//! A dictionary `D = [A B]` is split into a sub-dictionary `A` on which the
//! support of a sparse vector may be arbitrary and a sub-dictionary `B` on
//! which it is drawn uniformly at random. This crate builds and analyzes such
//! dictionaries ([`dictionary`]), samples coefficient vectors from the hybrid
//! model ([`model`]), evaluates the closed-form sparsity conditions
//! ([`threshold`]), measures the smallest singular value of random
//! sub-dictionaries together with the norm bounds that control it
//! ([`concentration`]), and runs ℓ1 / ℓ0 recovery experiments ([`recovery`]).
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, with `*32` variants for single precision.

pub mod concentration;
pub mod dictionary;
pub mod error;
pub mod io;
pub mod matrix;
pub mod model;
pub mod recovery;
pub mod rng;
pub mod scalar;
pub mod summary;
pub mod threshold;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix = matrix::ComplexMatrix<f64>;
pub type ComplexMatrix32 = matrix::ComplexMatrix<f32>;
pub type Dictionary = dictionary::PartitionedDictionary<f64>;
pub type Dictionary32 = dictionary::PartitionedDictionary<f32>;
pub type DictionaryStats = dictionary::DictionaryStats<f64>;
pub type DictionaryStats32 = dictionary::DictionaryStats<f32>;
pub type TheoremParams = threshold::TheoremParams<f64>;
pub type ConditionReport = threshold::ConditionReport<f64>;
pub type ScalingReport = threshold::ScalingReport<f64>;
pub type TailBoundSpec = concentration::TailBoundSpec<f64>;
pub type ProofChainRecord = concentration::ProofChainRecord<f64>;
pub type SminExperimentResult = concentration::SminExperimentResult<f64>;
pub type BpSolverConfig = recovery::BpSolverConfig<f64>;
pub type RecoveryOutcome = recovery::RecoveryOutcome<f64>;
pub type SparseInstance = model::SparseInstance<f64>;
