//! Synthetic assignment streams with known generative rules.
//!
//! The generator is the validation harness for the estimator: it draws
//! case-by-case assignments under a chosen rule, logs the exact probability
//! vector used for every (day, class) draw, and emits the same event CSV the
//! ingest module parses.
//!
//! Reproducibility: streams are drawn from a ChaCha8 generator seeded with
//! an explicit 64-bit value. The draw order is fixed: days outermost,
//! classes in label order within a day; per (day, class): the Poisson
//! arrival draw (when enabled), then the exogenous covariate draws (when
//! that mode is selected and arrivals are positive), then one categorical
//! draw per case. Identical [`GeneratorSpec`]s produce byte-identical
//! outputs. Replicated experiments derive per-replication seeds with
//! [`replicate_seed`].

mod experiment;
mod generator;
mod oracle;

pub use experiment::{
    default_threads, lrt_calibration, recovery_experiment, replicate_seed, CalibrationOptions,
    CalibrationReport, RecoveryOptions, RecoveryReport, SizeRecovery, THREADS_ENV_VAR,
};
pub use generator::{
    simulate_assignments, AssignmentRule, AvailabilityScenario, CovariateProcess, GeneratorSpec,
    SimOutput, TruthRecord,
};
pub use oracle::brute_force_loglik;
