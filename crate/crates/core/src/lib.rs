//! Statistical auditing of sequential assignment processes.
//!
//! The library asks a concrete question: is the stream of case assignments
//! observed at a court consistent with the claim that cases are distributed
//! at random among the eligible chairs? It answers by fitting multinomial
//! logistic regression models in which chairs that cannot receive cases on a
//! given day (an empty or presidency chair) enter as a structured
//! missing-data mechanism, then comparing nested model hypotheses with
//! likelihood-ratio tests and reporting Bonferroni-corrected confidence
//! intervals for per-chair assignment probabilities.
//!
//! Modules:
//!
//! * [`model`]: sample units, the six nested model parameterizations, and
//!   the probability / log-likelihood / score functions.
//! * [`estimation`]: maximum-likelihood fitting, observed information,
//!   delta-method probability intervals, likelihood-ratio tests.
//! * [`ingest`]: assignment-event files, availability calendars, running
//!   proportion covariates, and aggregate tables.
//! * [`simulate`]: seeded synthetic assignment streams, brute-force
//!   oracles, and estimator validation experiments.
//! * [`dist`]: chi-squared survival function and normal quantiles.
//!
//! End to end on a synthetic stream:
//!
//! ```
//! use sortition_audit::estimation::{fit_mle, lrt, probability_ci, FitOptions, Scenario};
//! use sortition_audit::model::{ModelSpec, ModelVariant};
//! use sortition_audit::simulate::{simulate_assignments, AssignmentRule, GeneratorSpec};
//! use sortition_audit::CourtConfig;
//!
//! let config = CourtConfig::with_proportion(5, &["HC", "RE"])?;
//! let mut gen = GeneratorSpec::new(AssignmentRule::UniformAvailable, 120, 12, 7);
//! gen.intensities = vec![12, 8];
//! let stream = simulate_assignments(&gen, &config)?;
//!
//! let m4 = fit_mle(&stream.sample, &ModelSpec::new(ModelVariant::M4, &config)?,
//!                  &FitOptions::default())?;
//! let m6 = fit_mle(&stream.sample, &ModelSpec::new(ModelVariant::M6, &config)?,
//!                  &FitOptions::default())?;
//!
//! // the two-coefficient model nests in the per-chair one with 6 fewer cells
//! let test = lrt(&m4, &m6)?;
//! assert_eq!(test.df, 6);
//!
//! // intervals for a new case when every chair holds an equal share
//! let table = probability_ci(&m6, &Scenario::equal_proportions(0, 5), 0.99, None)?;
//! assert!(table.rows.iter().all(|r| r.lower <= 0.2 && 0.2 <= r.upper));
//! # Ok::<(), sortition_audit::Error>(())
//! ```

pub mod config;
pub mod date;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod ingest;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod simulate;

pub use config::CourtConfig;
pub use date::Date;
pub use error::{Error, Result};
pub use model::{ModelSpec, ModelVariant, ParameterVector, SampleUnit};
