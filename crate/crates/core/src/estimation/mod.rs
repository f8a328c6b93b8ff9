//! Maximum-likelihood estimation and uncertainty quantification.

mod ci;
mod fit;
mod lrt;

pub use ci::{probability_ci, CiRow, CiTable, Scenario};
pub use fit::{fit_mle, observed_information, FitOptions, FitResult};
pub use lrt::{hypothesis_vs_m1, lrt, LrtResult};
