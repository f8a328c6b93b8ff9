//! Sample units: one multinomial observation per (day, class).

use serde::{Deserialize, Serialize};

use crate::config::CourtConfig;
use crate::date::Date;
use crate::error::{Error, Result};

/// One (day, class) observation: how many cases landed on each chair, which
/// chairs could receive cases, and the per-chair covariates in effect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleUnit {
    pub day: Date,
    /// Index into the configuration's class labels.
    pub class_index: usize,
    /// Cases assigned to each chair; zero on unavailable chairs.
    pub counts: Vec<u64>,
    pub availability: Vec<bool>,
    /// Per-chair covariate rows, `n_chairs x covariate_names.len()`.
    pub covariates: Vec<Vec<f64>>,
}

impl SampleUnit {
    pub fn new(
        config: &CourtConfig,
        day: Date,
        class_index: usize,
        counts: Vec<u64>,
        availability: Vec<bool>,
        covariates: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let unit = SampleUnit {
            day,
            class_index,
            counts,
            availability,
            covariates,
        };
        unit.validate(config)?;
        Ok(unit)
    }

    pub fn validate(&self, config: &CourtConfig) -> Result<()> {
        let n = config.n_chairs;
        if self.class_index >= config.n_classes() {
            return Err(Error::Sample(format!(
                "class index {} outside 0..{}",
                self.class_index,
                config.n_classes()
            )));
        }
        if self.counts.len() != n || self.availability.len() != n || self.covariates.len() != n {
            return Err(Error::Sample(format!(
                "unit vectors must have length {n} (counts {}, availability {}, covariates {})",
                self.counts.len(),
                self.availability.len(),
                self.covariates.len()
            )));
        }
        let k = config.covariate_names.len();
        for (j, row) in self.covariates.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Sample(format!(
                    "chair {} carries {} covariates, configuration names {k}",
                    j + 1,
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Sample(format!(
                    "non-finite covariate on chair {}",
                    j + 1
                )));
            }
        }
        if !self.availability.iter().any(|&a| a) {
            return Err(Error::NoAvailableChair);
        }
        for j in 0..n {
            if !self.availability[j] && self.counts[j] > 0 {
                return Err(Error::Sample(format!(
                    "{} cases assigned to unavailable chair {} on {}",
                    self.counts[j],
                    j + 1,
                    self.day
                )));
            }
        }
        if self.total() == 0 {
            return Err(Error::Sample(format!(
                "unit {} has no assignments",
                self.day
            )));
        }
        if let Some(p) = config.proportion_idx() {
            let mut sum = 0.0;
            for row in &self.covariates {
                let x = row[p];
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Sample(format!("proportion {x} outside [0,1]")));
                }
                sum += x;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Sample(format!(
                    "proportions sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Total cases in this unit.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn n_chairs(&self) -> usize {
        self.counts.len()
    }

    /// Indices of available chairs.
    pub fn available_chairs(&self) -> impl Iterator<Item = usize> + '_ {
        self.availability
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| a.then_some(j))
    }

    pub fn covariate(&self, chair_idx: usize, cov_idx: usize) -> f64 {
        self.covariates[chair_idx][cov_idx]
    }

    pub(crate) fn circumstances(&self) -> Circumstances<'_> {
        Circumstances {
            class_index: self.class_index,
            availability: &self.availability,
            covariates: &self.covariates,
        }
    }
}

/// Borrowed view of the model inputs of a unit or scenario: the class, the
/// availability mask, and the covariate matrix (no counts).
#[derive(Clone, Copy, Debug)]
pub struct Circumstances<'a> {
    pub class_index: usize,
    pub availability: &'a [bool],
    pub covariates: &'a [Vec<f64>],
}

impl<'a> Circumstances<'a> {
    pub fn n_chairs(&self) -> usize {
        self.availability.len()
    }

    pub fn is_available(&self, chair_idx: usize) -> bool {
        self.availability[chair_idx]
    }

    pub fn available_chairs(&self) -> impl Iterator<Item = usize> + 'a {
        self.availability
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| a.then_some(j))
    }

    pub fn covariate(&self, chair_idx: usize, cov_idx: usize) -> f64 {
        self.covariates[chair_idx][cov_idx]
    }
}
