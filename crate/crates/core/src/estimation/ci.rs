//! Delta-method confidence intervals for per-chair assignment probabilities.

use serde::{Deserialize, Serialize};

use crate::dist::normal_quantile;
use crate::error::{Error, Result};
use crate::estimation::fit::FitResult;
use crate::model::{unit_softmax, Circumstances, ModelSpec};

/// Circumstances of a hypothetical new case: its class, which chairs are
/// available, and the per-chair covariates in effect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub class_index: usize,
    pub availability: Vec<bool>,
    pub covariates: Vec<Vec<f64>>,
}

impl Scenario {
    /// The reference scenario: every chair available and an equal share of
    /// the class's history on each, i.e. a proportion of `1/n_chairs`.
    pub fn equal_proportions(class_index: usize, n_chairs: usize) -> Scenario {
        Scenario {
            class_index,
            availability: vec![true; n_chairs],
            covariates: vec![vec![1.0 / n_chairs as f64]; n_chairs],
        }
    }

    /// Equal shares over the available chairs only; unavailable chairs carry
    /// a zero proportion.
    pub fn equal_proportions_with_availability(
        class_index: usize,
        availability: Vec<bool>,
    ) -> Result<Scenario> {
        let available = availability.iter().filter(|&&a| a).count();
        if available == 0 {
            return Err(Error::NoAvailableChair);
        }
        let share = 1.0 / available as f64;
        let covariates = availability
            .iter()
            .map(|&a| vec![if a { share } else { 0.0 }])
            .collect();
        Ok(Scenario {
            class_index,
            availability,
            covariates,
        })
    }

    pub fn circumstances(&self) -> Circumstances<'_> {
        Circumstances {
            class_index: self.class_index,
            availability: &self.availability,
            covariates: &self.covariates,
        }
    }

    pub fn n_available(&self) -> usize {
        self.availability.iter().filter(|&&a| a).count()
    }

    fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let n = spec.n_chairs();
        if self.availability.len() != n || self.covariates.len() != n {
            return Err(Error::Sample(format!(
                "scenario must describe {n} chairs (availability {}, covariates {})",
                self.availability.len(),
                self.covariates.len()
            )));
        }
        if self.class_index >= spec.n_classes() {
            return Err(Error::Sample(format!(
                "scenario class index {} outside 0..{}",
                self.class_index,
                spec.n_classes()
            )));
        }
        if self.n_available() == 0 {
            return Err(Error::NoAvailableChair);
        }
        if let Some(p) = spec.proportion_covariate() {
            let mut sum = 0.0;
            for row in &self.covariates {
                let x = *row.get(p).ok_or_else(|| {
                    Error::Sample("scenario covariate row is missing the proportion".into())
                })?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Sample(format!(
                        "scenario proportion {x} outside [0,1]"
                    )));
                }
                sum += x;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Sample(format!(
                    "scenario proportions sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Point estimate and interval for one chair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiRow {
    /// 1-based chair number.
    pub chair: usize,
    pub available: bool,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Per-chair probability estimates and Bonferroni-corrected interval bounds
/// for one scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiTable {
    pub scenario: Scenario,
    pub confidence_level: f64,
    pub family_size: usize,
    pub rows: Vec<CiRow>,
}

/// Wald intervals for the fitted assignment probabilities of a scenario,
/// corrected for simultaneous inference.
///
/// Each available chair's variance comes from the delta method,
/// `g' I^{-1} g` with `g` the gradient of the probability in the
/// coefficients; the per-interval confidence is raised to
/// `1 - (1 - level)/family_size` (Bonferroni). `family_size` defaults to the
/// number of available chairs in the scenario. Bounds are clipped to [0, 1];
/// unavailable chairs report a zero point with degenerate bounds.
pub fn probability_ci(
    fit: &FitResult,
    scenario: &Scenario,
    level: f64,
    family_size: Option<usize>,
) -> Result<CiTable> {
    if !fit.converged {
        return Err(Error::NotConverged(
            "probability intervals require a converged fit".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must lie in (0,1), got {level}"
        )));
    }
    let spec = &fit.spec;
    scenario.validate(spec)?;
    let family_size = family_size.unwrap_or_else(|| scenario.n_available());
    if family_size == 0 {
        return Err(Error::Domain("family size must be at least 1".into()));
    }

    let chol = fit.observed_information.cholesky().ok_or_else(|| {
        Error::SingularInformation("cannot form intervals for a non-identifiable fit".into())
    })?;
    let z = normal_quantile(1.0 - (1.0 - level) / (2.0 * family_size as f64))?;

    let circ = scenario.circumstances();
    let softmax = unit_softmax(spec, &fit.estimates, &circ)?;
    let p_count = spec.param_count();

    // mean design row mu = sum_j p_j d_j
    let mut mu = vec![0.0; p_count];
    for &(j, _, p) in &softmax.chairs {
        let proportion = spec
            .proportion_covariate()
            .map_or(0.0, |c| circ.covariate(j, c));
        for (idx, x) in spec.active_cells(circ.class_index, j, proportion).iter() {
            mu[idx] += p * x;
        }
    }

    let mut points = vec![0.0; spec.n_chairs()];
    for &(j, _, p) in &softmax.chairs {
        points[j] = p;
    }

    let mut rows = Vec::with_capacity(spec.n_chairs());
    for (chair_idx, &chair_available) in scenario.availability.iter().enumerate() {
        if !chair_available {
            rows.push(CiRow {
                chair: chair_idx + 1,
                available: false,
                point: 0.0,
                lower: 0.0,
                upper: 0.0,
            });
            continue;
        }
        let p = points[chair_idx];
        // gradient of p_j in the coefficients: p_j (d_j - mu)
        let mut grad: Vec<f64> = mu.iter().map(|m| -p * m).collect();
        let proportion = spec
            .proportion_covariate()
            .map_or(0.0, |c| circ.covariate(chair_idx, c));
        for (idx, x) in spec
            .active_cells(circ.class_index, chair_idx, proportion)
            .iter()
        {
            grad[idx] += p * x;
        }
        let variance = {
            let solved = chol.solve(&grad);
            grad.iter().zip(&solved).map(|(a, b)| a * b).sum::<f64>()
        };
        let half = z * variance.max(0.0).sqrt();
        rows.push(CiRow {
            chair: chair_idx + 1,
            available: true,
            point: p,
            lower: (p - half).clamp(0.0, 1.0),
            upper: (p + half).clamp(0.0, 1.0),
        });
    }
    Ok(CiTable {
        scenario: scenario.clone(),
        confidence_level: level,
        family_size,
        rows,
    })
}
