//! Probability, log-likelihood, and score of the multinomial logit with an
//! availability (missing-data) mechanism.
//!
//! For a unit with availability mask `v` and linear predictors `eta` (zero
//! for the reference chair), the assignment probabilities are
//!
//! ```text
//! p[j] = v[j] * exp(eta[j]) / sum_l v[l] * exp(eta[l])
//! ```
//!
//! so unavailable chairs have probability exactly zero and the remaining
//! mass renormalizes over the available set. All exponentials are max-shifted
//! and log-probabilities are kept in log space, so predictors of magnitude
//! several hundred neither overflow nor underflow into NaN.

use crate::error::{Error, Result};
use crate::model::params::ParameterVector;
use crate::model::sample::{Circumstances, SampleUnit};
use crate::model::spec::ModelSpec;
use crate::numeric::KahanSum;

/// Linear predictor (log-odds versus the reference chair) for one chair of
/// one unit. Zero for the reference chair. The chair must be available.
pub fn linear_predictor(
    params: &ParameterVector,
    unit: &SampleUnit,
    chair_idx: usize,
    spec: &ModelSpec,
) -> Result<f64> {
    params.check_spec(spec)?;
    check_unit(unit, spec)?;
    if !unit.availability[chair_idx] {
        return Err(Error::UnavailableChair { chair: chair_idx + 1 });
    }
    Ok(eta(spec, params, &unit.circumstances(), chair_idx))
}

pub(crate) fn eta(
    spec: &ModelSpec,
    params: &ParameterVector,
    circ: &Circumstances<'_>,
    chair_idx: usize,
) -> f64 {
    let proportion = spec
        .proportion_covariate()
        .map_or(0.0, |p| circ.covariate(chair_idx, p));
    spec.active_cells(circ.class_index, chair_idx, proportion)
        .iter()
        .map(|(idx, x)| params.get(idx) * x)
        .sum()
}

/// Per-unit softmax state shared by the likelihood, score, and information
/// computations: linear predictors and probabilities over available chairs.
pub(crate) struct UnitSoftmax {
    /// `(chair index, eta, probability)` for each available chair.
    pub chairs: Vec<(usize, f64, f64)>,
    /// Normalizer `log sum_l exp(eta_l)` over available chairs.
    pub log_z: f64,
}

pub(crate) fn unit_softmax(
    spec: &ModelSpec,
    params: &ParameterVector,
    circ: &Circumstances<'_>,
) -> Result<UnitSoftmax> {
    let mut chairs: Vec<(usize, f64, f64)> = circ
        .available_chairs()
        .map(|j| (j, eta(spec, params, circ, j), 0.0))
        .collect();
    if chairs.is_empty() {
        return Err(Error::NoAvailableChair);
    }
    let max_eta = chairs
        .iter()
        .fold(f64::NEG_INFINITY, |m, &(_, e, _)| m.max(e));
    let mut sum = 0.0;
    for &mut (_, e, ref mut w) in chairs.iter_mut() {
        *w = (e - max_eta).exp();
        sum += *w;
    }
    for &mut (_, _, ref mut w) in chairs.iter_mut() {
        *w /= sum;
    }
    Ok(UnitSoftmax {
        chairs,
        log_z: max_eta + sum.ln(),
    })
}

/// Assignment probabilities for every chair of a unit: exactly zero on
/// unavailable chairs, softmax of the linear predictors on available ones.
pub fn assignment_probabilities(
    params: &ParameterVector,
    unit: &SampleUnit,
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    params.check_spec(spec)?;
    check_unit(unit, spec)?;
    probabilities_for(params, &unit.circumstances(), spec)
}

/// [`assignment_probabilities`] over bare circumstances (no counts), as used
/// for predicting a new case.
pub fn probabilities_for(
    params: &ParameterVector,
    circ: &Circumstances<'_>,
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    params.check_spec(spec)?;
    let softmax = unit_softmax(spec, params, circ)?;
    let mut probs = vec![0.0; circ.n_chairs()];
    for &(j, _, p) in &softmax.chairs {
        probs[j] = p;
    }
    Ok(probs)
}

/// Log-likelihood of the sample up to the multinomial coefficients, i.e.
/// `sum_s sum_j y[s][j] * v[s][j] * log p[s][j]`, with `0 * log 0 = 0`.
pub fn log_likelihood(
    params: &ParameterVector,
    sample: &[SampleUnit],
    spec: &ModelSpec,
) -> Result<f64> {
    params.check_spec(spec)?;
    let mut total = KahanSum::new();
    for unit in sample {
        check_unit(unit, spec)?;
        let softmax = unit_softmax(spec, params, &unit.circumstances())?;
        for &(j, eta_j, _) in &softmax.chairs {
            let y = unit.counts[j];
            if y > 0 {
                total.add(y as f64 * (eta_j - softmax.log_z));
            }
        }
    }
    Ok(total.value())
}

/// Gradient of [`log_likelihood`] with respect to every stored coefficient:
/// for cell `k`, `sum_s sum_j x[s][j][k] * (y[s][j] - N_s * p[s][j])` over
/// the available chairs where the cell is active.
pub fn score(
    params: &ParameterVector,
    sample: &[SampleUnit],
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    params.check_spec(spec)?;
    let mut grad = vec![0.0; spec.param_count()];
    for unit in sample {
        check_unit(unit, spec)?;
        let circ = unit.circumstances();
        let softmax = unit_softmax(spec, params, &circ)?;
        let n_s = unit.total() as f64;
        for &(j, _, p) in &softmax.chairs {
            let residual = unit.counts[j] as f64 - n_s * p;
            let proportion = spec
                .proportion_covariate()
                .map_or(0.0, |c| circ.covariate(j, c));
            for (idx, x) in spec.active_cells(circ.class_index, j, proportion).iter() {
                grad[idx] += x * residual;
            }
        }
    }
    Ok(grad)
}

fn check_unit(unit: &SampleUnit, spec: &ModelSpec) -> Result<()> {
    if unit.n_chairs() != spec.n_chairs() {
        return Err(Error::Sample(format!(
            "unit has {} chairs, model expects {}",
            unit.n_chairs(),
            spec.n_chairs()
        )));
    }
    for j in 0..unit.n_chairs() {
        if !unit.availability[j] && unit.counts[j] > 0 {
            return Err(Error::Sample(format!(
                "{} cases on unavailable chair {} ({})",
                unit.counts[j],
                j + 1,
                unit.day
            )));
        }
    }
    Ok(())
}
