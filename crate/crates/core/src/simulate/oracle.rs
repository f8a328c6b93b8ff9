//! Brute-force likelihood oracle.
//!
//! Used in tests to validate the stabilized log-likelihood: it recomputes
//! probabilities by *direct* exponentiation (no max shift, no log-space
//! normalizer) and rebuilds each linear predictor from the semantic cell
//! list instead of the fast per-variant index arithmetic. Its domain is
//! small instances with moderate coefficients; anything that overflows is an
//! error, not an approximation.

use crate::error::{Error, Result};
use crate::model::{CellKind, ModelSpec, ParameterVector, SampleUnit};
use crate::numeric::KahanSum;

/// Log-likelihood by direct softmax, for cross-checking
/// [`crate::model::log_likelihood`] on small instances.
pub fn brute_force_loglik(
    params: &ParameterVector,
    sample: &[SampleUnit],
    spec: &ModelSpec,
) -> Result<f64> {
    params.check_spec(spec)?;
    let cells = spec.cells();
    let mut total = KahanSum::new();
    for unit in sample {
        // direct, unshifted weights
        let mut weights = vec![0.0_f64; unit.n_chairs()];
        let mut z = 0.0_f64;
        for j in unit.available_chairs() {
            let eta = slow_eta(spec, params, &cells, unit, j);
            let w = eta.exp();
            if !w.is_finite() || w == 0.0 {
                return Err(Error::OracleOverflow(format!(
                    "exp({eta}) left the oracle's domain"
                )));
            }
            weights[j] = w;
            z += w;
        }
        if !z.is_finite() {
            return Err(Error::OracleOverflow("normalizer overflowed".into()));
        }
        for j in unit.available_chairs() {
            let y = unit.counts[j];
            if y > 0 {
                let p = weights[j] / z;
                if p == 0.0 {
                    return Err(Error::OracleOverflow(format!(
                        "probability underflowed for chair {}",
                        j + 1
                    )));
                }
                total.add(y as f64 * p.ln());
            }
        }
    }
    Ok(total.value())
}

/// Linear predictor assembled by scanning every stored cell and asking
/// whether it applies to this (unit, chair), a deliberately different
/// route than the production code path.
fn slow_eta(
    spec: &ModelSpec,
    params: &ParameterVector,
    cells: &[crate::model::CellId],
    unit: &SampleUnit,
    chair_idx: usize,
) -> f64 {
    if chair_idx == spec.reference_idx() {
        return 0.0;
    }
    let mut eta = 0.0;
    for (flat, cell) in cells.iter().enumerate() {
        let chair_matches = match cell.chair {
            Some(j) => j == chair_idx,
            None => true,
        };
        if !chair_matches {
            continue;
        }
        let x = match cell.kind {
            CellKind::Class(i) => {
                if unit.class_index == i {
                    1.0
                } else {
                    0.0
                }
            }
            CellKind::Intercept => 1.0,
            CellKind::Proportion => match spec.proportion_covariate() {
                Some(c) => unit.covariate(chair_idx, c),
                None => 0.0,
            },
        };
        eta += params.get(flat) * x;
    }
    eta
}
