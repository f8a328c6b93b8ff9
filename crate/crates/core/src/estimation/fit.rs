//! Newton ascent for the multinomial logit likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::model::{
    log_likelihood, score, unit_softmax, CellKind, ModelSpec, ParameterVector, SampleUnit,
};

/// Tunables for [`fit_mle`]. The defaults implement the documented policy:
/// zero start, Newton steps with a ridge fallback, convergence at gradient
/// max-norm below 1e-8, at most 500 iterations, and a quasi-separation flag
/// once any coefficient passes 30 in magnitude.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub ll_tolerance: f64,
    pub separation_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            ll_tolerance: 1e-12,
            separation_threshold: 30.0,
        }
    }
}

/// Outcome of a maximum-likelihood fit.
///
/// `converged` is set only when the final gradient max-norm is below the
/// requested tolerance; hitting the iteration cap or a likelihood plateau
/// leaves it false rather than raising an error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub estimates: ParameterVector,
    pub log_likelihood_at_max: f64,
    /// Negative Hessian of the log-likelihood at the estimates.
    pub observed_information: SymMatrix,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// True if any coefficient exceeded the separation threshold while
    /// fitting; such estimates sit on a likelihood plateau and their
    /// magnitudes should not be interpreted.
    pub quasi_separated: bool,
    pub sample_units: usize,
    pub sample_total: u64,
}

/// Observed information (negative Hessian of the log-likelihood) at
/// `params`, computed analytically:
///
/// ```text
/// I = sum_s N_s * ( sum_j p_sj d_sj d_sj' - mu_s mu_s' ),   mu_s = sum_j p_sj d_sj
/// ```
///
/// where `d_sj` is the design row of chair `j` in unit `s` and the sums run
/// over available chairs. The result is symmetric positive semi-definite.
pub fn observed_information(
    params: &ParameterVector,
    sample: &[SampleUnit],
    spec: &ModelSpec,
) -> Result<SymMatrix> {
    params.check_spec(spec)?;
    let p_count = spec.param_count();
    let mut info = SymMatrix::zeros(p_count);
    let mut mu = vec![0.0; p_count];
    let mut seen = vec![false; p_count];
    let mut touched: Vec<usize> = Vec::new();

    for unit in sample {
        let circ = unit.circumstances();
        let softmax = unit_softmax(spec, params, &circ)?;
        let n_s = unit.total() as f64;

        for &(j, _, p) in &softmax.chairs {
            let proportion = spec
                .proportion_covariate()
                .map_or(0.0, |c| circ.covariate(j, c));
            let cells = spec.active_cells(circ.class_index, j, proportion);
            for (a, xa) in cells.iter() {
                if !seen[a] {
                    seen[a] = true;
                    touched.push(a);
                }
                mu[a] += p * xa;
                for (b, xb) in cells.iter() {
                    if a <= b {
                        info.add(a, b, n_s * p * xa * xb);
                    }
                }
            }
        }
        for (ti, &a) in touched.iter().enumerate() {
            for &b in &touched[ti..] {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                info.add(lo, hi, -n_s * mu[a] * mu[b]);
            }
        }
        for &a in &touched {
            mu[a] = 0.0;
            seen[a] = false;
        }
        touched.clear();
    }
    Ok(info)
}

/// Fit `spec` to `sample` by maximizing the log-likelihood.
///
/// Starts from the all-zero (uniform) coefficient vector and takes Newton
/// steps using the analytic score and observed information, halving the step
/// until the likelihood does not decrease. When the information matrix
/// cannot be factored, an escalating ridge is added; if that also fails the
/// step falls back to steepest ascent. Deterministic for fixed inputs.
pub fn fit_mle(sample: &[SampleUnit], spec: &ModelSpec, options: &FitOptions) -> Result<FitResult> {
    if sample.is_empty() {
        return Err(Error::Data("cannot fit an empty sample".into()));
    }
    check_exposure(sample, spec)?;

    let mut params = ParameterVector::zeros(spec);
    let mut ll = log_likelihood(&params, sample, spec)?;
    let mut quasi_separated = false;
    let mut iterations = 0;
    let mut converged = false;
    let mut gradient_norm;
    let mut stalls = 0;

    loop {
        let grad = score(&params, sample, spec)?;
        gradient_norm = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if gradient_norm < options.gradient_tolerance {
            converged = true;
            break;
        }
        if iterations >= options.max_iterations || stalls >= 3 {
            break;
        }
        iterations += 1;

        let info = observed_information(&params, sample, spec)?;
        let direction = newton_direction(&info, &grad);

        // Backtracking line search: accept the first step that does not
        // measurably decrease the likelihood. Near the optimum genuine
        // Newton gains sink below the floating-point resolution of the
        // log-likelihood, so acceptance allows a few ulps of noise; the
        // plateau counter bounds any drift.
        let noise = 4.0 * f64::EPSILON * (1.0 + ll.abs());
        let mut step = 1.0;
        let mut accepted = None;
        let mut saw_finite = false;
        while step >= 1e-18 {
            let mut candidate = params.clone();
            for (c, d) in candidate.values_mut().iter_mut().zip(&direction) {
                *c += step * d;
            }
            if candidate.values().iter().all(|v| v.is_finite()) {
                let candidate_ll = log_likelihood(&candidate, sample, spec)?;
                if candidate_ll.is_finite() {
                    saw_finite = true;
                    if candidate_ll >= ll - noise {
                        accepted = Some((candidate, candidate_ll));
                        break;
                    }
                }
            }
            step /= 2.0;
        }
        match accepted {
            Some((candidate, candidate_ll)) => {
                // plateau detection is absolute: near the optimum genuine
                // Newton gains shrink below any |ll|-relative threshold
                // while the gradient still has an order of magnitude to go
                let gain = candidate_ll - ll;
                if gain <= options.ll_tolerance {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                params = candidate;
                ll = candidate_ll;
                if params.max_abs() > options.separation_threshold {
                    quasi_separated = true;
                }
            }
            None if !saw_finite => return Err(Error::NoFiniteStep),
            None => {
                // finite steps exist but none improves: numerical optimum
                stalls += 1;
            }
        }
    }

    let observed_information_at_max = observed_information(&params, sample, spec)?;
    Ok(FitResult {
        spec: spec.clone(),
        estimates: params,
        log_likelihood_at_max: ll,
        observed_information: observed_information_at_max,
        converged,
        iterations,
        final_gradient_norm: gradient_norm,
        quasi_separated,
        sample_units: sample.len(),
        sample_total: sample.iter().map(|u| u.total()).sum(),
    })
}

/// Newton direction `I^{-1} g`, with an escalating diagonal ridge when the
/// factorization fails and steepest ascent as the last resort.
fn newton_direction(info: &SymMatrix, grad: &[f64]) -> Vec<f64> {
    if let Some(chol) = info.cholesky() {
        return chol.solve(grad);
    }
    let scale = info.max_abs_diag().max(1.0);
    let mut lambda = 1e-10 * scale;
    while lambda <= scale {
        if let Some(chol) = info.with_ridge(lambda).cholesky() {
            return chol.solve(grad);
        }
        lambda *= 100.0;
    }
    grad.to_vec()
}

/// Every coefficient cell must have positive exposure in the sample:
/// at least one unit where its chair is available (and, for class cells,
/// of that class). Cells without exposure are inestimable.
fn check_exposure(sample: &[SampleUnit], spec: &ModelSpec) -> Result<()> {
    let n = spec.n_chairs();
    let c = spec.n_classes();
    let reference = spec.reference_idx();

    let mut chair_avail = vec![false; n];
    let mut class_chair = vec![vec![false; n]; c];
    let mut any_nonref = false;
    let mut class_nonref = vec![false; c];

    for unit in sample {
        for j in unit.available_chairs() {
            chair_avail[j] = true;
            class_chair[unit.class_index][j] = true;
            if j != reference {
                any_nonref = true;
                class_nonref[unit.class_index] = true;
            }
        }
    }

    let mut missing = Vec::new();
    for cell in spec.cells() {
        let exposed = match (cell.chair, cell.kind) {
            (Some(j), CellKind::Class(i)) => class_chair[i][j],
            (Some(j), _) => chair_avail[j],
            (None, CellKind::Class(i)) => class_nonref[i],
            (None, _) => any_nonref,
        };
        if !exposed {
            missing.push(format!("{cell}"));
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Inestimable(missing.join(", ")))
    }
}
