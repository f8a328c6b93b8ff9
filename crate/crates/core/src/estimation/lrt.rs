//! Likelihood-ratio tests between nested model specifications.

use serde::{Deserialize, Serialize};

use crate::dist::chi_squared_sf;
use crate::error::{Error, Result};
use crate::estimation::fit::FitResult;
use crate::model::ModelVariant;

/// A likelihood-ratio test of a reduced model against the full model it is
/// nested in: `chi_squared = 2 (ll_full - ll_reduced)`, degrees of freedom
/// equal to the difference in stored coefficient counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrtResult {
    pub full_spec: ModelVariant,
    pub reduced_spec: ModelVariant,
    pub chi_squared: f64,
    pub df: usize,
    pub p_value: f64,
}

pub fn lrt(full: &FitResult, reduced: &FitResult) -> Result<LrtResult> {
    let full_variant = full.spec.variant();
    let reduced_variant = reduced.spec.variant();
    if !full_variant.nests(reduced_variant) {
        return Err(Error::InvalidLrt(format!(
            "{reduced_variant} is not nested in {full_variant}"
        )));
    }
    if full.spec.n_chairs() != reduced.spec.n_chairs()
        || full.spec.n_classes() != reduced.spec.n_classes()
        || full.spec.reference_idx() != reduced.spec.reference_idx()
    {
        return Err(Error::InvalidLrt(
            "fits use different court configurations".into(),
        ));
    }
    if full.sample_units != reduced.sample_units || full.sample_total != reduced.sample_total {
        return Err(Error::InvalidLrt(format!(
            "fits were made on different samples ({} units / {} cases vs {} / {})",
            full.sample_units, full.sample_total, reduced.sample_units, reduced.sample_total
        )));
    }

    let mut chi_squared = 2.0 * (full.log_likelihood_at_max - reduced.log_likelihood_at_max);
    if chi_squared < -1e-9 {
        return Err(Error::InvalidLrt(format!(
            "full model log-likelihood {} below reduced {}; a fit failed to reach its optimum",
            full.log_likelihood_at_max, reduced.log_likelihood_at_max
        )));
    }
    chi_squared = chi_squared.max(0.0);

    let df = full.estimates.len() - reduced.estimates.len();
    let p_value = if df == 0 {
        1.0
    } else {
        chi_squared_sf(chi_squared, df)?
    };
    Ok(LrtResult {
        full_spec: full_variant,
        reduced_spec: reduced_variant,
        chi_squared,
        df,
        p_value,
    })
}

/// The hypothesis a reduced model encodes when tested against `m1`.
pub fn hypothesis_vs_m1(variant: ModelVariant) -> Option<&'static str> {
    match variant {
        ModelVariant::M1 => None,
        ModelVariant::M2 => Some("The effect of class is the same on all chambers"),
        ModelVariant::M3 => Some("The effect of class and proportion is the same on all chambers"),
        ModelVariant::M4 => Some("There is no effect of class"),
        ModelVariant::M5 => Some("There is no effect of proportion"),
        ModelVariant::M6 => {
            Some("There is no effect of class and the effect of proportion is the same on all chambers")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CourtConfig;
    use crate::linalg::SymMatrix;
    use crate::model::{ModelSpec, ParameterVector};

    /// A synthetic converged FitResult carrying the given log-likelihood.
    fn fit_with_ll(variant: ModelVariant, ll: f64, config: &CourtConfig) -> FitResult {
        let spec = ModelSpec::new(variant, config).unwrap();
        let p = spec.param_count();
        FitResult {
            estimates: ParameterVector::zeros(&spec),
            spec,
            log_likelihood_at_max: ll,
            observed_information: SymMatrix::zeros(p),
            converged: true,
            iterations: 1,
            final_gradient_norm: 0.0,
            quasi_separated: false,
            sample_units: 100,
            sample_total: 1000,
        }
    }

    fn court() -> CourtConfig {
        let labels: Vec<String> = (0..14).map(|i| format!("C{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        CourtConfig::with_proportion(11, &refs).unwrap()
    }

    #[test]
    fn reproduces_published_test_arithmetic() {
        let config = court();
        let full = fit_with_ll(ModelVariant::M1, -1_431_800.65, &config);

        let cases = [
            (ModelVariant::M2, -1_447_745.67, 31_890.05, 126),
            (ModelVariant::M3, -1_452_492.20, 41_383.10, 135),
            (ModelVariant::M4, -1_436_513.10, 9_424.91, 130),
            (ModelVariant::M5, -1_433_758.38, 3_915.46, 10),
            (ModelVariant::M6, -1_454_554.17, 45_507.05, 148),
        ];
        for (variant, ll, chi, df) in cases {
            let reduced = fit_with_ll(variant, ll, &config);
            let result = lrt(&full, &reduced).unwrap();
            assert!(
                (result.chi_squared - chi).abs() <= 0.05,
                "{variant}: {} vs {chi}",
                result.chi_squared
            );
            assert_eq!(result.df, df, "{variant}");
            assert!(result.p_value < 1e-4, "{variant}: p = {}", result.p_value);
        }
    }

    #[test]
    fn identical_fits_give_zero_statistic_and_unit_p() {
        let config = court();
        let fit = fit_with_ll(ModelVariant::M3, -5000.0, &config);
        let result = lrt(&fit, &fit.clone()).unwrap();
        assert_eq!(result.chi_squared, 0.0);
        assert_eq!(result.df, 0);
        assert_eq!(result.p_value, 1.0);
    }

    #[test]
    fn non_nested_pairs_are_rejected() {
        let config = court();
        let m4 = fit_with_ll(ModelVariant::M4, -5000.0, &config);
        let m5 = fit_with_ll(ModelVariant::M5, -5100.0, &config);
        assert!(lrt(&m4, &m5).is_err());
        assert!(lrt(&m5, &m4).is_err());
    }

    #[test]
    fn reversed_likelihood_ordering_is_an_error() {
        let config = court();
        let full = fit_with_ll(ModelVariant::M1, -6000.0, &config);
        let reduced = fit_with_ll(ModelVariant::M2, -5900.0, &config);
        assert!(matches!(lrt(&full, &reduced), Err(Error::InvalidLrt(_))));
    }

    #[test]
    fn mismatched_samples_are_rejected() {
        let config = court();
        let full = fit_with_ll(ModelVariant::M1, -6000.0, &config);
        let mut reduced = fit_with_ll(ModelVariant::M2, -6100.0, &config);
        reduced.sample_units = 99;
        assert!(lrt(&full, &reduced).is_err());
    }

    #[test]
    fn hypothesis_strings_exist_for_the_reduced_models() {
        assert!(hypothesis_vs_m1(ModelVariant::M1).is_none());
        for v in [
            ModelVariant::M2,
            ModelVariant::M3,
            ModelVariant::M4,
            ModelVariant::M5,
            ModelVariant::M6,
        ] {
            assert!(hypothesis_vs_m1(v).is_some());
        }
    }
}
