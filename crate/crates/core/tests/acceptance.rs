//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them on success).
//!
//! Criterion 8 is expected to fail for the proportion-bearing models:
//! pinning the reference chair's coefficients (including its proportion
//! slope) to zero is a real restriction when the covariate varies across
//! chairs, so
//! the fitted family (and its maximized likelihood) depends on which chair
//! is the reference. The class-only model `m5` is exactly invariant. See
//! README, "Choice of reference chair".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sortition_audit::config::CourtConfig;
use sortition_audit::dist::chi_squared_sf;
use sortition_audit::estimation::{
    fit_mle, lrt, probability_ci, FitOptions, FitResult, Scenario,
};
use sortition_audit::ingest::build_sample;
use sortition_audit::linalg::SymMatrix;
use sortition_audit::model::{
    assignment_probabilities, log_likelihood, param_count, probabilities_for, score, ModelSpec,
    ModelVariant, ParameterVector, SampleUnit,
};
use sortition_audit::numeric::relative_diff;
use sortition_audit::simulate::{
    brute_force_loglik, lrt_calibration, recovery_experiment, simulate_assignments,
    AssignmentRule, AvailabilityScenario, CalibrationOptions, CovariateProcess, GeneratorSpec,
    RecoveryOptions,
};
use sortition_audit::Date;

fn court(n_chairs: usize, n_classes: usize) -> CourtConfig {
    let labels: Vec<String> = (0..n_classes).map(|i| format!("C{i}")).collect();
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    CourtConfig::with_proportion(n_chairs, &refs).unwrap()
}

fn eleven_chair_court() -> CourtConfig {
    court(11, 14)
}

/// Random sample unit: random availability (at least one chair), random
/// counts on available chairs (total >= 1), proportions normalized over all
/// chairs.
fn random_unit(rng: &mut ChaCha8Rng, config: &CourtConfig, day_offset: usize) -> SampleUnit {
    let n = config.n_chairs;
    let c = config.n_classes();
    loop {
        let availability: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
        if !availability.iter().any(|&a| a) {
            continue;
        }
        let counts: Vec<u64> = availability
            .iter()
            .map(|&a| if a { rng.gen_range(0..12) } else { 0 })
            .collect();
        if counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let covariates: Vec<Vec<f64>> = raw.iter().map(|x| vec![x / total]).collect();
        let day = "2020-01-01".parse::<Date>().unwrap().plus_days(day_offset);
        return SampleUnit::new(
            config,
            day,
            rng.gen_range(0..c),
            counts,
            availability,
            covariates,
        )
        .unwrap();
    }
}

fn random_params(rng: &mut ChaCha8Rng, spec: &ModelSpec, scale: f64) -> ParameterVector {
    let values: Vec<f64> = (0..spec.param_count())
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    ParameterVector::from_values(spec, values).unwrap()
}

#[test]
fn criterion_01_parameter_counts() {
    let config = eleven_chair_court();
    let expected = [
        (ModelVariant::M1, 150),
        (ModelVariant::M2, 24),
        (ModelVariant::M3, 15),
        (ModelVariant::M4, 20),
        (ModelVariant::M5, 140),
        (ModelVariant::M6, 2),
    ];
    for (variant, want) in expected {
        let got = param_count(variant, &config).unwrap();
        assert_eq!(got, want, "{variant}: {got} vs {want}");
    }
    println!("criterion 1 PASS: parameter counts (150, 24, 15, 20, 140, 2)");
}

#[test]
fn criterion_02_lrt_arithmetic() {
    let config = eleven_chair_court();
    let synthetic = |variant: ModelVariant, ll: f64| -> FitResult {
        let spec = ModelSpec::new(variant, &config).unwrap();
        let p = spec.param_count();
        FitResult {
            estimates: ParameterVector::zeros(&spec),
            spec,
            log_likelihood_at_max: ll,
            observed_information: SymMatrix::zeros(p),
            converged: true,
            iterations: 0,
            final_gradient_norm: 0.0,
            quasi_separated: false,
            sample_units: 1,
            sample_total: 1,
        }
    };
    let full = synthetic(ModelVariant::M1, -1_431_800.65);
    let rows = [
        (ModelVariant::M2, -1_447_745.67, 31_890.05, 126),
        (ModelVariant::M3, -1_452_492.20, 41_383.10, 135),
        (ModelVariant::M4, -1_436_513.10, 9_424.91, 130),
        (ModelVariant::M5, -1_433_758.38, 3_915.46, 10),
        (ModelVariant::M6, -1_454_554.17, 45_507.05, 148),
    ];
    for (variant, ll, want_chi, want_df) in rows {
        let result = lrt(&full, &synthetic(variant, ll)).unwrap();
        assert!(
            (result.chi_squared - want_chi).abs() <= 0.05,
            "{variant}: chi {} vs {want_chi}",
            result.chi_squared
        );
        assert_eq!(result.df, want_df, "{variant}");
        assert!(result.p_value < 1e-4, "{variant}: p = {}", result.p_value);
        // the survival function itself must agree
        assert!(chi_squared_sf(result.chi_squared, result.df).unwrap() < 1e-4);
    }
    println!("criterion 2 PASS: published chi-squared, df, and p-values reproduced");
}

#[test]
fn criterion_03_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut worst = 0.0_f64;
    for instance in 0..60 {
        let n = rng.gen_range(2..=5);
        let c = rng.gen_range(1..=3);
        let config = court(n, c);
        let variant = ModelVariant::ALL[instance % 6];
        let spec = ModelSpec::new(variant, &config).unwrap();
        let params = random_params(&mut rng, &spec, 2.0);
        let units: Vec<SampleUnit> = (0..rng.gen_range(1..=10))
            .map(|d| random_unit(&mut rng, &config, d))
            .collect();
        let fast = log_likelihood(&params, &units, &spec).unwrap();
        let slow = brute_force_loglik(&params, &units, &spec).unwrap();
        let diff = relative_diff(fast, slow);
        worst = worst.max(diff);
        assert!(
            diff < 1e-9,
            "instance {instance} ({variant}, n={n}, c={c}): {fast} vs {slow}"
        );
    }
    println!("criterion 3 PASS: 60 random instances, worst relative difference {worst:.3e}");
}

#[test]
fn criterion_04_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let step = 1e-5;
    let mut checked = 0;
    let mut worst = 0.0_f64;
    for round in 0..4 {
        for variant in ModelVariant::ALL {
            let n = rng.gen_range(3..=8);
            let c = rng.gen_range(1..=4);
            let config = court(n, c);
            let spec = ModelSpec::new(variant, &config).unwrap();
            let params = random_params(&mut rng, &spec, 1.5);
            let units: Vec<SampleUnit> = (0..rng.gen_range(5..=25))
                .map(|d| random_unit(&mut rng, &config, d))
                .collect();
            let analytic = score(&params, &units, &spec).unwrap();
            for (i, a) in analytic.iter().enumerate() {
                let v = params.values()[i];
                let plus = set(params.clone(), &spec, i, v + step);
                let minus = set(params.clone(), &spec, i, v - step);
                let fd = (log_likelihood(&plus, &units, &spec).unwrap()
                    - log_likelihood(&minus, &units, &spec).unwrap())
                    / (2.0 * step);
                let denom = a.abs().max(fd.abs()).max(1.0);
                let rel = (a - fd).abs() / denom;
                worst = worst.max(rel);
                assert!(
                    rel < 1e-6,
                    "round {round} {variant} cell {i}: analytic {a} vs fd {fd}"
                );
            }
            checked += 1;
        }
    }
    assert!(checked >= 20);
    println!("criterion 4 PASS: {checked} instances, worst relative error {worst:.3e}");
}

fn set(params: ParameterVector, spec: &ModelSpec, i: usize, v: f64) -> ParameterVector {
    let mut values = params.values().to_vec();
    values[i] = v;
    ParameterVector::from_values(spec, values).unwrap()
}

#[test]
fn criterion_05_estimator_recovery() {
    // single-class court so a unit count is a day count
    let config = court(11, 1);
    let truth = [0.0, -5.0];
    let options = RecoveryOptions {
        sizes: vec![500, 2000, 5000, 8000],
        replications: 50,
        base_seed: 50,
        intensity: 20,
        coverage_level: 0.95,
        threads: sortition_audit::simulate::default_threads(),
    };
    let report = recovery_experiment(&config, ModelVariant::M6, &truth, &options).unwrap();

    let at_5000 = report.sizes.iter().find(|s| s.size == 5000).unwrap();
    assert_eq!(at_5000.failures, 0, "fit failures at size 5000");
    let within = at_5000
        .max_abs_errors
        .iter()
        .filter(|e| **e <= 0.15)
        .count();
    assert!(
        within >= 45,
        "only {within}/50 replications within +-0.15 of the truth"
    );

    // RMSE strictly decreasing over 500 -> 2000 -> 8000, per coefficient
    let ladder: Vec<&sortition_audit::simulate::SizeRecovery> = [500, 2000, 8000]
        .iter()
        .map(|s| report.sizes.iter().find(|r| r.size == *s).unwrap())
        .collect();
    for i in 0..truth.len() {
        assert!(
            ladder[0].rmse[i] > ladder[1].rmse[i] && ladder[1].rmse[i] > ladder[2].rmse[i],
            "coefficient {i}: rmse {:?} not strictly decreasing",
            ladder.iter().map(|l| l.rmse[i]).collect::<Vec<_>>()
        );
    }
    println!(
        "criterion 5 PASS: {within}/50 within tolerance at 5000 units; rmse ladder {:?} / {:?}",
        ladder.iter().map(|l| l.rmse[0]).collect::<Vec<_>>(),
        ladder.iter().map(|l| l.rmse[1]).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_06_missing_data_contract() {
    let config = court(11, 1);

    // (a) rotating unavailable chair: zero probability on the missing chair,
    // unit mass over the rest
    let gen = GeneratorSpec::new(AssignmentRule::UniformAvailable, 330, 15, 60)
        .with_availability(AvailabilityScenario::RotatingUnavailable { period_days: 30 });
    let out = simulate_assignments(&gen, &config).unwrap();
    let sample = build_sample(&out.events, &out.calendar, None, &config).unwrap();
    let spec = ModelSpec::new(ModelVariant::M6, &config).unwrap();
    let fit = fit_mle(&sample, &spec, &FitOptions::default()).unwrap();
    assert!(fit.converged);
    let mut saw_unavailable = false;
    for unit in sample.iter().step_by(17) {
        let probs = assignment_probabilities(&fit.estimates, unit, &spec).unwrap();
        let mut available_mass = 0.0;
        for (j, p) in probs.iter().enumerate() {
            if unit.availability[j] {
                available_mass += p;
            } else {
                saw_unavailable = true;
                assert_eq!(*p, 0.0, "unavailable chair got positive probability");
            }
        }
        assert!(
            (available_mass - 1.0).abs() <= 1e-12,
            "mass {available_mass}"
        );
    }
    assert!(saw_unavailable, "rotation never produced a missing chair");

    // (b) coverage: 200 uniform replications, all 99% Bonferroni intervals
    // must contain 1/11 in at least 98% of them
    let replications = 200;
    let mut all_covered = 0;
    let mut failures = 0;
    for rep in 0..replications {
        let seed = sortition_audit::simulate::replicate_seed(61, rep);
        let gen = GeneratorSpec::new(AssignmentRule::UniformAvailable, 300, 15, seed)
            .with_covariates(CovariateProcess::ExogenousUniform);
        let out = simulate_assignments(&gen, &config).unwrap();
        let fit = match fit_mle(&out.sample, &spec, &FitOptions::default()) {
            Ok(f) if f.converged => f,
            _ => {
                failures += 1;
                continue;
            }
        };
        let scenario = Scenario::equal_proportions(0, 11);
        let table = probability_ci(&fit, &scenario, 0.99, None).unwrap();
        assert_eq!(table.family_size, 11);
        let covered = table
            .rows
            .iter()
            .all(|r| r.lower <= 1.0 / 11.0 && 1.0 / 11.0 <= r.upper);
        if covered {
            all_covered += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} replications failed to fit");
    assert!(
        all_covered as f64 >= 0.98 * replications as f64,
        "only {all_covered}/{replications} replications covered 1/11 in every interval"
    );
    println!(
        "criterion 6 PASS: zero-mass on unavailable chairs; {all_covered}/{replications} joint coverage"
    );
}

#[test]
fn criterion_07_lrt_calibration() {
    let config = court(11, 1);

    // size under the null: uniform process, m6 within m4
    let gen = GeneratorSpec::new(AssignmentRule::UniformAvailable, 300, 15, 70)
        .with_covariates(CovariateProcess::ExogenousUniform);
    let options = CalibrationOptions {
        replications: 200,
        alpha: 0.05,
        threads: sortition_audit::simulate::default_threads(),
    };
    let size = lrt_calibration(&config, ModelVariant::M6, ModelVariant::M4, &gen, &options).unwrap();
    assert!(size.failures <= 2, "{} replications failed", size.failures);
    assert!(
        (0.01..=0.10).contains(&size.rejection_rate),
        "size {} outside [0.01, 0.10]",
        size.rejection_rate
    );

    // power under a strong bias on a non-reference chair
    let mut weights = vec![1.0; 11];
    weights[4] = 2.5;
    let gen_alt = GeneratorSpec::new(AssignmentRule::FixedBias { weights }, 300, 15, 71)
        .with_covariates(CovariateProcess::ExogenousUniform);
    let power =
        lrt_calibration(&config, ModelVariant::M6, ModelVariant::M4, &gen_alt, &options).unwrap();
    assert!(power.failures <= 2);
    assert!(
        power.rejection_rate >= 0.95,
        "power {} below 0.95",
        power.rejection_rate
    );
    println!(
        "criterion 7 PASS: size {:.3}, power {:.3}",
        size.rejection_rate, power.rejection_rate
    );
}

/// Expected to FAIL for m1..m4 and m6 (see module docs): with the reference
/// chair's proportion slope pinned to zero, the model family itself depends
/// on the reference, and measured log-likelihood gaps are orders of
/// magnitude above the 1e-6 bound. m5 (class indicators only) satisfies the
/// criterion exactly.
#[test]
fn criterion_08_reference_invariance() {
    let config = court(11, 3);
    let mut gen = GeneratorSpec::new(
        AssignmentRule::TrueModel {
            variant: ModelVariant::M6,
            params: vec![0.0, -5.0],
        },
        400,
        15,
        80,
    );
    gen.intensities = vec![15, 10, 5];
    let out = simulate_assignments(&gen, &config).unwrap();
    let sample = build_sample(&out.events, &out.calendar, None, &config).unwrap();

    let scenario = Scenario::equal_proportions(0, 11);
    let mut report = Vec::new();
    let mut violations = Vec::new();
    for variant in ModelVariant::ALL {
        let spec_ref1 = ModelSpec::new(variant, &config).unwrap();
        let spec_ref2 = spec_ref1.with_reference(&config, 2).unwrap();
        let fit1 = fit_mle(&sample, &spec_ref1, &FitOptions::default()).unwrap();
        let fit2 = fit_mle(&sample, &spec_ref2, &FitOptions::default()).unwrap();
        assert!(fit1.converged && fit2.converged, "{variant} did not converge");

        let dll = (fit1.log_likelihood_at_max - fit2.log_likelihood_at_max).abs();
        let p1 = probabilities_for(&fit1.estimates, &scenario.circumstances(), &spec_ref1).unwrap();
        let p2 = probabilities_for(&fit2.estimates, &scenario.circumstances(), &spec_ref2).unwrap();
        let dp = p1
            .iter()
            .zip(&p2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        report.push(format!("{variant}: |d ll| = {dll:.3e}, max |d p| = {dp:.3e}"));
        if dll >= 1e-6 || dp >= 1e-8 {
            violations.push(variant.to_string());
        }
    }
    assert!(
        violations.is_empty(),
        "reference invariance violated for {violations:?}: pinning the reference chair's \
         proportion slope restricts the model family, so the fit depends on the reference \
         choice (see README, \"Choice of reference chair\").\n{}",
        report.join("\n")
    );
    println!("criterion 8 PASS: {}", report.join("; "));
}

#[test]
fn criterion_09_nesting_monotonicity() {
    let config = court(11, 3);
    for (seed, rule) in [
        (90, AssignmentRule::UniformAvailable),
        (91, AssignmentRule::ProportionPenalized { gamma: 3.0 }),
    ] {
        let mut gen = GeneratorSpec::new(rule, 250, 12, seed);
        gen.intensities = vec![12, 8, 5];
        let out = simulate_assignments(&gen, &config).unwrap();
        let sample = build_sample(&out.events, &out.calendar, None, &config).unwrap();
        let mut lls = Vec::new();
        for variant in ModelVariant::ALL {
            let spec = ModelSpec::new(variant, &config).unwrap();
            let fit = fit_mle(&sample, &spec, &FitOptions::default()).unwrap();
            assert!(fit.converged, "{variant} (seed {seed})");
            lls.push((variant, fit.log_likelihood_at_max));
        }
        let full = lls[0].1;
        for (variant, ll) in &lls[1..] {
            assert!(
                full >= ll - 1e-9,
                "seed {seed}: ll(m1) = {full} below ll({variant}) = {ll}"
            );
        }
    }
    println!("criterion 9 PASS: ll(m1) dominates every reduced model on both generators");
}
