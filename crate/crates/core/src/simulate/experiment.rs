//! Replicated validation experiments: parameter recovery and test size.

use serde::{Deserialize, Serialize};

use crate::config::CourtConfig;
use crate::dist::normal_quantile;
use crate::error::{Error, Result};
use crate::estimation::{fit_mle, lrt, FitOptions, FitResult};
use crate::model::{ModelSpec, ModelVariant};
use crate::simulate::generator::{
    simulate_assignments, AssignmentRule, CovariateProcess, GeneratorSpec,
};

/// Environment variable read by [`default_threads`].
pub const THREADS_ENV_VAR: &str = "SORTITION_AUDIT_THREADS";

/// Worker-thread count for replicated experiments: the `SORTITION_AUDIT_THREADS`
/// environment variable when set, otherwise the machine's parallelism.
pub fn default_threads() -> usize {
    if let Ok(v) = std::env::var(THREADS_ENV_VAR) {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Per-replication seed: SplitMix64 of the base seed advanced by the
/// replication index times the 64-bit golden ratio. Results are therefore
/// independent of how replications are scheduled across threads.
pub fn replicate_seed(base: u64, replication: u64) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = base.wrapping_add(replication.wrapping_mul(GOLDEN)).wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run `f` for indices `0..n` on up to `threads` worker threads, returning
/// results in index order.
fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        let f = &f;
        let mut handles = Vec::new();
        for chunk_slots in slots.chunks_mut(chunk) {
            let base = handles.len() * chunk;
            handles.push(scope.spawn(move || {
                for (offset, slot) in chunk_slots.iter_mut().enumerate() {
                    *slot = Some(f(base + offset));
                }
            }));
        }
        for h in handles {
            h.join().expect("experiment worker panicked");
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}

/// Options for [`recovery_experiment`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// Sample sizes (units per fit) to sweep.
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    /// Arrivals per (day, class).
    pub intensity: u64,
    /// Confidence level for the per-parameter coverage check.
    pub coverage_level: f64,
    pub threads: usize,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            sizes: vec![500, 2000, 8000],
            replications: 50,
            base_seed: 1,
            intensity: 20,
            coverage_level: 0.95,
            threads: default_threads(),
        }
    }
}

/// Recovery diagnostics for one sample size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizeRecovery {
    pub size: usize,
    pub replications: usize,
    /// Replications whose fit errored or did not converge.
    pub failures: usize,
    /// Mean signed error per coefficient, over successful replications.
    pub bias: Vec<f64>,
    /// Root-mean-square error per coefficient.
    pub rmse: Vec<f64>,
    /// Wald-interval coverage of the truth per coefficient.
    pub coverage: Vec<f64>,
    /// Per-replication worst absolute coefficient error.
    pub max_abs_errors: Vec<f64>,
}

/// Report of a [`recovery_experiment`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub variant: ModelVariant,
    pub truth: Vec<f64>,
    pub coverage_level: f64,
    pub sizes: Vec<SizeRecovery>,
}

/// Simulate data from a known model, refit it, and report bias, RMSE, and
/// interval coverage per coefficient across sample sizes. Fit failures are
/// recorded per replication rather than aborting the experiment.
///
/// Streams are drawn with exogenous simplex covariates: running proportions
/// converge across chairs as history accumulates, so a stream using them
/// carries vanishing information about proportion slopes and no sample size
/// would recover them. Fits use the generator's own units, i.e. exactly the
/// covariates the truth saw.
pub fn recovery_experiment(
    config: &CourtConfig,
    variant: ModelVariant,
    true_params: &[f64],
    options: &RecoveryOptions,
) -> Result<RecoveryReport> {
    if options.replications == 0 {
        return Err(Error::Generator("replications must be at least 1".into()));
    }
    if options.sizes.is_empty() || options.sizes.contains(&0) {
        return Err(Error::Generator("sizes must be positive".into()));
    }
    let spec = ModelSpec::new(variant, config)?;
    if true_params.len() != spec.param_count() {
        return Err(Error::Generator(format!(
            "model {variant} requires {} coefficients, got {}",
            spec.param_count(),
            true_params.len()
        )));
    }
    let z = normal_quantile(1.0 - (1.0 - options.coverage_level) / 2.0)?;
    let classes = config.n_classes();
    let p_count = spec.param_count();

    let mut sizes_out = Vec::with_capacity(options.sizes.len());
    for (size_idx, &size) in options.sizes.iter().enumerate() {
        let n_days = size.div_ceil(classes);
        let results = parallel_map(options.replications, options.threads, |rep| {
            let seed = replicate_seed(
                options.base_seed,
                (size_idx * options.replications + rep) as u64,
            );
            let mut gen = GeneratorSpec::new(
                AssignmentRule::TrueModel {
                    variant,
                    params: true_params.to_vec(),
                },
                n_days,
                options.intensity,
                seed,
            )
            .with_covariates(CovariateProcess::ExogenousUniform);
            gen.intensities = vec![options.intensity; classes];
            run_one_recovery(config, &spec, &gen)
        });

        let mut bias = vec![0.0; p_count];
        let mut mse = vec![0.0; p_count];
        let mut covered = vec![0usize; p_count];
        let mut max_abs_errors = Vec::new();
        let mut failures = 0usize;
        for result in results {
            match result {
                Ok((fit, se)) => {
                    let mut worst = 0.0_f64;
                    for i in 0..p_count {
                        let err = fit.estimates.get(i) - true_params[i];
                        bias[i] += err;
                        mse[i] += err * err;
                        worst = worst.max(err.abs());
                        if (err).abs() <= z * se[i] {
                            covered[i] += 1;
                        }
                    }
                    max_abs_errors.push(worst);
                }
                Err(_) => failures += 1,
            }
        }
        let successes = (options.replications - failures).max(1) as f64;
        sizes_out.push(SizeRecovery {
            size,
            replications: options.replications,
            failures,
            bias: bias.iter().map(|b| b / successes).collect(),
            rmse: mse.iter().map(|m| (m / successes).sqrt()).collect(),
            coverage: covered.iter().map(|c| *c as f64 / successes).collect(),
            max_abs_errors,
        });
    }
    Ok(RecoveryReport {
        variant,
        truth: true_params.to_vec(),
        coverage_level: options.coverage_level,
        sizes: sizes_out,
    })
}

/// One replication: simulate, fit, and return the fit plus the Wald
/// standard error of each coefficient.
fn run_one_recovery(
    config: &CourtConfig,
    spec: &ModelSpec,
    gen: &GeneratorSpec,
) -> Result<(FitResult, Vec<f64>)> {
    let out = simulate_assignments(gen, config)?;
    let fit = fit_mle(&out.sample, spec, &FitOptions::default())?;
    if !fit.converged {
        return Err(Error::NotConverged("replication fit did not converge".into()));
    }
    let inverse = fit
        .observed_information
        .cholesky()
        .ok_or_else(|| Error::SingularInformation("replication information singular".into()))?
        .inverse();
    let se: Vec<f64> = (0..spec.param_count())
        .map(|i| inverse.get(i, i).max(0.0).sqrt())
        .collect();
    Ok((fit, se))
}

/// Options for [`lrt_calibration`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub replications: usize,
    pub alpha: f64,
    pub threads: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            replications: 200,
            alpha: 0.05,
            threads: default_threads(),
        }
    }
}

/// Outcome of [`lrt_calibration`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub null_spec: ModelVariant,
    pub alt_spec: ModelVariant,
    pub alpha: f64,
    pub replications: usize,
    pub failures: usize,
    pub rejections: usize,
    /// Rejections over successful replications.
    pub rejection_rate: f64,
}

/// Empirical rejection rate of the likelihood-ratio test of `null_variant`
/// against `alt_variant` on streams drawn from `gen` (per-replication seeds
/// derived from `gen.seed`). Run it with a generator satisfying the null to
/// estimate size, or one violating it to estimate power.
pub fn lrt_calibration(
    config: &CourtConfig,
    null_variant: ModelVariant,
    alt_variant: ModelVariant,
    gen: &GeneratorSpec,
    options: &CalibrationOptions,
) -> Result<CalibrationReport> {
    if options.replications == 0 {
        return Err(Error::Generator("replications must be at least 1".into()));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::Generator(format!(
            "alpha must lie in (0,1), got {}",
            options.alpha
        )));
    }
    if !alt_variant.nests(null_variant) {
        return Err(Error::InvalidLrt(format!(
            "{null_variant} is not nested in {alt_variant}"
        )));
    }
    let null_spec = ModelSpec::new(null_variant, config)?;
    let alt_spec = ModelSpec::new(alt_variant, config)?;

    let results = parallel_map(options.replications, options.threads, |rep| {
        let gen = gen.clone().with_seed(replicate_seed(gen.seed, rep as u64));
        run_one_lrt(config, &null_spec, &alt_spec, &gen, options.alpha)
    });

    let mut failures = 0;
    let mut rejections = 0;
    for r in results {
        match r {
            Ok(true) => rejections += 1,
            Ok(false) => {}
            Err(_) => failures += 1,
        }
    }
    let successes = (options.replications - failures).max(1) as f64;
    Ok(CalibrationReport {
        null_spec: null_variant,
        alt_spec: alt_variant,
        alpha: options.alpha,
        replications: options.replications,
        failures,
        rejections,
        rejection_rate: rejections as f64 / successes,
    })
}

fn run_one_lrt(
    config: &CourtConfig,
    null_spec: &ModelSpec,
    alt_spec: &ModelSpec,
    gen: &GeneratorSpec,
    alpha: f64,
) -> Result<bool> {
    let out = simulate_assignments(gen, config)?;
    let options = FitOptions::default();
    let null_fit = fit_mle(&out.sample, null_spec, &options)?;
    let alt_fit = fit_mle(&out.sample, alt_spec, &options)?;
    if !null_fit.converged || !alt_fit.converged {
        return Err(Error::NotConverged("replication fit did not converge".into()));
    }
    let test = lrt(&alt_fit, &null_fit)?;
    Ok(test.p_value < alpha)
}
