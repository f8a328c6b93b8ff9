//! `sortition-audit lrt`

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use sortition_audit::estimation::{fit_mle, hypothesis_vs_m1, lrt, FitOptions, FitResult};
use sortition_audit::model::{ModelSpec, ModelVariant};

use crate::commands::io::load_sample;
use crate::manifest::{manifest_path_for, write_manifest, RunManifest};
use crate::opts::{parse_variant, ConfigOpts};
use crate::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct LrtArgs {
    /// Assignment-event CSV.
    #[arg(long)]
    pub events: PathBuf,

    #[arg(long)]
    pub calendar: Option<PathBuf>,

    #[arg(long)]
    pub seeds: Option<PathBuf>,

    /// The full model every hypothesis is tested against.
    #[arg(long, default_value = "m1")]
    pub full: String,

    /// Reduced models to test; defaults to every model nested in the full
    /// one.
    #[arg(long, value_delimiter = ',')]
    pub reduced: Vec<String>,

    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write the test results as a JSON array.
    #[arg(long)]
    pub out_json: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigOpts,
}

pub(crate) struct Row {
    model: ModelVariant,
    ll: Option<f64>,
    df: Option<usize>,
    chi_squared: Option<f64>,
    p_value: Option<f64>,
    hypothesis: &'static str,
    status: String,
}

impl Row {
    #[cfg(test)]
    pub(crate) fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

pub fn run(args: LrtArgs) -> CliResult<()> {
    let full_variant = parse_variant(&args.full)?;
    let reduced: Vec<ModelVariant> = if args.reduced.is_empty() {
        ModelVariant::ALL
            .into_iter()
            .filter(|v| *v != full_variant && full_variant.nests(*v))
            .collect()
    } else {
        args.reduced
            .iter()
            .map(|s| parse_variant(s))
            .collect::<CliResult<Vec<_>>>()?
    };
    if reduced.is_empty() {
        return Err(CliError::Usage(format!(
            "no models are nested in {full_variant}"
        )));
    }
    for v in &reduced {
        if !full_variant.nests(*v) {
            return Err(CliError::Usage(format!(
                "{v} is not nested in {full_variant}"
            )));
        }
    }

    let config = args.config.to_config()?;
    let loaded = load_sample(&args.events, args.calendar.as_ref(), args.seeds.as_ref(), &config)?;

    // fit the full model first; reduced fits run on worker threads
    let full_spec = ModelSpec::new(full_variant, &config)?;
    let full_fit = fit_mle(&loaded.sample, &full_spec, &FitOptions::default())?;
    if !full_fit.converged {
        return Err(CliError::Runtime(format!(
            "full model {full_variant} did not converge"
        )));
    }

    let reduced_fits = fit_all(&loaded.sample, &reduced, &config);
    if let Some(json_path) = &args.out_json {
        let results: Vec<_> = reduced_fits
            .iter()
            .filter_map(|outcome| outcome.as_ref().ok())
            .filter_map(|fit| lrt(&full_fit, fit).ok())
            .collect();
        let json = serde_json::to_string_pretty(&results)
            .map_err(|e| CliError::Runtime(format!("cannot serialize results: {e}")))?;
        std::fs::write(json_path, json + "\n").map_err(|e| {
            CliError::Runtime(format!("cannot write {}: {e}", json_path.display()))
        })?;
    }
    let rows = build_rows(full_variant, &full_fit, &reduced, reduced_fits);

    let manifest_path = manifest_path_for(&args.out);
    write_csv(&args.out, &rows, &manifest_path)?;
    let manifest = RunManifest::new("lrt", &config)
        .input(&args.events)
        .maybe_input(args.calendar.as_ref())
        .maybe_input(args.seeds.as_ref())
        .output(&args.out)
        .options(json!({
            "full": full_variant.to_string(),
            "reduced": reduced.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        }));
    write_manifest(&manifest_path, &manifest)?;

    print_table(&rows);
    Ok(())
}

/// One row per model, full model first. A reduced fit or test that fails
/// produces a `failed: ...` row; the others are still emitted.
pub(crate) fn build_rows(
    full_variant: ModelVariant,
    full_fit: &FitResult,
    reduced: &[ModelVariant],
    outcomes: Vec<Result<FitResult, sortition_audit::Error>>,
) -> Vec<Row> {
    let mut rows = vec![Row {
        model: full_variant,
        ll: Some(full_fit.log_likelihood_at_max),
        df: None,
        chi_squared: None,
        p_value: None,
        hypothesis: "",
        status: "ok".into(),
    }];
    for (variant, outcome) in reduced.iter().zip(outcomes) {
        let hypothesis = if full_variant == ModelVariant::M1 {
            hypothesis_vs_m1(*variant).unwrap_or("")
        } else {
            ""
        };
        let row = match outcome {
            Ok(fit) => match lrt(full_fit, &fit) {
                Ok(test) => Row {
                    model: *variant,
                    ll: Some(fit.log_likelihood_at_max),
                    df: Some(test.df),
                    chi_squared: Some(test.chi_squared),
                    p_value: Some(test.p_value),
                    hypothesis,
                    status: "ok".into(),
                },
                Err(e) => Row {
                    model: *variant,
                    ll: Some(fit.log_likelihood_at_max),
                    df: None,
                    chi_squared: None,
                    p_value: None,
                    hypothesis,
                    status: format!("failed: {e}"),
                },
            },
            Err(e) => Row {
                model: *variant,
                ll: None,
                df: None,
                chi_squared: None,
                p_value: None,
                hypothesis,
                status: format!("failed: {e}"),
            },
        };
        rows.push(row);
    }
    rows
}

/// Fit the reduced models concurrently; thread count follows
/// `SORTITION_AUDIT_THREADS` (default: machine parallelism).
fn fit_all(
    sample: &[sortition_audit::SampleUnit],
    variants: &[ModelVariant],
    config: &sortition_audit::CourtConfig,
) -> Vec<Result<FitResult, sortition_audit::Error>> {
    let threads = sortition_audit::simulate::default_threads().min(variants.len().max(1));
    let mut slots: Vec<Option<Result<FitResult, sortition_audit::Error>>> =
        (0..variants.len()).map(|_| None).collect();
    let chunk = variants.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (chunk_idx, chunk_slots) in slots.chunks_mut(chunk).enumerate() {
            let base = chunk_idx * chunk;
            scope.spawn(move || {
                for (offset, slot) in chunk_slots.iter_mut().enumerate() {
                    let variant = variants[base + offset];
                    let result = ModelSpec::new(variant, config).and_then(|spec| {
                        let fit = fit_mle(sample, &spec, &FitOptions::default())?;
                        if fit.converged {
                            Ok(fit)
                        } else {
                            Err(sortition_audit::Error::NotConverged(format!(
                                "{variant} did not converge"
                            )))
                        }
                    });
                    *slot = Some(result);
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}

fn format_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(path: &PathBuf, rows: &[Row], manifest: &std::path::Path) -> CliResult<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# manifest: {}", manifest.display());
    let _ = writeln!(out, "model,log_likelihood,df,chi_squared,p_value,hypothesis,status");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.model,
            format_opt(&row.ll),
            format_opt(&row.df),
            format_opt(&row.chi_squared),
            format_opt(&row.p_value),
            row.hypothesis,
            row.status
        );
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn print_table(rows: &[Row]) {
    println!(
        "{:<6} {:>16} {:>5} {:>14} {:>10}  hypothesis",
        "model", "ll", "df", "chi-squared", "p-value"
    );
    for row in rows {
        let p = match row.p_value {
            Some(p) if p < 1e-4 => "< 0.0001".to_string(),
            Some(p) => format!("{p:.4}"),
            None => "-".to_string(),
        };
        println!(
            "{:<6} {:>16} {:>5} {:>14} {:>10}  {}",
            row.model.to_string(),
            row.ll.map_or_else(|| "-".into(), |v| format!("{v:.2}")),
            row.df.map(|v| v.to_string()).unwrap_or("-".into()),
            row.chi_squared
                .map(|v| format!("{v:.2}"))
                .unwrap_or("-".into()),
            p,
            if row.status == "ok" {
                row.hypothesis.to_string()
            } else {
                row.status.clone()
            }
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sortition_audit::linalg::SymMatrix;
    use sortition_audit::model::ParameterVector;
    use sortition_audit::CourtConfig;

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
            sample_units: 10,
            sample_total: 100,
        }
    }

    /// A failed reduced fit yields a `failed` row while the other rows are
    /// still produced with their statistics.
    #[test]
    fn failed_reduced_fits_keep_their_row() {
        let config = CourtConfig::with_proportion(11, &["A", "B"]).unwrap();
        let full = fit_with_ll(ModelVariant::M1, -1000.0, &config);
        let reduced = [ModelVariant::M4, ModelVariant::M5];
        let outcomes = vec![
            Err(sortition_audit::Error::NotConverged("m4 blew up".into())),
            Ok(fit_with_ll(ModelVariant::M5, -1010.0, &config)),
        ];
        let rows = build_rows(ModelVariant::M1, &full, &reduced, outcomes);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].is_ok());
        assert!(!rows[1].is_ok());
        assert!(rows[1].status.contains("m4 blew up"));
        assert_eq!(rows[1].ll, None);
        assert!(rows[2].is_ok());
        assert_eq!(rows[2].df, Some(30 - 20)); // m1 stores 30 cells here, m5 stores 20
        assert!((rows[2].chi_squared.unwrap() - 20.0).abs() < 1e-9);

        // identical full and reduced: chi-squared 0, p-value 1
        let rows = build_rows(
            ModelVariant::M1,
            &full,
            &[ModelVariant::M1],
            vec![Ok(fit_with_ll(ModelVariant::M1, -1000.0, &config))],
        );
        assert_eq!(rows[1].chi_squared, Some(0.0));
        assert_eq!(rows[1].p_value, Some(1.0));
    }
}
