//! `sortition-audit simulate`

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use sortition_audit::ingest::write_events_csv;
use sortition_audit::simulate::{
    simulate_assignments, AssignmentRule, AvailabilityScenario, CovariateProcess, GeneratorSpec,
};
use sortition_audit::Date;

use crate::manifest::{manifest_name_for, manifest_path_for, write_manifest, RunManifest};
use crate::opts::{parse_f64_list, parse_variant, ConfigOpts};
use crate::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Assignment rule: uniform, proportion-penalized, fixed-bias, true-model.
    #[arg(long)]
    pub rule: String,

    /// Penalty strength for --rule proportion-penalized.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Per-chair weights for --rule fixed-bias, comma separated.
    #[arg(long)]
    pub weights: Option<String>,

    /// Model for --rule true-model (m1..m6).
    #[arg(long)]
    pub true_spec: Option<String>,

    /// Coefficients for --rule true-model, comma separated.
    #[arg(long)]
    pub true_params: Option<String>,

    #[arg(long)]
    pub days: usize,

    /// First simulated date.
    #[arg(long, default_value = "2020-01-01")]
    pub start_date: String,

    /// Arrivals per (day, class): one value for all classes or one per class.
    #[arg(long, value_delimiter = ',', default_values_t = vec![20])]
    pub intensity: Vec<u64>,

    /// Draw arrivals as Poisson instead of fixed counts.
    #[arg(long)]
    pub poisson: bool,

    /// Availability: `all` or `rotating:<period-days>`.
    #[arg(long, default_value = "all")]
    pub availability: String,

    /// Draw proportion covariates fresh from the simplex per unit instead of
    /// accumulating running history.
    #[arg(long)]
    pub exogenous_proportions: bool,

    #[arg(long)]
    pub seed: u64,

    /// Output events CSV.
    #[arg(long)]
    pub out_events: PathBuf,

    /// Output ground-truth JSON lines (per-draw probability vectors).
    #[arg(long)]
    pub out_truth: Option<PathBuf>,

    /// Output the unavailability calendar implied by the scenario, for
    /// feeding `fit --calendar`.
    #[arg(long)]
    pub out_calendar: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigOpts,
}

fn build_rule(args: &SimulateArgs, n_chairs: usize) -> CliResult<AssignmentRule> {
    let forbid = |flag: &str, present: bool| -> CliResult<()> {
        if present {
            Err(CliError::Usage(format!(
                "--{flag} does not apply to --rule {}",
                args.rule
            )))
        } else {
            Ok(())
        }
    };
    match args.rule.as_str() {
        "uniform" => {
            forbid("gamma", args.gamma.is_some())?;
            forbid("weights", args.weights.is_some())?;
            forbid("true-spec", args.true_spec.is_some())?;
            forbid("true-params", args.true_params.is_some())?;
            Ok(AssignmentRule::UniformAvailable)
        }
        "proportion-penalized" => {
            forbid("weights", args.weights.is_some())?;
            forbid("true-spec", args.true_spec.is_some())?;
            forbid("true-params", args.true_params.is_some())?;
            let gamma = args
                .gamma
                .ok_or_else(|| CliError::Usage("--rule proportion-penalized requires --gamma".into()))?;
            Ok(AssignmentRule::ProportionPenalized { gamma })
        }
        "fixed-bias" => {
            forbid("gamma", args.gamma.is_some())?;
            forbid("true-spec", args.true_spec.is_some())?;
            forbid("true-params", args.true_params.is_some())?;
            let raw = args
                .weights
                .as_ref()
                .ok_or_else(|| CliError::Usage("--rule fixed-bias requires --weights".into()))?;
            let weights = parse_f64_list(raw, "weight")?;
            if weights.len() != n_chairs {
                return Err(CliError::Usage(format!(
                    "{} weights for {n_chairs} chairs",
                    weights.len()
                )));
            }
            Ok(AssignmentRule::FixedBias { weights })
        }
        "true-model" => {
            forbid("gamma", args.gamma.is_some())?;
            forbid("weights", args.weights.is_some())?;
            let spec = args
                .true_spec
                .as_ref()
                .ok_or_else(|| CliError::Usage("--rule true-model requires --true-spec".into()))?;
            let params = args
                .true_params
                .as_ref()
                .ok_or_else(|| CliError::Usage("--rule true-model requires --true-params".into()))?;
            Ok(AssignmentRule::TrueModel {
                variant: parse_variant(spec)?,
                params: parse_f64_list(params, "coefficient")?,
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown rule {other:?}; expected uniform, proportion-penalized, fixed-bias, or true-model"
        ))),
    }
}

fn build_availability(raw: &str) -> CliResult<AvailabilityScenario> {
    if raw == "all" {
        return Ok(AvailabilityScenario::AllAvailable);
    }
    if let Some(period) = raw.strip_prefix("rotating:") {
        let period_days: usize = period
            .parse()
            .map_err(|_| CliError::Usage(format!("unparseable rotation period {period:?}")))?;
        if period_days == 0 {
            return Err(CliError::Usage("rotation period must be at least 1".into()));
        }
        return Ok(AvailabilityScenario::RotatingUnavailable { period_days });
    }
    Err(CliError::Usage(format!(
        "unknown availability {raw:?}; expected `all` or `rotating:<days>`"
    )))
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let config = args.config.to_config()?;
    let rule = build_rule(&args, config.n_chairs)?;
    let availability = build_availability(&args.availability)?;
    let start_date: Date = args
        .start_date
        .parse()
        .map_err(|e| CliError::Usage(format!("{e}")))?;

    let intensities: Vec<u64> = match args.intensity.len() {
        1 => vec![args.intensity[0]; config.n_classes()],
        k if k == config.n_classes() => args.intensity.clone(),
        k => {
            return Err(CliError::Usage(format!(
                "{k} intensities for {} classes; give one value or one per class",
                config.n_classes()
            )))
        }
    };

    let gen = GeneratorSpec {
        rule,
        n_days: args.days,
        start_date,
        intensities,
        poisson_arrivals: args.poisson,
        availability,
        covariates: if args.exogenous_proportions {
            CovariateProcess::ExogenousUniform
        } else {
            CovariateProcess::RunningProportions
        },
        seed: args.seed,
    };
    let out = simulate_assignments(&gen, &config)?;

    let manifest_path = manifest_path_for(&args.out_events);
    write_events_csv(
        &args.out_events,
        &out.events,
        &config,
        Some(&manifest_name_for(&args.out_events)),
    )?;
    if let Some(truth_path) = &args.out_truth {
        // first line is a header record referencing the manifest; the
        // remaining lines are TruthRecord objects
        let mut body = format!(
            "{}\n",
            serde_json::json!({ "manifest": manifest_name_for(&args.out_events) })
        )
        .into_bytes();
        for record in &out.truth {
            serde_json::to_writer(&mut body, record)
                .map_err(|e| CliError::Runtime(format!("cannot serialize truth: {e}")))?;
            body.push(b'\n');
        }
        std::fs::write(truth_path, body).map_err(|e| {
            CliError::Runtime(format!("cannot write {}: {e}", truth_path.display()))
        })?;
    }
    if let Some(calendar_path) = &args.out_calendar {
        sortition_audit::ingest::write_calendar_csv(
            calendar_path,
            &out.calendar,
            Some(&manifest_name_for(&args.out_events)),
        )?;
    }

    let mut manifest = RunManifest::new("simulate", &config)
        .seed(args.seed)
        .output(&args.out_events)
        .options(json!({
            "rule": args.rule,
            "gamma": args.gamma,
            "weights": args.weights,
            "true_spec": args.true_spec,
            "true_params": args.true_params,
            "days": args.days,
            "start_date": args.start_date,
            "intensity": args.intensity,
            "poisson": args.poisson,
            "availability": args.availability,
            "exogenous_proportions": args.exogenous_proportions,
        }));
    if let Some(truth_path) = &args.out_truth {
        manifest = manifest.output(truth_path);
    }
    if let Some(calendar_path) = &args.out_calendar {
        manifest = manifest.output(calendar_path);
    }
    write_manifest(&manifest_path, &manifest)?;

    let total: u64 = out.totals.iter().flatten().sum();
    println!(
        "simulated {} days: {} events, {} units, {} cases",
        args.days,
        out.events.len(),
        out.truth.len(),
        total
    );
    let chair_totals: Vec<u64> = (0..config.n_chairs)
        .map(|j| out.totals.iter().map(|row| row[j]).sum())
        .collect();
    println!("per-chair totals: {chair_totals:?}");
    Ok(())
}
