//! `sortition-audit fit`

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use sortition_audit::estimation::{fit_mle, FitOptions, FitResult};
use sortition_audit::ingest::aggregate_table;
use sortition_audit::model::ModelSpec;
use sortition_audit::CourtConfig;

use crate::commands::io::load_sample;
use crate::manifest::{manifest_name_for, manifest_path_for, write_manifest, RunManifest};
use crate::opts::{parse_variant, ConfigOpts};
use crate::CliResult;

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Assignment-event CSV (`date,class,chair,count`).
    #[arg(long)]
    pub events: PathBuf,

    /// Unavailability calendar CSV (`chair,start_date,end_date,reason`);
    /// all chairs are available when omitted.
    #[arg(long)]
    pub calendar: Option<PathBuf>,

    /// Seed-count CSV (`class,chair,count`): history accumulated before the
    /// event window.
    #[arg(long)]
    pub seeds: Option<PathBuf>,

    /// Model to fit: m1..m6.
    #[arg(long)]
    pub spec: String,

    /// Output path for the fit JSON.
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub config: ConfigOpts,
}

/// On-disk schema of a saved fit: self-contained for the `ci` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitFile {
    pub manifest: String,
    pub config: CourtConfig,
    /// Human-readable label of each coefficient, in estimate order.
    pub cells: Vec<String>,
    pub fit: FitResult,
}

pub fn run(args: FitArgs) -> CliResult<()> {
    let variant = parse_variant(&args.spec)?;
    let config = args.config.to_config()?;
    let spec = ModelSpec::new(variant, &config)?;
    let loaded = load_sample(&args.events, args.calendar.as_ref(), args.seeds.as_ref(), &config)?;

    let fit = fit_mle(&loaded.sample, &spec, &FitOptions::default())?;
    let cells: Vec<String> = spec.cells().iter().map(|c| c.label(&config)).collect();

    let manifest_path = manifest_path_for(&args.out);
    let file = FitFile {
        manifest: manifest_name_for(&args.out),
        config: config.clone(),
        cells,
        fit,
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| crate::CliError::Runtime(format!("cannot serialize fit: {e}")))?;
    std::fs::write(&args.out, json + "\n")
        .map_err(|e| crate::CliError::Runtime(format!("cannot write {}: {e}", args.out.display())))?;

    let manifest = RunManifest::new("fit", &config)
        .input(&args.events)
        .maybe_input(args.calendar.as_ref())
        .maybe_input(args.seeds.as_ref())
        .output(&args.out)
        .options(json!({
            "spec": variant.to_string(),
        }));
    write_manifest(&manifest_path, &manifest)?;

    print_summary(&file, &loaded.events, &config);
    Ok(())
}

fn print_summary(
    file: &FitFile,
    events: &[sortition_audit::ingest::AssignmentEvent],
    config: &CourtConfig,
) {
    let fit = &file.fit;
    let table = aggregate_table(events, config);
    println!("model:            {}", fit.spec.variant());
    println!(
        "data:             {} events, {} units, {} cases",
        events.len(),
        fit.sample_units,
        fit.sample_total
    );
    println!("grand total:      {}", table.grand_total);
    println!("parameters:       {}", fit.estimates.len());
    println!("log-likelihood:   {:.6}", fit.log_likelihood_at_max);
    println!(
        "converged:        {} ({} iterations, gradient max-norm {:.3e})",
        fit.converged, fit.iterations, fit.final_gradient_norm
    );
    if fit.quasi_separated {
        println!("warning:          quasi-separated fit; coefficient magnitudes exceed 30");
    }
    // largest coefficients tell most of the story
    let mut ranked: Vec<(usize, f64)> = fit
        .estimates
        .values()
        .iter()
        .copied()
        .enumerate()
        .collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    println!("largest coefficients:");
    for (idx, value) in ranked.iter().take(5) {
        println!("  {:<28} {:+.6}", file.cells[*idx], value);
    }
}
