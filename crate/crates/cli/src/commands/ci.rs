//! `sortition-audit ci`

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use sortition_audit::estimation::{probability_ci, Scenario};

use crate::commands::fit::FitFile;
use crate::manifest::{manifest_name_for, manifest_path_for, write_manifest, RunManifest};
use crate::opts::parse_f64_list;
use crate::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct CiArgs {
    /// A fit JSON produced by `sortition-audit fit`.
    #[arg(long)]
    pub fit: PathBuf,

    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,

    /// Joint confidence level.
    #[arg(long, default_value_t = 0.99)]
    pub level: f64,

    /// Restrict rows to these classes (repeatable); all classes by default.
    #[arg(long = "class")]
    pub classes: Vec<String>,

    /// Equal shares over available chairs (the default scenario).
    #[arg(long, conflicts_with = "proportions")]
    pub equal_proportions: bool,

    /// Explicit per-chair proportions, comma separated, summing to 1.
    #[arg(long)]
    pub proportions: Option<String>,

    /// 1-based chairs unavailable in the scenario, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub unavailable: Vec<usize>,

    /// Bonferroni family size; defaults to the number of available chairs.
    #[arg(long)]
    pub family: Option<usize>,
}

pub fn run(args: CiArgs) -> CliResult<()> {
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Usage(format!(
            "confidence level must lie in (0,1), got {}",
            args.level
        )));
    }
    let raw = std::fs::read_to_string(&args.fit)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.fit.display())))?;
    let file: FitFile = serde_json::from_str(&raw)
        .map_err(|e| CliError::Runtime(format!("{} is not a fit file: {e}", args.fit.display())))?;
    let config = &file.config;
    if !file.fit.converged {
        return Err(CliError::Runtime(
            "the saved fit did not converge; intervals would be meaningless".into(),
        ));
    }

    let n = config.n_chairs;
    let mut availability = vec![true; n];
    for chair in &args.unavailable {
        if *chair < 1 || *chair > n {
            return Err(CliError::Usage(format!(
                "unavailable chair {chair} outside 1..={n}"
            )));
        }
        availability[chair - 1] = false;
    }

    let proportions: Option<Vec<f64>> = match &args.proportions {
        Some(raw) => {
            let values = parse_f64_list(raw, "proportion")?;
            if values.len() != n {
                return Err(CliError::Usage(format!(
                    "{} proportions for {n} chairs",
                    values.len()
                )));
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(CliError::Usage(format!(
                    "proportions sum to {sum}, expected 1"
                )));
            }
            Some(values)
        }
        None => None,
    };

    let class_indices: Vec<usize> = if args.classes.is_empty() {
        (0..config.n_classes()).collect()
    } else {
        args.classes
            .iter()
            .map(|label| {
                config
                    .class_index(label)
                    .ok_or_else(|| CliError::Usage(format!("unknown class {label:?}")))
            })
            .collect::<CliResult<Vec<_>>>()?
    };

    let mut body = String::new();
    for &class_index in &class_indices {
        let scenario = match &proportions {
            Some(values) => Scenario {
                class_index,
                availability: availability.clone(),
                covariates: values.iter().map(|v| vec![*v]).collect(),
            },
            None => Scenario::equal_proportions_with_availability(
                class_index,
                availability.clone(),
            )?,
        };
        let table = probability_ci(&file.fit, &scenario, args.level, args.family)?;
        for row in &table.rows {
            let _ = writeln!(
                body,
                "{},{},{},{},{},{}",
                config.class_labels[class_index],
                row.chair,
                row.available,
                row.point,
                row.lower,
                row.upper
            );
        }
    }

    let manifest_path = manifest_path_for(&args.out);
    let family_used = args
        .family
        .unwrap_or_else(|| availability.iter().filter(|&&a| a).count());
    let mut out = String::new();
    let _ = writeln!(out, "# manifest: {}", manifest_name_for(&args.out));
    let _ = writeln!(out, "# level: {}, family_size: {}", args.level, family_used);
    let _ = writeln!(out, "class,chair,available,point,lower,upper");
    out.push_str(&body);
    std::fs::write(&args.out, out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", args.out.display())))?;

    let manifest = RunManifest::new("ci", config)
        .input(&args.fit)
        .output(&args.out)
        .options(json!({
            "level": args.level,
            "family": args.family,
            "unavailable": args.unavailable,
            "classes": args.classes,
            "proportions": args.proportions,
        }));
    write_manifest(&manifest_path, &manifest)?;

    println!(
        "wrote {} rows for {} classes at level {} (family {family_used}) to {}",
        class_indices.len() * n,
        class_indices.len(),
        args.level,
        args.out.display()
    );
    Ok(())
}
