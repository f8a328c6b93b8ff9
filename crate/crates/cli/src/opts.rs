//! Shared flag groups: court configuration and model names.

use clap::Args;
use sortition_audit::model::ModelVariant;
use sortition_audit::CourtConfig;

use crate::{CliError, CliResult};

/// The eleven-chair court and fourteen case classes used by default.
pub const DEFAULT_CHAIRS: usize = 11;
pub const DEFAULT_CLASSES: [&str; 14] = [
    "AC", "ACO", "ADI", "AI", "ARE", "HC", "Inq", "MI", "MS", "Pet", "RE", "RHC", "RMS", "Rcl",
];

/// Flags describing the court; identical across subcommands.
#[derive(Args, Debug, Clone)]
pub struct ConfigOpts {
    /// Number of chairs.
    #[arg(long, default_value_t = DEFAULT_CHAIRS)]
    pub chairs: usize,

    /// Comma-separated case-class labels.
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,

    /// 1-based chair whose coefficients are pinned to zero.
    #[arg(long, default_value_t = 1)]
    pub reference: usize,
}

impl ConfigOpts {
    pub fn to_config(&self) -> CliResult<CourtConfig> {
        let classes: Vec<String> = if self.classes.is_empty() {
            DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect()
        } else {
            self.classes.clone()
        };
        CourtConfig::new(
            self.chairs,
            classes,
            self.reference,
            vec![sortition_audit::config::PROPORTION_COVARIATE.to_string()],
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Parse a model name (`m1`..`m6`) as a usage error on failure.
pub fn parse_variant(name: &str) -> CliResult<ModelVariant> {
    name.parse().map_err(|_| {
        CliError::Usage(format!(
            "unknown model {name:?}; expected one of m1, m2, m3, m4, m5, m6"
        ))
    })
}

/// Parse a comma-separated list of f64.
pub fn parse_f64_list(raw: &str, what: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("unparseable {what} entry {s:?}")))
        })
        .collect()
}
