//! Subcommand definitions and dispatch.

mod ci;
mod fit;
mod lrt;
mod simulate;

pub use ci::CiArgs;
pub use fit::{FitArgs, FitFile};
pub use lrt::LrtArgs;
pub use simulate::SimulateArgs;

use clap::{Parser, Subcommand};

use crate::CliResult;

#[derive(Parser, Debug)]
#[command(
    name = "sortition-audit",
    version,
    about = "Statistical audit of randomized case assignment",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a model to an assignment-event file.
    Fit(FitArgs),
    /// Likelihood-ratio ladder of reduced models against a full model.
    Lrt(LrtArgs),
    /// Bonferroni-corrected probability intervals from a saved fit.
    Ci(CiArgs),
    /// Generate a synthetic assignment stream with a known rule.
    Simulate(SimulateArgs),
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => fit::run(args),
        Command::Lrt(args) => lrt::run(args),
        Command::Ci(args) => ci::run(args),
        Command::Simulate(args) => simulate::run(args),
    }
}

pub(crate) mod io {
    //! Input loading shared by `fit` and `lrt`.

    use std::path::PathBuf;

    use sortition_audit::ingest::{
        build_sample, parse_calendar, parse_events, parse_seed_counts, AssignmentEvent,
        AvailabilityCalendar, SeedCounts,
    };
    use sortition_audit::model::SampleUnit;
    use sortition_audit::CourtConfig;

    use crate::CliResult;

    pub struct LoadedSample {
        pub events: Vec<AssignmentEvent>,
        pub sample: Vec<SampleUnit>,
    }

    pub fn load_sample(
        events_path: &PathBuf,
        calendar_path: Option<&PathBuf>,
        seeds_path: Option<&PathBuf>,
        config: &CourtConfig,
    ) -> CliResult<LoadedSample> {
        let events = parse_events(events_path, config)?;
        let calendar = match calendar_path {
            Some(p) => parse_calendar(p, config)?,
            None => AvailabilityCalendar::all_available(),
        };
        let seeds: Option<SeedCounts> = match seeds_path {
            Some(p) => Some(parse_seed_counts(p, config)?),
            None => {
                eprintln!(
                    "warning: no seed counts supplied; each class's proportions start at the \
                     uniform 1/{} default until it accumulates history",
                    config.n_chairs
                );
                None
            }
        };
        let sample = build_sample(&events, &calendar, seeds.as_ref(), config)?;
        Ok(LoadedSample { events, sample })
    }
}
