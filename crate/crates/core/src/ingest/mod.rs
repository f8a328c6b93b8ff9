//! Assignment-event files, availability calendars, and sample construction.
//!
//! Three CSV inputs feed the pipeline (all UTF-8, comma separated, one
//! header row; lines starting with `#` are ignored):
//!
//! * events: `date,class,chair,count`, ISO-8601 dates, 1-based chairs
//! * calendar: `chair,start_date,end_date,reason`, inclusive unavailability
//!   intervals
//! * seeds: `class,chair,count`, assignment history accumulated before the
//!   event window starts
//!
//! [`build_sample`] turns events into per-(day, class) sample units whose
//! running-proportion covariate reflects history *through the previous day*;
//! same-day assignments never influence the day's own covariates. A class
//! with no history yet gets the uniform `1/n_chairs` default.

mod events;
mod sample_builder;

pub use events::{
    parse_calendar, parse_events, parse_seed_counts, write_calendar_csv, write_events_csv,
    AssignmentEvent, AvailabilityCalendar, SeedCounts, UnavailableInterval,
};
pub use sample_builder::{
    aggregate_table, build_sample, read_sample_jsonl, render_aggregate, write_sample_jsonl,
    AggregateTable,
};
