//! Parsing of the three CSV inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::CourtConfig;
use crate::date::Date;
use crate::error::{Error, Result};

/// One row of the event file: `count` cases of one class assigned to one
/// chair on one day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentEvent {
    pub date: Date,
    /// Index into the configuration's class labels.
    pub class_idx: usize,
    /// 0-based chair index.
    pub chair_idx: usize,
    pub count: u64,
}

pub const EVENTS_HEADER: &str = "date,class,chair,count";
pub const CALENDAR_HEADER: &str = "chair,start_date,end_date,reason";
pub const SEEDS_HEADER: &str = "class,chair,count";

/// Iterate the data lines of a simple CSV file: checks the header, skips
/// `#` comments and blank lines, and hands `(line_number, line)` pairs to
/// the row callback.
fn for_each_row(
    path: &Path,
    expected_header: &str,
    mut row: impl FnMut(usize, &str) -> Result<()>,
) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line.trim() != expected_header {
                return Err(Error::ParseRow {
                    path: path.display().to_string(),
                    line: line_no,
                    message: format!(
                        "header {:?} does not match expected {expected_header:?}",
                        line.trim()
                    ),
                });
            }
            saw_header = true;
            continue;
        }
        row(line_no, line)?;
    }
    if !saw_header {
        return Err(Error::ParseRow {
            path: path.display().to_string(),
            line: 1,
            message: format!("missing header {expected_header:?}"),
        });
    }
    Ok(())
}

fn row_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::ParseRow {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn split_fields<'a>(path: &Path, line_no: usize, line: &'a str, n: usize) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(row_error(
            path,
            line_no,
            format!("expected {n} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn parse_chair(path: &Path, line_no: usize, field: &str, config: &CourtConfig) -> Result<usize> {
    let chair: usize = field
        .trim()
        .parse()
        .map_err(|_| row_error(path, line_no, format!("unparseable chair {field:?}")))?;
    if chair < 1 || chair > config.n_chairs {
        return Err(row_error(
            path,
            line_no,
            format!("chair {chair} outside 1..={}", config.n_chairs),
        ));
    }
    Ok(chair - 1)
}

fn parse_class(path: &Path, line_no: usize, field: &str, config: &CourtConfig) -> Result<usize> {
    config.class_index(field.trim()).ok_or_else(|| {
        row_error(
            path,
            line_no,
            format!("unknown class label {:?}", field.trim()),
        )
    })
}

fn parse_date(path: &Path, line_no: usize, field: &str) -> Result<Date> {
    field
        .trim()
        .parse()
        .map_err(|e| row_error(path, line_no, format!("{e}")))
}

/// Parse an assignment-event CSV. Rows come back ordered by date (stable, so
/// rows of the same day keep their file order); malformed rows are rejected
/// with their line number.
pub fn parse_events(path: impl AsRef<Path>, config: &CourtConfig) -> Result<Vec<AssignmentEvent>> {
    let path = path.as_ref();
    let mut events = Vec::new();
    for_each_row(path, EVENTS_HEADER, |line_no, line| {
        let fields = split_fields(path, line_no, line, 4)?;
        let date = parse_date(path, line_no, fields[0])?;
        let class_idx = parse_class(path, line_no, fields[1], config)?;
        let chair_idx = parse_chair(path, line_no, fields[2], config)?;
        let count: u64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| row_error(path, line_no, format!("unparseable count {:?}", fields[3])))?;
        if count == 0 {
            return Err(row_error(path, line_no, "count must be at least 1"));
        }
        events.push(AssignmentEvent {
            date,
            class_idx,
            chair_idx,
            count,
        });
        Ok(())
    })?;
    events.sort_by_key(|e| e.date);
    Ok(events)
}

/// Write events in the same CSV schema [`parse_events`] reads. An optional
/// manifest path is recorded as a leading `#` comment.
pub fn write_events_csv(
    path: impl AsRef<Path>,
    events: &[AssignmentEvent],
    config: &CourtConfig,
    manifest: Option<&str>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(m) = manifest {
        let _ = writeln!(out, "# manifest: {m}");
    }
    let _ = writeln!(out, "{EVENTS_HEADER}");
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.date,
            config.class_labels[e.class_idx],
            e.chair_idx + 1,
            e.count
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// A period during which one chair cannot receive cases (inclusive bounds).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnavailableInterval {
    pub chair_idx: usize,
    pub start: Date,
    pub end: Date,
    pub reason: String,
}

/// Per-chair unavailability intervals (presidency tenures, vacant chairs).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityCalendar {
    intervals: Vec<UnavailableInterval>,
}

impl AvailabilityCalendar {
    /// Calendar with no unavailability: every chair always available.
    pub fn all_available() -> Self {
        AvailabilityCalendar::default()
    }

    pub fn from_intervals(intervals: Vec<UnavailableInterval>, config: &CourtConfig) -> Result<Self> {
        for iv in &intervals {
            if iv.chair_idx >= config.n_chairs {
                return Err(Error::Data(format!(
                    "calendar interval names chair {} outside 1..={}",
                    iv.chair_idx + 1,
                    config.n_chairs
                )));
            }
            if iv.start > iv.end {
                return Err(Error::Data(format!(
                    "calendar interval for chair {} has start {} after end {}",
                    iv.chair_idx + 1,
                    iv.start,
                    iv.end
                )));
            }
        }
        Ok(AvailabilityCalendar { intervals })
    }

    pub fn intervals(&self) -> &[UnavailableInterval] {
        &self.intervals
    }

    pub fn is_available(&self, chair_idx: usize, date: Date) -> bool {
        !self
            .intervals
            .iter()
            .any(|iv| iv.chair_idx == chair_idx && iv.start <= date && date <= iv.end)
    }

    /// Availability mask over all chairs for one date.
    pub fn mask(&self, date: Date, n_chairs: usize) -> Vec<bool> {
        (0..n_chairs).map(|j| self.is_available(j, date)).collect()
    }
}

/// Write a calendar in the same CSV schema [`parse_calendar`] reads.
pub fn write_calendar_csv(
    path: impl AsRef<Path>,
    calendar: &AvailabilityCalendar,
    manifest: Option<&str>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(m) = manifest {
        let _ = writeln!(out, "# manifest: {m}");
    }
    let _ = writeln!(out, "{CALENDAR_HEADER}");
    for iv in &calendar.intervals {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            iv.chair_idx + 1,
            iv.start,
            iv.end,
            iv.reason
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parse the unavailability calendar CSV.
pub fn parse_calendar(path: impl AsRef<Path>, config: &CourtConfig) -> Result<AvailabilityCalendar> {
    let path = path.as_ref();
    let mut intervals = Vec::new();
    for_each_row(path, CALENDAR_HEADER, |line_no, line| {
        let fields = split_fields(path, line_no, line, 4)?;
        let chair_idx = parse_chair(path, line_no, fields[0], config)?;
        let start = parse_date(path, line_no, fields[1])?;
        let end = parse_date(path, line_no, fields[2])?;
        if start > end {
            return Err(row_error(
                path,
                line_no,
                format!("interval start {start} after end {end}"),
            ));
        }
        intervals.push(UnavailableInterval {
            chair_idx,
            start,
            end,
            reason: fields[3].trim().to_string(),
        });
        Ok(())
    })?;
    AvailabilityCalendar::from_intervals(intervals, config)
}

/// Class-by-chair assignment counts accumulated before the event window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCounts {
    /// `counts[class][chair]`.
    counts: Vec<Vec<u64>>,
}

impl SeedCounts {
    pub fn zeros(config: &CourtConfig) -> Self {
        SeedCounts {
            counts: vec![vec![0; config.n_chairs]; config.n_classes()],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>, config: &CourtConfig) -> Result<Self> {
        if counts.len() != config.n_classes()
            || counts.iter().any(|row| row.len() != config.n_chairs)
        {
            return Err(Error::Data(format!(
                "seed counts must be a {} x {} matrix",
                config.n_classes(),
                config.n_chairs
            )));
        }
        Ok(SeedCounts { counts })
    }

    pub fn get(&self, class_idx: usize, chair_idx: usize) -> u64 {
        self.counts[class_idx][chair_idx]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }
}

/// Parse the seed-count CSV. Pairs not listed default to zero; duplicate
/// pairs are rejected.
pub fn parse_seed_counts(path: impl AsRef<Path>, config: &CourtConfig) -> Result<SeedCounts> {
    let path = path.as_ref();
    let mut counts = vec![vec![None::<u64>; config.n_chairs]; config.n_classes()];
    for_each_row(path, SEEDS_HEADER, |line_no, line| {
        let fields = split_fields(path, line_no, line, 3)?;
        let class_idx = parse_class(path, line_no, fields[0], config)?;
        let chair_idx = parse_chair(path, line_no, fields[1], config)?;
        let count: u64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| row_error(path, line_no, format!("unparseable count {:?}", fields[2])))?;
        if counts[class_idx][chair_idx].replace(count).is_some() {
            return Err(row_error(
                path,
                line_no,
                format!(
                    "duplicate seed entry for class {} chair {}",
                    config.class_labels[class_idx],
                    chair_idx + 1
                ),
            ));
        }
        Ok(())
    })?;
    Ok(SeedCounts {
        counts: counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.unwrap_or(0)).collect())
            .collect(),
    })
}
