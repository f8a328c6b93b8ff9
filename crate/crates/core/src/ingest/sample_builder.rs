//! Building sample units from events: running proportions, availability
//! masks, and aggregate tables.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::CourtConfig;
use crate::error::{Error, Result};
use crate::ingest::events::{AssignmentEvent, AvailabilityCalendar, SeedCounts};
use crate::model::SampleUnit;

/// One sample unit per (day, class) with at least one assignment.
///
/// The proportion covariate of chair `j` is the fraction of the class's
/// cases assigned to it from the seed history through the *previous* day;
/// the day's own events are excluded. When the class has no history at all
/// the proportions default to `1/n_chairs` for every chair. Events landing
/// on a chair the calendar marks unavailable are a hard error.
pub fn build_sample(
    events: &[AssignmentEvent],
    calendar: &AvailabilityCalendar,
    seeds: Option<&SeedCounts>,
    config: &CourtConfig,
) -> Result<Vec<SampleUnit>> {
    config.validate()?;
    let n = config.n_chairs;
    let c = config.n_classes();
    let prop_idx = config.proportion_idx();
    let k = config.covariate_names.len();

    if events.windows(2).any(|w| w[0].date > w[1].date) {
        return Err(Error::Data("events are not sorted by date".into()));
    }

    // running per-class history, seeded
    let mut cum = vec![vec![0u64; n]; c];
    let mut cum_total = vec![0u64; c];
    if let Some(seeds) = seeds {
        for (class, row) in cum.iter_mut().enumerate() {
            for (chair, slot) in row.iter_mut().enumerate() {
                let v = seeds.get(class, chair);
                *slot += v;
                cum_total[class] += v;
            }
        }
    }

    let mut units = Vec::new();
    let mut conflicts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let date = events[i].date;
        let mut day_end = i;
        while day_end < events.len() && events[day_end].date == date {
            day_end += 1;
        }
        let day_events = &events[i..day_end];
        i = day_end;

        let availability = calendar.mask(date, n);
        if !availability.iter().any(|&a| a) {
            return Err(Error::Data(format!("no chair is available on {date}")));
        }

        // counts per (class, chair) for the day
        let mut day_counts = vec![vec![0u64; n]; c];
        for e in day_events {
            if !availability[e.chair_idx] {
                conflicts.push(format!(
                    "{} {} -> chair {}",
                    e.date,
                    config.class_labels[e.class_idx],
                    e.chair_idx + 1
                ));
            }
            day_counts[e.class_idx][e.chair_idx] += e.count;
        }

        if conflicts.is_empty() {
            for class in 0..c {
                let total: u64 = day_counts[class].iter().sum();
                if total == 0 {
                    continue;
                }
                let covariates: Vec<Vec<f64>> = (0..n)
                    .map(|chair| {
                        let mut row = vec![0.0; k];
                        if let Some(p) = prop_idx {
                            row[p] = if cum_total[class] == 0 {
                                1.0 / n as f64
                            } else {
                                cum[class][chair] as f64 / cum_total[class] as f64
                            };
                        }
                        row
                    })
                    .collect();
                units.push(SampleUnit::new(
                    config,
                    date,
                    class,
                    std::mem::take(&mut day_counts[class]),
                    availability.clone(),
                    covariates,
                )?);
            }
        }

        // fold the day into the running history only after its units exist
        for e in day_events {
            cum[e.class_idx][e.chair_idx] += e.count;
            cum_total[e.class_idx] += e.count;
        }
    }

    if !conflicts.is_empty() {
        let shown = conflicts.len().min(10);
        let mut msg = format!(
            "{} assignment(s) to unavailable chairs: {}",
            conflicts.len(),
            conflicts[..shown].join("; ")
        );
        if conflicts.len() > shown {
            msg.push_str(&format!(" (and {} more)", conflicts.len() - shown));
        }
        return Err(Error::Data(msg));
    }
    Ok(units)
}

/// Class-by-chair assignment totals with margins.
#[derive(Clone, Debug, Serialize)]
pub struct AggregateTable {
    /// `counts[class][chair]`.
    pub counts: Vec<Vec<u64>>,
    pub class_totals: Vec<u64>,
    pub chair_totals: Vec<u64>,
    pub grand_total: u64,
}

pub fn aggregate_table(events: &[AssignmentEvent], config: &CourtConfig) -> AggregateTable {
    let n = config.n_chairs;
    let c = config.n_classes();
    let mut counts = vec![vec![0u64; n]; c];
    for e in events {
        counts[e.class_idx][e.chair_idx] += e.count;
    }
    let class_totals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let chair_totals: Vec<u64> = (0..n).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
    let grand_total = class_totals.iter().sum();
    AggregateTable {
        counts,
        class_totals,
        chair_totals,
        grand_total,
    }
}

/// Write sample units as JSON lines (one unit per line).
pub fn write_sample_jsonl(path: impl AsRef<Path>, sample: &[SampleUnit]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for unit in sample {
        serde_json::to_writer(&mut out, unit)?;
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read sample units from JSON lines, validating each against the
/// configuration.
pub fn read_sample_jsonl(path: impl AsRef<Path>, config: &CourtConfig) -> Result<Vec<SampleUnit>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut units = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let unit: SampleUnit = serde_json::from_str(&line).map_err(|e| Error::ParseRow {
            path: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        unit.validate(config).map_err(|e| Error::ParseRow {
            path: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        units.push(unit);
    }
    Ok(units)
}

/// Helper for pretty-printing an aggregate table (used by the CLI summary).
pub fn render_aggregate(table: &AggregateTable, config: &CourtConfig, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "class")?;
    for j in 0..config.n_chairs {
        write!(out, "\t{}", j + 1)?;
    }
    writeln!(out, "\ttotal")?;
    for (class, row) in table.counts.iter().enumerate() {
        write!(out, "{}", config.class_labels[class])?;
        for v in row {
            write!(out, "\t{v}")?;
        }
        writeln!(out, "\t{}", table.class_totals[class])?;
    }
    write!(out, "total")?;
    for v in &table.chair_totals {
        write!(out, "\t{v}")?;
    }
    writeln!(out, "\t{}", table.grand_total)
}
