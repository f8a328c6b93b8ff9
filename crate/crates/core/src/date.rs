//! Minimal calendar date, sufficient for ordering events and walking days.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A calendar date (proleptic Gregorian), ordered chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    year: i32,
    month: u8,
    day: u8,
}

impl Date {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self, Error> {
        if !(1..=12).contains(&month) {
            return Err(Error::Data(format!("month {month} out of range")));
        }
        let month = month as u8;
        let day_u8 = u8::try_from(day).unwrap_or(0);
        if day == 0 || day_u8 > days_in_month(year, month) {
            return Err(Error::Data(format!(
                "day {day} out of range for {year:04}-{month:02}"
            )));
        }
        Ok(Date {
            year,
            month,
            day: day_u8,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month as u32
    }

    pub fn day(&self) -> u32 {
        self.day as u32
    }

    /// The next calendar day.
    pub fn succ(&self) -> Date {
        if self.day < days_in_month(self.year, self.month) {
            Date {
                day: self.day + 1,
                ..*self
            }
        } else if self.month < 12 {
            Date {
                year: self.year,
                month: self.month + 1,
                day: 1,
            }
        } else {
            Date {
                year: self.year + 1,
                month: 1,
                day: 1,
            }
        }
    }

    /// The date `n` days after `self`.
    pub fn plus_days(&self, n: usize) -> Date {
        let mut d = *self;
        for _ in 0..n {
            d = d.succ();
        }
        d
    }
}

fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for Date {
    type Err = Error;

    /// Parses ISO-8601 `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Data(format!("unparseable date {s:?}, expected YYYY-MM-DD"));
        let mut parts = s.split('-');
        let year = parts.next().ok_or_else(bad)?;
        let month = parts.next().ok_or_else(bad)?;
        let day = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() || year.len() != 4 || month.len() != 2 || day.len() != 2 {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let month: u32 = month.parse().map_err(|_| bad())?;
        let day: u32 = day.parse().map_err(|_| bad())?;
        Date::new(year, month, day).map_err(|_| bad())
    }
}

impl Serialize for Date {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|e| D::Error::custom(format!("{e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays_iso_dates() {
        let d: Date = "2008-02-28".parse().unwrap();
        assert_eq!((d.year(), d.month(), d.day()), (2008, 2, 28));
        assert_eq!(d.to_string(), "2008-02-28");
    }

    #[test]
    fn rejects_invalid_dates() {
        assert!("2009-02-29".parse::<Date>().is_err());
        assert!("2009-13-01".parse::<Date>().is_err());
        assert!("2009-1-01".parse::<Date>().is_err());
        assert!("garbage".parse::<Date>().is_err());
    }

    #[test]
    fn successor_crosses_month_and_year_boundaries() {
        let d: Date = "2008-02-28".parse().unwrap();
        assert_eq!(d.succ().to_string(), "2008-02-29"); // leap year
        let d: Date = "2009-12-31".parse().unwrap();
        assert_eq!(d.succ().to_string(), "2010-01-01");
        let d: Date = "2009-01-01".parse().unwrap();
        assert_eq!(d.plus_days(365).to_string(), "2010-01-01");
    }

    #[test]
    fn ordering_is_chronological() {
        let a: Date = "2008-12-31".parse().unwrap();
        let b: Date = "2009-01-01".parse().unwrap();
        assert!(a < b);
    }
}
