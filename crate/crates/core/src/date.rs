//! Calendar dates without timezone or arithmetic support.
//!
//! The core pipeline only ever compares and prints dates; generating
//! trading calendars is left to the companion crate.

use core::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar date. Field order gives lexicographic `Ord` = chronological.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Date {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

fn is_leap_year(year: u16) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

fn days_in_month(year: u16, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl Date {
    pub fn new(year: u16, month: u8, day: u8) -> Result<Self> {
        if month < 1 || month > 12 {
            return Err(Error::InvalidInput("month out of range".into()));
        }
        if day < 1 || day > days_in_month(year, month) {
            return Err(Error::InvalidInput("day out of range for month".into()));
        }
        Ok(Date { year, month, day })
    }

    /// Parses a strict `YYYY-MM-DD` string.
    pub fn parse_iso(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let malformed = || Error::InvalidInput("date must be YYYY-MM-DD".into());
        if bytes.len() != 10 || bytes[4] != b'-' || bytes[7] != b'-' {
            return Err(malformed());
        }
        let digits = |r: core::ops::Range<usize>| -> Result<u32> {
            let part = &s[r];
            if !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            part.parse::<u32>().map_err(|_| malformed())
        };
        let year = digits(0..4)? as u16;
        let month = digits(5..7)? as u8;
        let day = digits(8..10)? as u8;
        Date::new(year, month, day)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl Serialize for Date {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        struct DateVisitor;
        impl Visitor<'_> for DateVisitor {
            type Value = Date;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a YYYY-MM-DD date string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> core::result::Result<Date, E> {
                Date::parse_iso(v).map_err(|e| E::custom(e))
            }
        }
        deserializer.deserialize_str(DateVisitor)
    }
}
