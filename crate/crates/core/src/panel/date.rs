use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    // months since year 0, January
    ordinal: i64,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Parse(format!("month {month} out of range")));
        }
        Ok(YearMonth {
            ordinal: i64::from(year) * 12 + i64::from(month) - 1,
        })
    }

    pub fn year(self) -> i32 {
        self.ordinal.div_euclid(12) as i32
    }

    pub fn month(self) -> u32 {
        self.ordinal.rem_euclid(12) as u32 + 1
    }

    pub fn offset(self, months: i64) -> Self {
        YearMonth {
            ordinal: self.ordinal + months,
        }
    }

    pub fn months_since(self, other: YearMonth) -> i64 {
        self.ordinal - other.ordinal
    }

    /// Parses `YYYY-MM`, `YYYY-MM-DD`, `YYYY:MM` or `M/D/YYYY`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unrecognized date `{s}`"));
        let num = |p: &str| p.trim().parse::<i64>().map_err(|_| bad());
        if s.contains('/') {
            let parts: Vec<&str> = s.split('/').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let month = num(parts[0])?;
            let year = num(parts[2])?;
            return YearMonth::new(year as i32, u32::try_from(month).map_err(|_| bad())?);
        }
        let parts: Vec<&str> = s.split(['-', ':']).collect();
        if parts.len() < 2 || parts.len() > 3 || parts[0].len() != 4 {
            return Err(bad());
        }
        let year = num(parts[0])?;
        let month = num(parts[1])?;
        YearMonth::new(year as i32, u32::try_from(month).map_err(|_| bad())?)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        YearMonth::parse(s)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        YearMonth::parse(&s).map_err(serde::de::Error::custom)
    }
}
