//! Forecast records and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::YearMonth;

/// One out-of-sample forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub target: String,
    pub horizon: usize,
    pub method: String,
    /// Date of the forecast response.
    pub date: YearMonth,
    /// Last date whose data the forecast used.
    pub origin: YearMonth,
    pub prediction: f64,
    pub actual: f64,
    pub bandwidth: Option<f64>,
    pub stop: Option<usize>,
    /// Training rows available at the origin.
    pub sample: usize,
}

impl ForecastRecord {
    pub fn error(&self) -> f64 {
        self.actual - self.prediction
    }
}

/// A forecast that could not be produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastFailure {
    pub target: String,
    pub horizon: usize,
    pub method: String,
    pub date: YearMonth,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ForecastLog {
    /// Method label used as the denominator of relative metrics.
    pub benchmark: String,
    pub records: Vec<ForecastRecord>,
    pub failures: Vec<ForecastFailure>,
}

impl ForecastLog {
    pub fn new(benchmark: impl Into<String>, records: Vec<ForecastRecord>) -> Result<Self> {
        let log = ForecastLog {
            benchmark: benchmark.into(),
            records,
            failures: vec![],
        };
        log.validate()?;
        Ok(log)
    }

    /// At most one record per (target, horizon, method, date).
    pub fn validate(&self) -> Result<()> {
        let mut keys: Vec<(&str, usize, &str, YearMonth)> = self
            .records
            .iter()
            .map(|r| (r.target.as_str(), r.horizon, r.method.as_str(), r.date))
            .collect();
        keys.sort();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            let (t, h, m, d) = w[0];
            return Err(Error::config(format!(
                "duplicate forecast record: {t}, h={h}, {m}, {d}"
            )));
        }
        Ok(())
    }

    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    /// Distinct (target, horizon) pairs in first-seen order.
    pub fn cells(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for r in &self.records {
            if !out.iter().any(|(t, h)| *t == r.target && *h == r.horizon) {
                out.push((r.target.clone(), r.horizon));
            }
        }
        out
    }

    /// Records of one method for one target and horizon, sorted by date.
    pub fn series(&self, target: &str, horizon: usize, method: &str) -> Vec<&ForecastRecord> {
        let mut out: Vec<&ForecastRecord> = self
            .records
            .iter()
            .filter(|r| r.target == target && r.horizon == horizon && r.method == method)
            .collect();
        out.sort_by_key(|r| r.date);
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, benchmark: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<ForecastRecord>, _>>()?;
        ForecastLog::new(benchmark, records)
    }
}
