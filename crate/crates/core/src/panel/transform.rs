//! FRED-MD transformation codes and forecast targets.
//!
//! | code | transform                 |
//! |------|---------------------------|
//! | 1    | `x`                       |
//! | 2    | `Δx`                      |
//! | 3    | `Δ²x`                     |
//! | 4    | `log x`                   |
//! | 5    | `Δ log x`                 |
//! | 6    | `Δ² log x`                |
//! | 7    | `Δ(x_t / x_{t-1} - 1)`    |

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Panel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TransformCode(u8);

impl TransformCode {
    pub fn new(code: u8) -> Result<Self> {
        if (1..=7).contains(&code) {
            Ok(TransformCode(code))
        } else {
            Err(Error::Parse(format!(
                "transform code {code} is not in 1..=7"
            )))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    fn takes_log(self) -> bool {
        matches!(self.0, 4..=7)
    }

    /// Number of leading periods the transform leaves undefined.
    pub fn warm_up(self) -> usize {
        match self.0 {
            1 | 4 => 0,
            2 | 5 => 1,
            _ => 2,
        }
    }
}

impl TryFrom<u8> for TransformCode {
    type Error = Error;

    fn try_from(c: u8) -> Result<Self> {
        TransformCode::new(c)
    }
}

impl From<TransformCode> for u8 {
    fn from(c: TransformCode) -> u8 {
        c.0
    }
}

/// Splits a series into its leading-missing prefix length and the observed
/// remainder; any gap after the first observation is an error.
fn observed_suffix(series: &[Option<f64>], name: &str) -> Result<(usize, Vec<f64>)> {
    let start = series
        .iter()
        .position(Option::is_some)
        .unwrap_or(series.len());
    let mut out = Vec::with_capacity(series.len() - start);
    for (i, v) in series.iter().enumerate().skip(start) {
        match v {
            Some(x) => out.push(*x),
            None => {
                return Err(Error::InteriorMissing {
                    series: name.to_string(),
                    row: i,
                })
            }
        }
    }
    Ok((start, out))
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Applies a transformation code to one series.
///
/// Leading missing values are allowed and propagate; the first
/// [`TransformCode::warm_up`] observed periods also become missing.
pub fn apply_transform(
    series: &[Option<f64>],
    code: TransformCode,
    name: &str,
) -> Result<Vec<Option<f64>>> {
    let (start, x) = observed_suffix(series, name)?;
    if code.takes_log() {
        if let Some(k) = x.iter().position(|&v| v <= 0.0) {
            return Err(Error::Domain {
                series: name.to_string(),
                row: start + k,
                message: format!(
                    "non-positive value {} under transform code {}",
                    x[k], code.0
                ),
            });
        }
    }
    let logs = || x.iter().map(|v| v.ln()).collect::<Vec<_>>();
    let body: Vec<f64> = match code.0 {
        1 => x.clone(),
        2 => diff(&x),
        3 => diff(&diff(&x)),
        4 => logs(),
        5 => diff(&logs()),
        6 => diff(&diff(&logs())),
        7 => {
            let growth: Vec<f64> = x.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
            diff(&growth)
        }
        _ => unreachable!("validated on construction"),
    };
    let mut out = vec![None; series.len()];
    let lead = start + (x.len() - body.len());
    for (slot, v) in out[lead..].iter_mut().zip(body) {
        *slot = Some(v);
    }
    Ok(out)
}

/// Transforms every column of a panel with its FRED-MD code.
///
/// `remap` overrides codes by series name (e.g. to treat housing series as
/// I(1) in logs).
pub fn transform_panel(
    panel: &Panel,
    codes: &[TransformCode],
    remap: &HashMap<String, TransformCode>,
) -> Result<Panel> {
    if codes.len() != panel.n_series() {
        return Err(Error::DimensionMismatch {
            expected: panel.n_series(),
            found: codes.len(),
        });
    }
    let columns = panel
        .names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let code = remap.get(name).copied().unwrap_or(codes[j]);
            apply_transform(&panel.column(j), code, name)
        })
        .collect::<Result<Vec<_>>>()?;
    Panel::from_columns(panel.dates().to_vec(), panel.names().to_vec(), columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// `(1200/h) log(s_t / s_{t-h})`
    LogGrowth,
    /// `(12/h) (s_t - s_{t-h})`
    LevelDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub series: String,
    pub horizon: usize,
    pub kind: TargetKind,
}

impl TargetSpec {
    pub fn new(series: impl Into<String>, horizon: usize, kind: TargetKind) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::config("target horizon must be at least 1"));
        }
        Ok(TargetSpec {
            series: series.into(),
            horizon,
            kind,
        })
    }

    /// Interest rates are differenced in levels; everything else is an
    /// annualized log growth rate.
    pub fn conventional(series: impl Into<String>, horizon: usize) -> Result<Self> {
        let series = series.into();
        let kind = match series.as_str() {
            "FEDFUNDS" | "TB3MS" | "FF" => TargetKind::LevelDifference,
            _ => TargetKind::LogGrowth,
        };
        TargetSpec::new(series, horizon, kind)
    }

    /// The same target at a different horizon.
    pub fn at_horizon(&self, horizon: usize) -> Result<Self> {
        TargetSpec::new(self.series.clone(), horizon, self.kind)
    }
}

/// Builds the annualized `h`-period target, aligned to the panel dates; the
/// first `h` observed periods are missing.
pub fn build_target(panel: &Panel, spec: &TargetSpec) -> Result<Vec<Option<f64>>> {
    if spec.horizon == 0 {
        return Err(Error::config("target horizon must be at least 1"));
    }
    let col = panel.column_by_name(&spec.series)?;
    let (start, s) = observed_suffix(&col, &spec.series)?;
    let h = spec.horizon;
    if s.len() <= h {
        return Err(Error::insufficient(
            format!("target `{}` at h={h}", spec.series),
            h + 1,
            s.len(),
        ));
    }
    let hf = h as f64;
    let values: Vec<f64> = match spec.kind {
        TargetKind::LogGrowth => {
            if let Some(k) = s.iter().position(|&v| v <= 0.0) {
                return Err(Error::Domain {
                    series: spec.series.clone(),
                    row: start + k,
                    message: format!("non-positive value {} under a log-growth target", s[k]),
                });
            }
            (h..s.len())
                .map(|t| 1200.0 / hf * (s[t] / s[t - h]).ln())
                .collect()
        }
        TargetKind::LevelDifference => (h..s.len())
            .map(|t| 12.0 / hf * (s[t] - s[t - h]))
            .collect(),
    };
    let mut out = vec![None; col.len()];
    for (slot, v) in out[start + h..].iter_mut().zip(values) {
        *slot = Some(v);
    }
    Ok(out)
}
