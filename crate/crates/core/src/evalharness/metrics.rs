//! Relative forecast-accuracy metrics over a forecast log.
//!
//! Every ratio pairs a method with the benchmark date by date; dates where
//! either lacks a record are skipped in both numerator and denominator.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::log::ForecastLog;
use crate::error::{Error, Result};
use crate::panel::YearMonth;
use crate::stats::pairwise_sum;

/// Half-width of the local windows, in periods.
pub const DEFAULT_DELTA: usize = 70;
/// Length of the fixed rolling window compared against local bandwidths.
pub const DEFAULT_ROLLING_WINDOW: usize = 120;

/// Evaluation period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalWindow {
    Full,
    PreGm,
    Gm,
    PostGm,
    Range(YearMonth, YearMonth),
}

fn ym(y: i32, m: u32) -> YearMonth {
    YearMonth::new(y, m).expect("valid preset date")
}

impl EvalWindow {
    pub const SUBPERIODS: [EvalWindow; 4] = [
        EvalWindow::Full,
        EvalWindow::PreGm,
        EvalWindow::Gm,
        EvalWindow::PostGm,
    ];

    pub fn range(start: YearMonth, end: YearMonth) -> Result<Self> {
        if start > end {
            return Err(Error::config(format!(
                "window start {start} is after its end {end}"
            )));
        }
        Ok(EvalWindow::Range(start, end))
    }

    /// Inclusive bounds; `None` for the full log.
    pub fn bounds(self) -> Option<(YearMonth, YearMonth)> {
        match self {
            EvalWindow::Full => None,
            EvalWindow::PreGm => Some((ym(1971, 9), ym(1982, 12))),
            EvalWindow::Gm => Some((ym(1983, 1), ym(2006, 12))),
            EvalWindow::PostGm => Some((ym(2007, 1), ym(2018, 8))),
            EvalWindow::Range(a, b) => Some((a, b)),
        }
    }

    pub fn contains(self, date: YearMonth) -> bool {
        self.bounds().is_none_or(|(a, b)| date >= a && date <= b)
    }
}

impl fmt::Display for EvalWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalWindow::Full => write!(f, "full"),
            EvalWindow::PreGm => write!(f, "pre-gm"),
            EvalWindow::Gm => write!(f, "gm"),
            EvalWindow::PostGm => write!(f, "post-gm"),
            EvalWindow::Range(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

impl FromStr for EvalWindow {
    type Err = Error;

    /// `full`, `pre-gm`, `gm`, `post-gm`, `YYYY-MM:YYYY-MM` or
    /// `YYYY:MM:YYYY:MM`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => return Ok(EvalWindow::Full),
            "pre-gm" => return Ok(EvalWindow::PreGm),
            "gm" => return Ok(EvalWindow::Gm),
            "post-gm" => return Ok(EvalWindow::PostGm),
            _ => {}
        }
        let parts: Vec<&str> = s.trim().split(':').collect();
        let (a, b) = match parts.as_slice() {
            [a, b] => (YearMonth::parse(a)?, YearMonth::parse(b)?),
            [y1, m1, y2, m2] => (
                YearMonth::parse(&format!("{y1}:{m1}"))?,
                YearMonth::parse(&format!("{y2}:{m2}"))?,
            ),
            _ => return Err(Error::config(format!("unrecognized window `{s}`"))),
        };
        EvalWindow::range(a, b)
    }
}

/// One forecast cell: a target at a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell<'a> {
    pub target: &'a str,
    pub horizon: usize,
}

impl<'a> Cell<'a> {
    pub fn new(target: &'a str, horizon: usize) -> Self {
        Cell { target, horizon }
    }
}

/// Squared errors of `method` and `other` on dates where both have records.
pub fn paired_squared_errors(
    log: &ForecastLog,
    cell: Cell<'_>,
    method: &str,
    other: &str,
) -> Vec<(YearMonth, f64, f64)> {
    let theirs: BTreeMap<YearMonth, f64> = log
        .series(cell.target, cell.horizon, other)
        .into_iter()
        .map(|r| (r.date, r.error().powi(2)))
        .collect();
    log.series(cell.target, cell.horizon, method)
        .into_iter()
        .filter_map(|r| theirs.get(&r.date).map(|&o| (r.date, r.error().powi(2), o)))
        .collect()
}

/// Numerator and denominator sums of squared errors over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsePair {
    pub method: f64,
    pub benchmark: f64,
    pub count: usize,
}

impl SsePair {
    pub fn ratio(&self, what: &str) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::insufficient(what.to_string(), 1, 0));
        }
        if self.benchmark == 0.0 {
            return Err(Error::UndefinedRatio(format!(
                "{what}: benchmark SSE is zero"
            )));
        }
        Ok(self.method / self.benchmark)
    }
}

fn benchmark_present(log: &ForecastLog, cell: Cell<'_>) -> Result<()> {
    if log
        .series(cell.target, cell.horizon, &log.benchmark)
        .is_empty()
    {
        return Err(Error::config(format!(
            "benchmark `{}` has no records for {} at h={}",
            log.benchmark, cell.target, cell.horizon
        )));
    }
    Ok(())
}

pub fn sse_pair(log: &ForecastLog, cell: Cell<'_>, method: &str, window: EvalWindow) -> SsePair {
    let pairs: Vec<_> = paired_squared_errors(log, cell, method, &log.benchmark)
        .into_iter()
        .filter(|(d, _, _)| window.contains(*d))
        .collect();
    SsePair {
        method: pairwise_sum(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()),
        benchmark: pairwise_sum(&pairs.iter().map(|p| p.2).collect::<Vec<_>>()),
        count: pairs.len(),
    }
}

/// MSFE of `method` relative to the benchmark over `window`.
pub fn relative_msfe(
    log: &ForecastLog,
    cell: Cell<'_>,
    method: &str,
    window: EvalWindow,
) -> Result<f64> {
    benchmark_present(log, cell)?;
    sse_pair(log, cell, method, window).ratio(&format!("relative MSFE of {method} over {window}"))
}

/// Relative MSFE over `[t1, end]` for every paired date `t1`; `end`
/// defaults to the last paired date.
pub fn msfe_by_start_date(
    log: &ForecastLog,
    cell: Cell<'_>,
    method: &str,
    end: Option<YearMonth>,
) -> Result<Vec<(YearMonth, f64)>> {
    benchmark_present(log, cell)?;
    let pairs: Vec<_> = paired_squared_errors(log, cell, method, &log.benchmark)
        .into_iter()
        .filter(|(d, _, _)| end.is_none_or(|e| *d <= e))
        .collect();
    (0..pairs.len())
        .map(|k| {
            let tail = &pairs[k..];
            let pair = SsePair {
                method: pairwise_sum(&tail.iter().map(|p| p.1).collect::<Vec<_>>()),
                benchmark: pairwise_sum(&tail.iter().map(|p| p.2).collect::<Vec<_>>()),
                count: tail.len(),
            };
            Ok((
                pairs[k].0,
                pair.ratio(&format!("MSFE of {method} from {}", pairs[k].0))?,
            ))
        })
        .collect()
}

fn check_delta(delta: usize) -> Result<()> {
    if delta == 0 {
        return Err(Error::config("local window half-width must be at least 1"));
    }
    Ok(())
}

/// Centered local relative MSFE: squared errors dated within `delta`
/// periods of each paired date.
pub fn local_msfe(
    log: &ForecastLog,
    cell: Cell<'_>,
    method: &str,
    delta: usize,
    step: i64,
) -> Result<Vec<(YearMonth, f64)>> {
    check_delta(delta)?;
    benchmark_present(log, cell)?;
    let pairs = paired_squared_errors(log, cell, method, &log.benchmark);
    let reach = delta as i64 * step;
    pairs
        .iter()
        .map(|&(t0, _, _)| {
            let near: Vec<_> = pairs
                .iter()
                .filter(|p| p.0.months_since(t0).abs() <= reach)
                .collect();
            let pair = SsePair {
                method: pairwise_sum(&near.iter().map(|p| p.1).collect::<Vec<_>>()),
                benchmark: pairwise_sum(&near.iter().map(|p| p.2).collect::<Vec<_>>()),
                count: near.len(),
            };
            Ok((t0, pair.ratio(&format!("local MSFE of {method} at {t0}"))?))
        })
        .collect()
}

/// Pointwise ratio of the local MSFE of `first` to that of `second`.
pub fn rl_msfe(
    log: &ForecastLog,
    cell: Cell<'_>,
    first: &str,
    second: &str,
    delta: usize,
    step: i64,
) -> Result<Vec<(YearMonth, f64)>> {
    let a = local_msfe(log, cell, first, delta, step)?;
    let b: BTreeMap<YearMonth, f64> = local_msfe(log, cell, second, delta, step)?
        .into_iter()
        .collect();
    a.into_iter()
        .filter_map(|(d, v)| b.get(&d).map(|&w| (d, v, w)))
        .map(|(d, v, w)| {
            if w == 0.0 {
                Err(Error::UndefinedRatio(format!(
                    "local MSFE of {second} is zero at {d}"
                )))
            } else {
                Ok((d, v / w))
            }
        })
        .collect()
}

/// Centered rolling mean of the selected bandwidth, averaging the records
/// present within `delta` periods. A method without bandwidths is ≡ 1.
pub fn local_bandwidth(
    log: &ForecastLog,
    cell: Cell<'_>,
    method: &str,
    delta: usize,
    step: i64,
) -> Result<Vec<(YearMonth, f64)>> {
    check_delta(delta)?;
    let series = log.series(cell.target, cell.horizon, method);
    if series.is_empty() {
        return Err(Error::config(format!(
            "no records for {method} on {} at h={}",
            cell.target, cell.horizon
        )));
    }
    if series.iter().all(|r| r.bandwidth.is_none()) {
        return Ok(series.iter().map(|r| (r.date, 1.0)).collect());
    }
    let reach = delta as i64 * step;
    series
        .iter()
        .map(|r| {
            let near: Vec<f64> = series
                .iter()
                .filter(|s| s.date.months_since(r.date).abs() <= reach)
                .filter_map(|s| s.bandwidth)
                .collect();
            if near.is_empty() {
                return Err(Error::insufficient(
                    format!("local bandwidth at {}", r.date),
                    1,
                    0,
                ));
            }
            Ok((r.date, pairwise_sum(&near) / near.len() as f64))
        })
        .collect()
}

/// Bandwidth implied by a fixed rolling window of `window` rows: its share
/// of the sample available at each benchmark forecast.
pub fn rolling_bandwidth(
    log: &ForecastLog,
    cell: Cell<'_>,
    window: usize,
) -> Result<Vec<(YearMonth, f64)>> {
    benchmark_present(log, cell)?;
    Ok(log
        .series(cell.target, cell.horizon, &log.benchmark)
        .into_iter()
        .map(|r| (r.date, (window as f64 / r.sample as f64).min(1.0)))
        .collect())
}

/// Relative MSFE of every method for every cell over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeTable {
    pub window: EvalWindow,
    pub methods: Vec<String>,
    /// `(target, horizon, values)`; `None` where undefined.
    pub rows: Vec<(String, usize, Vec<Option<f64>>)>,
}

pub fn relative_table(log: &ForecastLog, window: EvalWindow) -> RelativeTable {
    let methods = log.methods();
    let rows = log
        .cells()
        .into_iter()
        .map(|(target, h)| {
            let values = methods
                .iter()
                .map(|m| relative_msfe(log, Cell::new(&target, h), m, window).ok())
                .collect();
            (target, h, values)
        })
        .collect();
    RelativeTable {
        window,
        methods,
        rows,
    }
}

impl RelativeTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_tables_csv(std::slice::from_ref(self), out)
    }

    /// Plain-text table with aligned columns.
    pub fn render(&self) -> String {
        let mut cells: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["target".to_string(), "h".into()];
        header.extend(self.methods.iter().cloned());
        cells.push(header);
        for (target, h, values) in &self.rows {
            let mut row = vec![target.clone(), h.to_string()];
            row.extend(
                values
                    .iter()
                    .map(|v| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())),
            );
            cells.push(row);
        }
        let widths: Vec<usize> = (0..cells[0].len())
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("Relative MSFE ({})\n", self.window);
        for row in &cells {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if j == 0 {
                        format!("{c:<w$}", w = widths[j])
                    } else {
                        format!("{c:>w$}", w = widths[j])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Writes tables for several windows under one header; the tables must
/// share their method columns.
pub fn write_tables_csv<W: Write>(tables: &[RelativeTable], out: W) -> Result<()> {
    let Some(first) = tables.first() else {
        return Ok(());
    };
    if tables.iter().any(|t| t.methods != first.methods) {
        return Err(Error::config("tables have different method columns"));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["window".to_string(), "target".into(), "horizon".into()];
    header.extend(first.methods.iter().cloned());
    w.write_record(&header)?;
    for t in tables {
        for (target, h, values) in &t.rows {
            let mut rec = vec![t.window.to_string(), target.clone(), h.to_string()];
            rec.extend(
                values
                    .iter()
                    .map(|v| v.map(|x| format!("{x:.6}")).unwrap_or_default()),
            );
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Metric series kinds in the long-format output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMetric {
    ByStart,
    Local,
    LocalBandwidth,
}

impl SeriesMetric {
    pub const ALL: [SeriesMetric; 3] = [
        SeriesMetric::ByStart,
        SeriesMetric::Local,
        SeriesMetric::LocalBandwidth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesMetric::ByStart => "bystart",
            SeriesMetric::Local => "local",
            SeriesMetric::LocalBandwidth => "lbw",
        }
    }
}

/// One point of a metric series.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SeriesPoint {
    pub metric: &'static str,
    pub target: String,
    pub horizon: usize,
    pub method: String,
    pub date: YearMonth,
    pub value: f64,
}

/// Settings of the metric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSettings {
    pub delta: usize,
    pub rolling_window: usize,
    /// Months between log dates.
    pub step: i64,
    pub end: Option<YearMonth>,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        SeriesSettings {
            delta: DEFAULT_DELTA,
            rolling_window: DEFAULT_ROLLING_WINDOW,
            step: 1,
            end: None,
        }
    }
}

/// Metric series for every cell and method. Local bandwidths include a
/// `rolling-<window>` companion per cell. Undefined series are skipped with
/// a warning.
pub fn metric_series(
    log: &ForecastLog,
    metric: SeriesMetric,
    settings: &SeriesSettings,
) -> Vec<SeriesPoint> {
    let mut out = Vec::new();
    for (target, h) in log.cells() {
        let cell = Cell::new(&target, h);
        let mut push = |method: &str, series: Result<Vec<(YearMonth, f64)>>| match series {
            Ok(s) => out.extend(s.into_iter().map(|(date, value)| SeriesPoint {
                metric: metric.name(),
                target: target.clone(),
                horizon: h,
                method: method.to_string(),
                date,
                value,
            })),
            Err(e) => log::warn!("{} for {method} on {target} h={h}: {e}", metric.name()),
        };
        for m in log.methods() {
            let s = match metric {
                SeriesMetric::ByStart => msfe_by_start_date(log, cell, &m, settings.end),
                SeriesMetric::Local => local_msfe(log, cell, &m, settings.delta, settings.step),
                SeriesMetric::LocalBandwidth => {
                    local_bandwidth(log, cell, &m, settings.delta, settings.step)
                }
            };
            push(&m, s);
        }
        if metric == SeriesMetric::LocalBandwidth {
            let label = format!("rolling-{}", settings.rolling_window);
            push(
                &label,
                rolling_bandwidth(log, cell, settings.rolling_window),
            );
        }
    }
    out
}

pub fn write_series_csv<W: Write>(points: &[SeriesPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
