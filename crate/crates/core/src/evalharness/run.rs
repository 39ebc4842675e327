//! Expanding-window pseudo-real-time forecasting.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::log::{ForecastFailure, ForecastLog, ForecastRecord};
use crate::benchmarks::{
    column_moments, forecast, pca_factors, Inputs, Method, MethodSettings, Problem,
};
use crate::error::{Error, Result};
use crate::panel::{
    assemble_design, assemble_target_design, build_target, transform_panel, Design, ExtraColumns,
    FredMd, Panel, TargetSpec, TransformCode, YearMonth,
};

pub const DEFAULT_INITIAL_WINDOW: usize = 120;
pub const DEFAULT_LAGS: usize = 3;
/// Series missing more than this fraction of rows are dropped.
pub const DEFAULT_MAX_MISSING: f64 = 0.05;

/// A method under a report label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedMethod {
    pub label: String,
    pub method: Method,
}

impl NamedMethod {
    pub fn new(label: impl Into<String>, method: Method) -> Self {
        NamedMethod {
            label: label.into(),
            method,
        }
    }

    /// Labels every method with its own name.
    pub fn plain(methods: &[Method]) -> Vec<NamedMethod> {
        methods
            .iter()
            .map(|&m| NamedMethod::new(m.name(), m))
            .collect()
    }
}

impl FromStr for NamedMethod {
    type Err = Error;

    /// `method` or `label=method`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('=') {
            Some((label, m)) if !label.trim().is_empty() => {
                Ok(NamedMethod::new(label.trim(), m.trim().parse()?))
            }
            Some(_) => Err(Error::config(format!("empty method label in `{s}`"))),
            None => {
                let m: Method = s.trim().parse()?;
                Ok(NamedMethod::new(m.name(), m))
            }
        }
    }
}

impl fmt::Display for NamedMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.label == self.method.name() {
            write!(f, "{}", self.label)
        } else {
            write!(f, "{}={}", self.label, self.method.name())
        }
    }
}

/// Housing starts and permits enter as log differences.
pub fn housing_remap(names: &[String]) -> HashMap<String, TransformCode> {
    let code = TransformCode::new(5).expect("valid code");
    names
        .iter()
        .filter(|n| n.starts_with("HOUST") || n.starts_with("PERMIT"))
        .map(|n| (n.clone(), code))
        .collect()
}

/// Prepared data and the series removed while cleaning it.
#[derive(Debug, Clone)]
pub struct PreparedPanel {
    pub data: FredMd,
    pub dropped: Vec<String>,
}

/// Drops sparse or gappy predictors and trims the ragged edge.
///
/// A predictor is dropped when more than `max_missing` of its rows are
/// missing or when a gap follows its first observation. Targets are never
/// dropped; a gap in a target is an error.
pub fn prepare_panel(data: &FredMd, targets: &[String], max_missing: f64) -> Result<PreparedPanel> {
    if !(0.0..=1.0).contains(&max_missing) {
        return Err(Error::config("missing-value fraction must lie in [0, 1]"));
    }
    for t in targets {
        data.panel.column_index(t)?;
    }
    let panel = &data.panel;
    let rows = panel.n_periods();
    let sparse: Vec<bool> = (0..panel.n_series())
        .map(|j| {
            let miss = (0..rows).filter(|&i| panel.is_missing(i, j)).count();
            miss as f64 > max_missing * rows as f64
        })
        .collect();
    let keep_sparse: Vec<usize> = (0..panel.n_series())
        .filter(|&j| !sparse[j] || targets.contains(&panel.names()[j]))
        .collect();
    let names: Vec<&str> = keep_sparse
        .iter()
        .map(|&j| panel.names()[j].as_str())
        .collect();
    let trimmed = panel.select(&names)?.trim_ragged_edge()?;
    let mut keep = Vec::new();
    let mut codes = Vec::new();
    for (k, &j) in keep_sparse.iter().enumerate() {
        let name = &panel.names()[j];
        let col = trimmed.column(k);
        let first = col.iter().position(Option::is_some);
        let gappy = match first {
            Some(f) => col[f..].iter().any(Option::is_none),
            None => true,
        };
        if gappy {
            if targets.contains(name) {
                return Err(Error::InvalidPanel(format!("target `{name}` has gaps")));
            }
            continue;
        }
        keep.push(name.as_str());
        codes.push(data.codes[j]);
    }
    let dropped: Vec<String> = panel
        .names()
        .iter()
        .filter(|n| !keep.contains(&n.as_str()))
        .cloned()
        .collect();
    if !dropped.is_empty() {
        log::warn!(
            "dropped {} series with missing values: {}",
            dropped.len(),
            dropped.join(",")
        );
    }
    Ok(PreparedPanel {
        data: FredMd {
            panel: trimmed.select(&keep)?,
            codes,
        },
        dropped,
    })
}

/// Settings of an expanding-window run.
#[derive(Debug, Clone)]
pub struct ExpandingConfig {
    pub targets: Vec<TargetSpec>,
    pub horizons: Vec<usize>,
    pub methods: Vec<NamedMethod>,
    /// Label of the relative-metric denominator.
    pub benchmark: String,
    /// First forecast date; by default the first date whose origin has
    /// `initial_window` periods of history.
    pub oos_start: Option<YearMonth>,
    pub oos_end: Option<YearMonth>,
    pub initial_window: usize,
    pub lags: usize,
    pub settings: MethodSettings,
    pub remap: HashMap<String, TransformCode>,
}

impl ExpandingConfig {
    /// Conventional targets, empirical method settings and the AR benchmark.
    pub fn new(targets: &[&str], horizons: Vec<usize>, methods: Vec<NamedMethod>) -> Result<Self> {
        let targets = targets
            .iter()
            .map(|t| TargetSpec::conventional(*t, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpandingConfig {
            targets,
            horizons,
            methods,
            benchmark: Method::Ar.name().to_string(),
            oos_start: None,
            oos_end: None,
            initial_window: DEFAULT_INITIAL_WINDOW,
            lags: DEFAULT_LAGS,
            settings: MethodSettings::empirical(),
            remap: HashMap::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() || self.horizons.is_empty() || self.methods.is_empty() {
            return Err(Error::config(
                "need at least one target, horizon and method",
            ));
        }
        if self.horizons.contains(&0) {
            return Err(Error::config("horizons must be at least 1"));
        }
        if self.initial_window < 2 {
            return Err(Error::config("initial window must be at least 2 periods"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::config(format!(
                    "duplicate method label `{}`",
                    m.label
                )));
            }
        }
        if !self.methods.iter().any(|m| m.label == self.benchmark) {
            return Err(Error::config(format!(
                "benchmark `{}` is not among the methods",
                self.benchmark
            )));
        }
        if let (Some(a), Some(b)) = (self.oos_start, self.oos_end) {
            if a > b {
                return Err(Error::config(format!(
                    "out-of-sample start {a} is after end {b}"
                )));
            }
        }
        self.settings.validate()
    }
}

struct Task<'a> {
    target: &'a TargetSpec,
    horizon: usize,
    date: YearMonth,
    origin: YearMonth,
    actual: f64,
}

/// Forecast dates of one target and horizon.
fn forecast_dates(
    panel: &Panel,
    config: &ExpandingConfig,
    horizon: usize,
) -> Result<Vec<YearMonth>> {
    let dates = panel.dates();
    let step = panel.step();
    let first = match config.oos_start {
        Some(d) => d,
        None => {
            let idx = config.initial_window - 1 + horizon;
            *dates
                .get(idx)
                .ok_or_else(|| Error::insufficient("expanding window", idx + 1, dates.len()))?
        }
    };
    if panel
        .row_of(first.offset(-(horizon as i64) * step))
        .is_none()
    {
        return Err(Error::InvalidPanel(format!(
            "forecast origin for {first} at h={horizon} is outside the panel"
        )));
    }
    let last = config.oos_end.unwrap_or(dates[dates.len() - 1]);
    Ok(dates
        .iter()
        .copied()
        .filter(|d| *d >= first && *d <= last)
        .collect())
}

/// Factor design: own one-period target lags plus `k` principal components
/// of the other transformed series, each extracted from data through the
/// origin only.
fn factor_design(
    raw: &Panel,
    transformed: &Panel,
    target: &TargetSpec,
    lags: usize,
    k: usize,
    factor_lags: usize,
) -> Result<Design> {
    let others = transformed.without(&target.series)?;
    let r0 = others
        .first_complete_row()
        .ok_or_else(|| Error::insufficient("factor extraction", 1, 0))?;
    let rows = others.n_periods() - r0;
    let x = others.values().rows(r0, rows).into_owned();
    let (means, sds) = column_moments(&x);
    let xs = DMatrix::from_fn(rows, x.ncols(), |i, j| (x[(i, j)] - means[j]) / sds[j]);
    let fs = pca_factors(&xs, k.min(rows).min(x.ncols()))?;
    let names: Vec<String> = (1..=fs.k()).map(|j| format!("F{j}")).collect();
    let cols: Vec<Vec<Option<f64>>> = (0..fs.k())
        .map(|j| {
            (0..others.n_periods())
                .map(|i| (i >= r0).then(|| fs.scores[(i - r0, j)]))
                .collect()
        })
        .collect();
    let factors = Panel::from_columns(others.dates().to_vec(), names, cols)?;
    let response = build_target(raw, target)?;
    let own = build_target(raw, &target.at_horizon(1)?)?;
    let predictors =
        Panel::from_columns(raw.dates().to_vec(), vec![target.series.clone()], vec![own])?;
    assemble_design(
        &predictors,
        &response,
        target.horizon,
        lags,
        Some(ExtraColumns {
            panel: &factors,
            lags: factor_lags,
        }),
    )
}

/// Verifies that a design built at `origin` reads nothing later and
/// forecasts `date`.
fn audit(design: &Design, origin: YearMonth, date: YearMonth) -> Result<()> {
    design.check_no_lookahead(Some(origin))?;
    let row = design.forecast_row().ok_or_else(|| {
        Error::Lookahead(format!("design at origin {origin} has no forecast row"))
    })?;
    if row.target_date != date || row.regressor_date != origin {
        return Err(Error::Lookahead(format!(
            "forecast row dated {} from {} does not match {date} from origin {origin}",
            row.target_date, row.regressor_date
        )));
    }
    Ok(())
}

type TaskOutput = (Vec<ForecastRecord>, Vec<ForecastFailure>, usize);

fn run_task(data: &FredMd, config: &ExpandingConfig, task: &Task<'_>) -> Result<TaskOutput> {
    let raw = data.panel.truncate_through(task.origin)?;
    if raw.dates().last() != Some(&task.origin) {
        return Err(Error::Lookahead(format!(
            "origin {} is not the last available date",
            task.origin
        )));
    }
    let spec = task.target.at_horizon(task.horizon)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut audits = 0;
    let fail = |label: &str, e: &Error, failures: &mut Vec<ForecastFailure>| {
        log::warn!(
            "{} h={} {} at {}: {e}",
            spec.series,
            task.horizon,
            label,
            task.date
        );
        failures.push(ForecastFailure {
            target: spec.series.clone(),
            horizon: task.horizon,
            method: label.to_string(),
            date: task.date,
            message: e.to_string(),
        });
    };
    let transformed = match transform_panel(&raw, &data.codes, &config.remap) {
        Ok(p) => p,
        Err(e) => {
            for m in &config.methods {
                fail(&m.label, &e, &mut failures);
            }
            return Ok((records, failures, audits));
        }
    };
    let mut designs: HashMap<Inputs, std::result::Result<Design, String>> = HashMap::new();
    for m in &config.methods {
        let inputs = m.method.inputs(&config.settings);
        if let Entry::Vacant(slot) = designs.entry(inputs) {
            let built = match inputs {
                Inputs::Full => {
                    assemble_target_design(&raw, &transformed, &spec, config.lags, None)
                }
                Inputs::Factors { k, lags } => {
                    factor_design(&raw, &transformed, &spec, config.lags, k, lags)
                }
            };
            let built = match built {
                Ok(d) => {
                    audit(&d, task.origin, task.date)?;
                    audits += 1;
                    Ok(d)
                }
                Err(e) => Err(e.to_string()),
            };
            slot.insert(built);
        }
        let design = match &designs[&inputs] {
            Ok(d) => d,
            Err(msg) => {
                fail(&m.label, &Error::config(msg.clone()), &mut failures);
                continue;
            }
        };
        let x_new = design.forecast_row().expect("audited").values.clone();
        let own = design.columns_of(&spec.series);
        let out = Problem::new(design.clone(), x_new, own)
            .and_then(|p| forecast(m.method, &p, &config.settings));
        match out {
            Ok(f) => records.push(ForecastRecord {
                target: spec.series.clone(),
                horizon: task.horizon,
                method: m.label.clone(),
                date: task.date,
                origin: task.origin,
                prediction: f.prediction,
                actual: task.actual,
                bandwidth: f.bandwidth,
                stop: f.stop,
                sample: design.n_rows(),
            }),
            Err(e) => fail(&m.label, &e, &mut failures),
        }
    }
    Ok((records, failures, audits))
}

/// Output of [`run_expanding`].
#[derive(Debug, Clone)]
pub struct ExpandingRun {
    pub log: ForecastLog,
    /// Designs that passed the no-look-ahead audit.
    pub audited_designs: usize,
}

/// Runs every method over an expanding window, refitting at each origin with
/// data through that origin only.
pub fn run_expanding(data: &FredMd, config: &ExpandingConfig) -> Result<ExpandingRun> {
    config.validate()?;
    let panel = &data.panel;
    let step = panel.step();
    let mut tasks = Vec::new();
    for target in &config.targets {
        for &h in &config.horizons {
            let spec = target.at_horizon(h)?;
            let actual = build_target(panel, &spec)?;
            for date in forecast_dates(panel, config, h)? {
                let row = panel.row_of(date).expect("date from the panel");
                let Some(actual) = actual[row] else {
                    return Err(Error::InvalidPanel(format!(
                        "no actual for {} at h={h} on {date}",
                        spec.series
                    )));
                };
                tasks.push(Task {
                    target,
                    horizon: h,
                    date,
                    origin: date.offset(-(h as i64) * step),
                    actual,
                });
            }
        }
    }
    if tasks.is_empty() {
        return Err(Error::insufficient("out-of-sample period", 1, 0));
    }
    let outputs = crate::par::map(&tasks, |t| run_task(data, config, t));
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut audited = 0;
    for out in outputs {
        let (r, f, a) = out?;
        records.extend(r);
        failures.extend(f);
        audited += a;
    }
    let mut log = ForecastLog::new(config.benchmark.clone(), records)?;
    log.failures = failures;
    Ok(ExpandingRun {
        log,
        audited_designs: audited,
    })
}
