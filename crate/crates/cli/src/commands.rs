//! Subcommand implementations.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use tvboost::benchmarks::{Method, MethodSettings};
use tvboost::boost::{boost, BoostConfig};
use tvboost::evalharness::{
    housing_remap, metric_series, prepare_panel, relative_table, rl_msfe, run_expanding,
    write_series_csv, write_tables_csv, Cell, EvalWindow, ExpandingConfig, ForecastLog,
    NamedMethod, SeriesMetric, SeriesPoint, SeriesSettings, FREDMD_TARGETS,
};
use tvboost::kernel::{KernelSpec, Sidedness};
use tvboost::panel::{
    assemble_design, read_fredmd_csv, read_panel_csv, transform_panel, write_panel_csv, FredMd,
    YearMonth,
};
use tvboost::simlab::{monte_carlo, write_table, DgpSpec, VarianceBreak, DGP_COUNT};
use tvboost::tune::{cv_bandwidth_loo, cv_bandwidth_oos, BandwidthGrid, CvPoint, CvSpec, LooSpec};

use crate::args::{
    BreakReading, CvArgs, ForecastArgs, MetricArg, ReportArgs, SettingsArgs, Sided, SimArgs,
    TransformArgs,
};

/// Files a command read and wrote.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    list(s)
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| anyhow!(tvboost::Error::Config(format!("bad {what} `{t}`"))))
        })
        .collect()
}

fn date(s: &Option<String>) -> Result<Option<YearMonth>> {
    Ok(s.as_deref().map(YearMonth::parse).transpose()?)
}

pub fn apply_settings(mut s: MethodSettings, a: &SettingsArgs) -> Result<MethodSettings> {
    if let Some(nu) = a.nu {
        s.boost.nu = nu;
    }
    if let Some(m) = a.max_iter {
        s.boost.max_iter = m;
    }
    if let Some(stop) = &a.stop {
        s.boost.stopping = stop.parse()?;
    }
    if let Some(loss) = &a.loss {
        s.boost.loss = loss.parse()?;
    }
    if let Some(k) = &a.kernel {
        s.lc_kernel = k.parse()?;
        s.ll_kernel = s.lc_kernel;
    }
    if let Some(k) = &a.lc_kernel {
        s.lc_kernel = k.parse()?;
    }
    if let Some(k) = &a.ll_kernel {
        s.ll_kernel = k.parse()?;
    }
    if let Some(g) = &a.grid {
        s.grid = g.parse()?;
    }
    if let Some(w) = a.cv_window {
        s.cv_window = w;
    }
    if let Some(f) = a.rolling_fraction {
        s.rolling_fraction = f;
    }
    if let Some(k) = a.factors {
        s.factors = k;
    }
    if let Some(l) = a.factor_lags {
        s.factor_lags = l;
    }
    if let Some(k) = a.di_factors {
        s.di_factors = k;
    }
    s.validate()?;
    Ok(s)
}

pub fn sim(a: &SimArgs) -> Result<Outcome> {
    let ids: Vec<u8> = if a.dgp.trim() == "all" {
        (1..=DGP_COUNT).collect()
    } else {
        parse_list(&a.dgp, "DGP id")?
    };
    let innovation = a.innov.parse()?;
    let mut methods = Method::parse_list(&a.methods)?;
    if !methods.contains(&Method::Boost) {
        methods.insert(0, Method::Boost);
    }
    let settings = apply_settings(MethodSettings::simulation(), &a.settings)?;
    let mut results = Vec::new();
    for id in ids {
        let spec = DgpSpec {
            periods: a.periods,
            exogenous: a.predictors,
            variance_break: match a.variance_break {
                BreakReading::Variance => VarianceBreak::Variance,
                BreakReading::Sd => VarianceBreak::StdDev,
            },
            ..DgpSpec::new(id, innovation)?
        };
        spec.validate()?;
        let r = monte_carlo(&spec, &methods, a.reps, a.seed, &settings)?;
        let cells: Vec<String> = r
            .methods
            .iter()
            .zip(&r.relative)
            .map(|(m, v)| format!("{m} {v:.3}"))
            .collect();
        println!("dgp {id} {innovation}: {}", cells.join(", "));
        results.push(r);
    }
    let mut out = create(&a.out)?;
    write_table(&results, &mut out)?;
    out.flush()?;
    Ok(Outcome {
        inputs: vec![],
        outputs: vec![a.out.clone()],
        seed: Some(a.seed),
    })
}

/// Short target names mapped to FRED-MD mnemonics.
fn resolve_target(name: &str, data: &FredMd) -> String {
    if data.panel.column_index(name).is_ok() {
        return name.to_string();
    }
    let alias = match name {
        "IP" => "INDPRO",
        "CPI" => "CPIAUCSL",
        "FF" => "FEDFUNDS",
        "CLF" => "CLF16OV",
        "RPI" => "W875RX1",
        other => other,
    };
    alias.to_string()
}

pub fn forecast(a: &ForecastArgs) -> Result<Outcome> {
    let data = read_fredmd_csv(open(&a.data)?)?;
    let targets: Vec<String> = match &a.targets {
        Some(t) => list(t).iter().map(|n| resolve_target(n, &data)).collect(),
        None => FREDMD_TARGETS.iter().map(|s| s.to_string()).collect(),
    };
    let prepared = prepare_panel(&data, &targets, a.max_missing)?;
    let methods: Vec<NamedMethod> = match &a.methods {
        Some(m) => parse_list(m, "method")?,
        None => NamedMethod::plain(&Method::ALL),
    };
    let refs: Vec<&str> = targets.iter().map(String::as_str).collect();
    let mut config = ExpandingConfig::new(&refs, parse_list(&a.horizons, "horizon")?, methods)?;
    config.benchmark = a.benchmark.clone();
    config.oos_start = date(&a.oos_start)?;
    config.oos_end = date(&a.oos_end)?;
    config.initial_window = a.initial_window;
    config.lags = a.lags;
    config.settings = apply_settings(MethodSettings::empirical(), &a.settings)?;
    if !a.no_housing_remap {
        config.remap = housing_remap(prepared.data.panel.names());
    }
    let run = run_expanding(&prepared.data, &config)?;
    let mut out = create(&a.out)?;
    run.log.write_csv(&mut out)?;
    out.flush()?;
    let mut outputs = vec![a.out.clone()];
    if let Some(path) = &a.failures {
        let mut w = csv::Writer::from_writer(create(path)?);
        for f in &run.log.failures {
            w.serialize(f)?;
        }
        w.flush()?;
        outputs.push(path.clone());
    }
    println!(
        "{} forecasts, {} failed, {} designs audited, {} series dropped",
        run.log.records.len(),
        run.log.failures.len(),
        run.audited_designs,
        prepared.dropped.len()
    );
    Ok(Outcome {
        inputs: vec![a.data.clone()],
        outputs,
        seed: None,
    })
}

#[derive(Serialize)]
struct Selected {
    series: String,
    lag: usize,
    steps: usize,
}

#[derive(Serialize)]
struct CvSummary {
    response: String,
    horizon: usize,
    rows: usize,
    columns: usize,
    config: BoostConfig,
    bandwidth: f64,
    cv: Option<Vec<CvPoint>>,
    stop: usize,
    selected: Vec<Selected>,
    forecast_date: Option<YearMonth>,
    forecast: Option<f64>,
}

pub fn cv(a: &CvArgs) -> Result<Outcome> {
    let panel = read_panel_csv(open(&a.data)?)?;
    let response = panel.column_by_name(&a.response)?;
    let design = assemble_design(&panel, &response, a.horizon, a.lags, None)?;
    let sided = match a.sided {
        Sided::One => Sidedness::OneSidedPast,
        Sided::Two => Sidedness::TwoSided,
    };
    let config = BoostConfig {
        nu: a.nu,
        max_iter: a.max_iter,
        stopping: a.stop.parse()?,
        learner: a.learner.parse()?,
        loss: a.loss.parse()?,
        kernel: KernelSpec::new(a.kernel.parse()?, 1.0, sided)?,
        ..BoostConfig::default()
    };
    config.validate()?;
    let (bandwidth, table) = if a.bandwidth.trim() == "cv" {
        let grid: BandwidthGrid = a.grid.parse()?;
        let outcome = match a.sided {
            Sided::One => cv_bandwidth_oos(
                &design,
                &grid,
                &CvSpec::new(a.cv_window, a.horizon)?,
                &config,
            )?,
            Sided::Two => cv_bandwidth_loo(
                &design,
                &grid,
                &LooSpec {
                    target: design.n_rows() - 1,
                    global: false,
                },
                &config,
            )?,
        };
        (outcome.bandwidth, Some(outcome.table))
    } else {
        let b: f64 = a.bandwidth.parse().map_err(|_| {
            anyhow!(tvboost::Error::Config(format!(
                "bandwidth `{}` is neither a number nor `cv`",
                a.bandwidth
            )))
        })?;
        (b, None)
    };
    let config = config.with_bandwidth(bandwidth);
    let fit = boost(&design, 1.0, &config)?;
    let mut selected: Vec<Selected> = Vec::new();
    for s in &fit.steps[..fit.stop] {
        let origin = &design.columns()[s.column];
        match selected
            .iter_mut()
            .find(|x| x.series == origin.series && x.lag == origin.lag)
        {
            Some(x) => x.steps += 1,
            None => selected.push(Selected {
                series: origin.series.clone(),
                lag: origin.lag,
                steps: 1,
            }),
        }
    }
    let (forecast_date, forecast) = match design.forecast_row() {
        Some(row) => (Some(row.target_date), Some(fit.predict(&row.values)?)),
        None => (None, None),
    };
    let summary = CvSummary {
        response: a.response.clone(),
        horizon: a.horizon,
        rows: design.n_rows(),
        columns: design.n_cols(),
        config,
        bandwidth,
        cv: table,
        stop: fit.stop,
        selected,
        forecast_date,
        forecast,
    };
    let mut out = create(&a.out)?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    match (forecast_date, forecast) {
        (Some(d), Some(f)) => println!(
            "bandwidth {bandwidth}, {} steps, forecast for {d}: {f:.6}",
            fit.stop
        ),
        _ => println!("bandwidth {bandwidth}, {} steps", fit.stop),
    }
    Ok(Outcome {
        inputs: vec![a.data.clone()],
        outputs: vec![a.out.clone()],
        seed: None,
    })
}

fn write_relative(log: &ForecastLog, windows: &[EvalWindow], path: &Path) -> Result<()> {
    let tables: Vec<_> = windows.iter().map(|&w| relative_table(log, w)).collect();
    for t in &tables {
        println!("{}", t.render());
    }
    let mut out = create(path)?;
    write_tables_csv(&tables, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_points(points: &[SeriesPoint], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    write_series_csv(points, &mut out)?;
    out.flush()?;
    Ok(())
}

fn rl_points(
    log: &ForecastLog,
    pair: &Option<String>,
    settings: &SeriesSettings,
) -> Result<Vec<SeriesPoint>> {
    let Some(pair) = pair else {
        bail!(tvboost::Error::Config(
            "relative local MSFE needs --pair first,second".into()
        ));
    };
    let names = list(pair);
    let [first, second] = names.as_slice() else {
        bail!(tvboost::Error::Config(format!(
            "--pair needs two labels, got `{pair}`"
        )));
    };
    let mut out = Vec::new();
    for (target, h) in log.cells() {
        let series = rl_msfe(
            log,
            Cell::new(&target, h),
            first,
            second,
            settings.delta,
            settings.step,
        )?;
        out.extend(series.into_iter().map(|(date, value)| SeriesPoint {
            metric: "rl",
            target: target.clone(),
            horizon: h,
            method: format!("{first}/{second}"),
            date,
            value,
        }));
    }
    Ok(out)
}

pub fn report(a: &ReportArgs) -> Result<Outcome> {
    let log = ForecastLog::read_csv(open(&a.log)?, a.benchmark.clone())?;
    let windows: Vec<EvalWindow> = list(&a.window)
        .iter()
        .map(|w| w.parse())
        .collect::<tvboost::Result<_>>()?;
    let settings = SeriesSettings {
        delta: a.delta,
        rolling_window: a.rolling_window,
        step: 1,
        end: date(&a.end)?,
    };
    let series = |m: SeriesMetric| metric_series(&log, m, &settings);
    let mut outputs = Vec::new();
    match a.metric {
        MetricArg::Relmsfe => write_relative(&log, &windows, &a.out)?,
        MetricArg::Bystart => write_points(&series(SeriesMetric::ByStart), &a.out)?,
        MetricArg::Local => write_points(&series(SeriesMetric::Local), &a.out)?,
        MetricArg::Lbw => write_points(&series(SeriesMetric::LocalBandwidth), &a.out)?,
        MetricArg::Rl => write_points(&rl_points(&log, &a.pair, &settings)?, &a.out)?,
        MetricArg::All => {
            fs::create_dir_all(&a.out)
                .with_context(|| format!("cannot create {}", a.out.display()))?;
            let path = |name: &str| a.out.join(name);
            write_relative(&log, &windows, &path("relmsfe.csv"))?;
            write_points(&series(SeriesMetric::ByStart), &path("bystart.csv"))?;
            write_points(&series(SeriesMetric::Local), &path("local.csv"))?;
            write_points(&series(SeriesMetric::LocalBandwidth), &path("lbw.csv"))?;
            outputs.extend(["relmsfe.csv", "bystart.csv", "local.csv", "lbw.csv"].map(path));
            if a.pair.is_some() {
                write_points(&rl_points(&log, &a.pair, &settings)?, &path("rl.csv"))?;
                outputs.push(path("rl.csv"));
            }
        }
    }
    if outputs.is_empty() {
        outputs.push(a.out.clone());
    }
    Ok(Outcome {
        inputs: vec![a.log.clone()],
        outputs,
        seed: None,
    })
}

pub fn transform(a: &TransformArgs) -> Result<Outcome> {
    let mut data = read_fredmd_csv(open(&a.data)?)?;
    if a.clean {
        let targets = a.targets.as_deref().map(list).unwrap_or_default();
        let prepared = prepare_panel(&data, &targets, a.max_missing)?;
        if !prepared.dropped.is_empty() {
            println!("dropped: {}", prepared.dropped.join(","));
        }
        data = prepared.data;
    }
    let remap = if a.no_housing_remap {
        HashMap::new()
    } else {
        housing_remap(data.panel.names())
    };
    let transformed = transform_panel(&data.panel, &data.codes, &remap)?;
    let mut out = create(&a.out)?;
    write_panel_csv(&transformed, &mut out)?;
    out.flush()?;
    Ok(Outcome {
        inputs: vec![a.data.clone()],
        outputs: vec![a.out.clone()],
        seed: None,
    })
}
