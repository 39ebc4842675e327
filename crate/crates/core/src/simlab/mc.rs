//! Monte Carlo comparison of forecasting methods on the simulation designs.

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dgp::{simulate, DgpSpec, Sample};
use crate::benchmarks::{forecast, Method, MethodSettings, Problem};
use crate::error::{Error, Result};
use crate::panel::Design;
use crate::par;
use crate::stats::pairwise_sum;

/// Number of lags of `Y` and of each `z_j` among the candidate predictors.
pub const SIM_LAGS: usize = 3;

/// Share of excluded replications above which a warning is logged.
const EXCLUSION_WARNING: f64 = 0.01;

/// Generator for replication `rep`: the master seed picks the key and the
/// replication index picks the stream, so draws do not depend on the order
/// in which replications run.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Forecasting problem for the last observation of a sample, and its
/// realized value. Row `i` of the design holds `Y_t` for `t = i + 4` with
/// regressors `(Y_{t-1}, Y_{t-2}, Y_{t-3}, z_{1,t-1}, ..., z_{d,t-3})`; the
/// last row is held out.
pub fn forecast_problem(sample: &Sample) -> Result<(Problem, f64)> {
    let (n, d) = sample.z.shape();
    if n < SIM_LAGS + 3 {
        return Err(Error::insufficient("simulation design", SIM_LAGS + 3, n));
    }
    let rows = n - SIM_LAGS;
    let q = SIM_LAGS * (d + 1);
    let value = |series: usize, period: usize| {
        if series == 0 {
            sample.y[period]
        } else {
            sample.z[(period, series - 1)]
        }
    };
    // Row i: response index i + 3, regressors at indices i + 2, i + 1, i.
    let x = DMatrix::from_fn(rows, q, |i, c| {
        value(c / SIM_LAGS, i + SIM_LAGS - 1 - c % SIM_LAGS)
    });
    let y: Vec<f64> = (0..rows).map(|i| sample.y[i + SIM_LAGS]).collect();
    let train = rows - 1;
    let design = Design::from_parts(x.rows(0, train).into_owned(), y[..train].to_vec())?;
    let x_new = x.row(train).iter().copied().collect();
    let problem = Problem::new(design, x_new, (0..SIM_LAGS).collect())?;
    Ok((problem, y[train]))
}

/// Forecast errors and selected bandwidths of one replication, or the
/// reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: usize,
    pub errors: Vec<Option<f64>>,
    pub bandwidths: Vec<Option<f64>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub spec: DgpSpec,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub reps: usize,
    /// Replications dropped for every method because some method failed.
    pub excluded: Vec<usize>,
    /// Per-method sums of squared errors over the retained replications.
    pub sse: Vec<f64>,
    pub msfe: Vec<f64>,
    /// MSFE relative to the time-invariant boost.
    pub relative: Vec<f64>,
    pub records: Vec<RepRecord>,
}

impl McResult {
    pub fn relative_of(&self, method: Method) -> Option<f64> {
        self.methods
            .iter()
            .position(|&m| m == method)
            .map(|i| self.relative[i])
    }

    /// Bandwidths chosen by `method` over the retained replications.
    pub fn bandwidths_of(&self, method: Method) -> Vec<f64> {
        let Some(i) = self.methods.iter().position(|&m| m == method) else {
            return vec![];
        };
        self.records
            .iter()
            .filter(|r| r.failure.is_none())
            .filter_map(|r| r.bandwidths[i])
            .collect()
    }
}

fn run_rep(
    spec: &DgpSpec,
    methods: &[Method],
    settings: &MethodSettings,
    seed: u64,
    rep: usize,
) -> RepRecord {
    let mut record = RepRecord {
        rep,
        errors: vec![None; methods.len()],
        bandwidths: vec![None; methods.len()],
        failure: None,
    };
    let mut rng = replication_rng(seed, rep as u64);
    let setup = simulate(spec, &mut rng).and_then(|s| forecast_problem(&s));
    let (problem, actual) = match setup {
        Ok(p) => p,
        Err(e) => {
            record.failure = Some(e.to_string());
            return record;
        }
    };
    for (k, &m) in methods.iter().enumerate() {
        match forecast(m, &problem, settings) {
            Ok(f) => {
                record.errors[k] = Some(actual - f.prediction);
                record.bandwidths[k] = f.bandwidth;
            }
            Err(e) => {
                record.failure = Some(format!("{m}: {e}"));
                return record;
            }
        }
    }
    record
}

/// Runs `reps` replications of `spec`, forecasting the last observation of
/// each sample with every method. `methods` must include the time-invariant
/// boost, the denominator of the relative MSFEs.
pub fn monte_carlo(
    spec: &DgpSpec,
    methods: &[Method],
    reps: usize,
    seed: u64,
    settings: &MethodSettings,
) -> Result<McResult> {
    spec.validate()?;
    settings.validate()?;
    if reps == 0 {
        return Err(Error::config("need at least one replication"));
    }
    let denominator = methods
        .iter()
        .position(|&m| m == Method::Boost)
        .ok_or_else(|| {
            Error::config("the method list must include `boost`, the relative-MSFE denominator")
        })?;
    let indices: Vec<usize> = (0..reps).collect();
    let records = par::map(&indices, |&rep| run_rep(spec, methods, settings, seed, rep));
    let excluded: Vec<usize> = records
        .iter()
        .filter(|r| r.failure.is_some())
        .map(|r| r.rep)
        .collect();
    for r in records.iter().filter(|r| r.failure.is_some()) {
        log::debug!(
            "replication {} excluded: {}",
            r.rep,
            r.failure.as_deref().unwrap_or("")
        );
    }
    if excluded.len() as f64 > EXCLUSION_WARNING * reps as f64 {
        log::warn!(
            "DGP {}: {} of {reps} replications excluded after method failures",
            spec.id,
            excluded.len()
        );
    }
    let kept = reps - excluded.len();
    if kept == 0 {
        return Err(Error::insufficient(
            "Monte Carlo: every replication failed",
            1,
            0,
        ));
    }
    let sse: Vec<f64> = (0..methods.len())
        .map(|k| {
            let sq: Vec<f64> = records
                .iter()
                .filter(|r| r.failure.is_none())
                .map(|r| r.errors[k].expect("complete record").powi(2))
                .collect();
            pairwise_sum(&sq)
        })
        .collect();
    let msfe: Vec<f64> = sse.iter().map(|s| s / kept as f64).collect();
    if !(sse[denominator] > 0.0) {
        return Err(Error::UndefinedRatio(
            "benchmark squared error is zero".into(),
        ));
    }
    let relative = sse.iter().map(|s| s / sse[denominator]).collect();
    Ok(McResult {
        spec: *spec,
        methods: methods.to_vec(),
        seed,
        reps,
        excluded,
        sse,
        msfe,
        relative,
        records,
    })
}

/// Writes relative MSFEs as CSV, one row per result, one column per method.
pub fn write_table<W: Write>(results: &[McResult], out: W) -> Result<()> {
    let Some(first) = results.first() else {
        return Err(Error::config("no results to write"));
    };
    if results.iter().any(|r| r.methods != first.methods) {
        return Err(Error::config("results use different method lists"));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "dgp".to_string(),
        "innovation".into(),
        "reps".into(),
        "excluded".into(),
    ];
    header.extend(first.methods.iter().map(|m| m.to_string()));
    w.write_record(&header)?;
    for r in results {
        let mut row = vec![
            r.spec.id.to_string(),
            r.spec.innovation.to_string(),
            r.reps.to_string(),
            r.excluded.len().to_string(),
        ];
        row.extend(r.relative.iter().map(|v| format!("{v:.6}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
