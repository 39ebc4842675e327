//! Bandwidth selection.
//!
//! Two criteria are available. Out-of-sample CV replays real-time forecasts
//! of the last `window` responses: at each origin the model is refit on the
//! rows whose responses were observed `h` periods earlier, at `u = 1` with a
//! one-sided kernel. Leave-one-out CV refits with each row removed at that
//! row's own rescaled time and weights the squared errors by a kernel
//! centered at a target row, or uniformly for a single global bandwidth.
//!
//! Ties between grid points go to the larger bandwidth.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boost::{boost, BoostConfig};
use crate::error::{Error, Result};
use crate::kernel::Sidedness;
use crate::panel::Design;
use crate::panel::MIN_ROWS;
use crate::par;
use crate::stats::pairwise_sum;

/// Relative tolerance under which two CV scores count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Strictly increasing bandwidths in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BandwidthGrid {
    values: Vec<f64>,
}

impl BandwidthGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("bandwidth grid is empty"));
        }
        if let Some(b) = values.iter().find(|&&b| !(b > 0.0 && b <= 1.0)) {
            return Err(Error::config(format!("bandwidth {b} is outside (0, 1]")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("bandwidth grid must be strictly increasing"));
        }
        Ok(BandwidthGrid { values })
    }

    /// `start, start + step, ...` up to and including `stop` (within
    /// rounding). Values are rounded to 10 decimals so `.3:.1:1` yields
    /// exactly the decimal grid.
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(start <= stop) {
            return Err(Error::config(format!("invalid grid {start}:{stop}:{step}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values = (0..count)
            .map(|k| ((start + k as f64 * step) * 1e10).round() / 1e10)
            .collect();
        BandwidthGrid::new(values)
    }

    pub fn single(bandwidth: f64) -> Result<Self> {
        BandwidthGrid::new(vec![bandwidth])
    }

    /// `.3, .4, ..., 1`, the simulation grid.
    pub fn simulation() -> Self {
        BandwidthGrid::range(0.3, 1.0, 0.1).expect("valid grid")
    }

    /// `.3, .325, ..., 1`, the grid for the macroeconomic panel.
    pub fn empirical() -> Self {
        BandwidthGrid::range(0.3, 1.0, 0.025).expect("valid grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl TryFrom<Vec<f64>> for BandwidthGrid {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        BandwidthGrid::new(values)
    }
}

impl From<BandwidthGrid> for Vec<f64> {
    fn from(grid: BandwidthGrid) -> Self {
        grid.values
    }
}

impl fmt::Display for BandwidthGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses a comma-separated list or a three-part range, either
/// `start:stop:step` or `start:step:stop` (`.3:.025:1`). For positive
/// bandwidths at most one reading is a valid range.
impl FromStr for BandwidthGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{p}` in bandwidth grid `{s}`")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.len() {
            3 => {
                let (a, b, c) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
                if b >= a && c <= b - a {
                    BandwidthGrid::range(a, b, c)
                } else if c >= a && b <= c - a {
                    BandwidthGrid::range(a, c, b)
                } else {
                    Err(Error::config(format!("invalid grid `{s}`")))
                }
            }
            1 => BandwidthGrid::new(s.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(Error::Parse(format!(
                "bandwidth grid `{s}` is neither start:stop:step nor a list"
            ))),
        }
    }
}

/// Out-of-sample CV settings: the number of validation forecasts and the
/// forecast horizon separating each origin from its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSpec {
    pub window: usize,
    pub horizon: usize,
}

impl CvSpec {
    pub fn new(window: usize, horizon: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::config("CV window must be at least 1"));
        }
        if horizon == 0 {
            return Err(Error::config("forecast horizon must be at least 1"));
        }
        Ok(CvSpec { window, horizon })
    }
}

/// Leave-one-out settings. `target` is the row the outer kernel is
/// centered on; `global` drops the outer kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LooSpec {
    pub target: usize,
    pub global: bool,
}

/// CV score of one grid point. `failures` counts folds whose fit failed;
/// they are left out of the score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub bandwidth: f64,
    pub score: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub bandwidth: f64,
    pub table: Vec<CvPoint>,
}

fn select(table: Vec<CvPoint>) -> Result<CvOutcome> {
    let mut best: Option<&CvPoint> = None;
    for p in table.iter().filter(|p| p.score.is_finite()) {
        match best {
            Some(b) if p.score > b.score + TIE_TOLERANCE * b.score.abs() => {}
            _ => best = Some(p),
        }
    }
    let bandwidth = best
        .map(|p| p.bandwidth)
        .ok_or_else(|| Error::InsufficientData {
            context: "bandwidth CV: every fold failed at every grid point".into(),
            needed: 1,
            available: 0,
        })?;
    Ok(CvOutcome { bandwidth, table })
}

/// One real-time forecast: fit on the first `train` rows and predict row
/// `target`.
fn oos_error(design: &Design, config: &BoostConfig, train: usize, target: usize) -> Option<f64> {
    let fit = design.head(train).and_then(|d| boost(&d, 1.0, config));
    match fit.and_then(|f| f.predict(&design.row(target))) {
        Ok(yhat) => Some(design.response()[target] - yhat),
        Err(e) => {
            log::debug!("CV fold for row {target} failed: {e}");
            None
        }
    }
}

/// Forecast errors of the last `spec.window` responses for each
/// grid bandwidth.
pub fn oos_errors(
    design: &Design,
    grid: &BandwidthGrid,
    spec: &CvSpec,
    config: &BoostConfig,
) -> Result<Vec<Vec<Option<f64>>>> {
    config.validate()?;
    if config.kernel.sided != Sidedness::OneSidedPast {
        return Err(Error::config("out-of-sample CV needs a one-sided kernel"));
    }
    let n = design.n_rows();
    let needed = spec.window + spec.horizon + MIN_ROWS - 1;
    if n < needed {
        return Err(Error::insufficient("out-of-sample bandwidth CV", needed, n));
    }
    // Response of row i is known at the origin of row i + h - 1.
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (n - spec.window..n).map(move |i| (g, i)))
        .collect();
    let errors = par::map(&tasks, |&(g, i)| {
        let cfg = config.with_bandwidth(grid.values()[g]);
        oos_error(design, &cfg, i + 1 - spec.horizon, i)
    });
    Ok(errors.chunks(spec.window).map(|c| c.to_vec()).collect())
}

/// Recursive out-of-sample CV: the bandwidth minimizing the mean squared
/// error of `spec.window` simulated real-time forecasts.
pub fn cv_bandwidth_oos(
    design: &Design,
    grid: &BandwidthGrid,
    spec: &CvSpec,
    config: &BoostConfig,
) -> Result<CvOutcome> {
    let errors = oos_errors(design, grid, spec, config)?;
    let table = grid
        .values()
        .iter()
        .zip(&errors)
        .map(|(&b, errs)| {
            let sq: Vec<f64> = errs.iter().flatten().map(|e| e * e).collect();
            let failures = errs.len() - sq.len();
            let score = if sq.is_empty() {
                f64::INFINITY
            } else {
                pairwise_sum(&sq) / sq.len() as f64
            };
            CvPoint {
                bandwidth: b,
                score,
                failures,
            }
        })
        .collect();
    select(table)
}

/// Kernel-weighted leave-one-out CV with exact refits.
pub fn cv_bandwidth_loo(
    design: &Design,
    grid: &BandwidthGrid,
    loo: &LooSpec,
    config: &BoostConfig,
) -> Result<CvOutcome> {
    config.validate()?;
    if config.kernel.sided != Sidedness::TwoSided {
        return Err(Error::config("leave-one-out CV needs a two-sided kernel"));
    }
    let n = design.n_rows();
    if loo.target >= n {
        return Err(Error::config(format!(
            "target row {} is outside a design of {n} rows",
            loo.target
        )));
    }
    if n < MIN_ROWS + 1 {
        return Err(Error::insufficient(
            "leave-one-out bandwidth CV",
            MIN_ROWS + 1,
            n,
        ));
    }
    let times = design.times();
    let u0 = times[loo.target];
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..n).map(move |i| (g, i)))
        .collect();
    let terms = par::map(&tasks, |&(g, i)| {
        let cfg = config.with_bandwidth(grid.values()[g]);
        let weight = if loo.global {
            1.0
        } else {
            cfg.kernel.profile_weight(times[i], u0)
        };
        if weight == 0.0 {
            return Some(0.0);
        }
        let fit = boost(&design.without_row(i), times[i], &cfg);
        match fit.and_then(|f| f.predict_at(&design.row(i), times[i])) {
            Ok(yhat) => {
                let e = design.response()[i] - yhat;
                Some(weight * e * e)
            }
            Err(e) => {
                log::debug!("leave-one-out fold {i} failed: {e}");
                None
            }
        }
    });
    let table = grid
        .values()
        .iter()
        .zip(terms.chunks(n))
        .map(|(&b, ts)| {
            let ok: Vec<f64> = ts.iter().flatten().copied().collect();
            let failures = ts.len() - ok.len();
            let score = if ok.is_empty() {
                f64::INFINITY
            } else {
                pairwise_sum(&ok) / n as f64
            };
            CvPoint {
                bandwidth: b,
                score,
                failures,
            }
        })
        .collect();
    select(table)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::*;
    use crate::boost::{Learner, Stopping};
    use crate::kernel::{KernelFamily, KernelSpec};

    fn random_design(n: usize, q: usize, seed: u64, f: impl Fn(usize, &[f64]) -> f64) -> Design {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, q, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = (0..n)
            .map(|i| {
                let row: Vec<f64> = x.row(i).iter().copied().collect();
                f(i, &row) + 0.3 * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        Design::from_parts(x, y).unwrap()
    }

    fn one_sided(family: KernelFamily) -> BoostConfig {
        BoostConfig {
            kernel: KernelSpec {
                family,
                bandwidth: 1.0,
                sided: Sidedness::OneSidedPast,
            },
            ..BoostConfig::default()
        }
    }

    fn two_sided() -> BoostConfig {
        BoostConfig {
            kernel: KernelSpec {
                family: KernelFamily::Epanechnikov,
                bandwidth: 1.0,
                sided: Sidedness::TwoSided,
            },
            stopping: Stopping::Fixed,
            max_iter: 20,
            ..BoostConfig::default()
        }
    }

    #[test]
    fn grids_parse_and_validate() {
        assert_eq!(
            BandwidthGrid::simulation().values(),
            &[0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
        );
        let e = BandwidthGrid::empirical();
        assert_eq!(e.len(), 29);
        assert_eq!(e.values()[1], 0.325);
        assert_eq!(*e.values().last().unwrap(), 1.0);
        assert_eq!(
            "0.3:1:0.1".parse::<BandwidthGrid>().unwrap(),
            BandwidthGrid::simulation()
        );
        assert_eq!(
            ".3:.025:1".parse::<BandwidthGrid>().unwrap(),
            BandwidthGrid::empirical()
        );
        assert_eq!(
            ".5:.25:1".parse::<BandwidthGrid>().unwrap().values(),
            &[0.5, 0.75, 1.0]
        );
        assert!(".5:.2:.4".parse::<BandwidthGrid>().is_err());
        assert_eq!(
            "0.5,1".parse::<BandwidthGrid>().unwrap().values(),
            &[0.5, 1.0]
        );
        assert!(BandwidthGrid::new(vec![0.5, 0.4]).is_err());
        assert!(BandwidthGrid::new(vec![0.0]).is_err());
        assert!(BandwidthGrid::new(vec![1.1]).is_err());
        assert!("a:b".parse::<BandwidthGrid>().is_err());
    }

    #[test]
    fn singleton_grid_is_forced() {
        let d = random_design(50, 3, 1, |_, x| x[0]);
        let grid = BandwidthGrid::single(1.0).unwrap();
        let spec = CvSpec::new(10, 1).unwrap();
        assert_eq!(
            cv_bandwidth_oos(&d, &grid, &spec, &BoostConfig::default())
                .unwrap()
                .bandwidth,
            1.0
        );
        let loo = LooSpec {
            target: 49,
            global: false,
        };
        assert_eq!(
            cv_bandwidth_loo(&d, &grid, &loo, &two_sided())
                .unwrap()
                .bandwidth,
            1.0
        );
    }

    #[test]
    fn ties_go_to_the_larger_bandwidth() {
        let pts = |s: &[f64]| {
            s.iter()
                .enumerate()
                .map(|(k, &score)| CvPoint {
                    bandwidth: 0.1 * (k + 1) as f64,
                    score,
                    failures: 0,
                })
                .collect()
        };
        assert_eq!(
            select(pts(&[2.0, 1.0, 1.0, 3.0])).unwrap().bandwidth,
            0.30000000000000004
        );
        assert_eq!(
            select(pts(&[1.0, 2.0, f64::INFINITY])).unwrap().bandwidth,
            0.1
        );
        assert!(select(pts(&[f64::INFINITY])).is_err());
    }

    /// Fits the last `k` rows with equal weights, the explicit rolling-window
    /// forecaster.
    fn rolling_forecast(
        design: &Design,
        train: usize,
        k: usize,
        target: usize,
        config: &BoostConfig,
    ) -> f64 {
        let window = design.head(train).unwrap().tail(k).unwrap();
        let cfg = config.with_bandwidth(1.0);
        let fit = boost(&window, 1.0, &cfg).unwrap();
        fit.predict(&design.row(target)).unwrap()
    }

    #[test]
    fn uniform_oos_cv_is_a_rolling_window_backtest() {
        let d = random_design(70, 4, 7, |i, x| if i < 50 { x[0] } else { -x[0] + x[2] });
        let grid = BandwidthGrid::range(0.3, 1.0, 0.1).unwrap();
        let spec = CvSpec::new(12, 2).unwrap();
        let config = one_sided(KernelFamily::Uniform);
        let outcome = cv_bandwidth_oos(&d, &grid, &spec, &config).unwrap();
        let n = d.n_rows();
        let mut best = (f64::INFINITY, 0.0);
        for &b in grid.values() {
            let mut sse = Vec::new();
            for i in n - spec.window..n {
                let train = i + 1 - spec.horizon;
                let k = ((b * train as f64) * (1.0 + 1e-12)).floor() as usize + 1;
                let e = d.response()[i] - rolling_forecast(&d, train, k.min(train), i, &config);
                sse.push(e * e);
            }
            let mse = pairwise_sum(&sse) / sse.len() as f64;
            let row = outcome.table.iter().find(|p| p.bandwidth == b).unwrap();
            assert_eq!(row.score, mse, "b = {b}");
            if mse <= best.0 {
                best = (mse, b);
            }
        }
        assert_eq!(outcome.bandwidth, best.1);
    }

    #[test]
    fn late_break_favours_the_window_that_excludes_it() {
        // Noiseless, coefficient on x0 flips sign at row 60 of 80.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 80;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = (0..n)
            .map(|i| if i < 60 { x[(i, 0)] } else { -x[(i, 0)] })
            .collect();
        let d = Design::from_parts(x, y).unwrap();
        let grid = BandwidthGrid::range(0.1, 1.0, 0.1).unwrap();
        let spec = CvSpec::new(8, 1).unwrap();
        let config = BoostConfig {
            stopping: Stopping::Fixed,
            max_iter: 200,
            nu: 0.5,
            ..one_sided(KernelFamily::Uniform)
        };
        let outcome = cv_bandwidth_oos(&d, &grid, &spec, &config).unwrap();
        // Exhaustive enumeration with the rolling-window forecaster.
        let mut best = (f64::INFINITY, 0.0);
        for &b in grid.values() {
            let mut sse = 0.0;
            for i in n - 8..n {
                let k = ((b * i as f64) * (1.0 + 1e-12)).floor() as usize + 1;
                let e = d.response()[i] - rolling_forecast(&d, i, k.min(i), i, &config);
                sse += e * e;
            }
            if sse / 8.0 <= best.0 * (1.0 + TIE_TOLERANCE) {
                best = (sse / 8.0, b);
            }
        }
        assert_eq!(outcome.bandwidth, best.1);
        assert_eq!(outcome.bandwidth, 0.1);
    }

    #[test]
    fn oos_cv_checks_the_sample_length() {
        let d = random_design(20, 2, 1, |_, x| x[0]);
        let grid = BandwidthGrid::simulation();
        let err = cv_bandwidth_oos(
            &d,
            &grid,
            &CvSpec::new(17, 1).unwrap(),
            &BoostConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
        assert!(cv_bandwidth_oos(&d, &grid, &CvSpec::new(5, 1).unwrap(), &two_sided()).is_err());
    }

    #[test]
    fn global_loo_matches_a_double_loop() {
        let d = random_design(30, 3, 11, |i, x| (i as f64 / 30.0) * x[1]);
        let grid = BandwidthGrid::new(vec![0.4, 0.7, 1.0]).unwrap();
        let config = two_sided();
        let outcome = cv_bandwidth_loo(
            &d,
            &grid,
            &LooSpec {
                target: 0,
                global: true,
            },
            &config,
        )
        .unwrap();
        let x = d.regressors();
        for p in &outcome.table {
            let cfg = config.with_bandwidth(p.bandwidth);
            let mut total = 0.0;
            for tau in 0..30 {
                let keep: Vec<usize> = (0..30).filter(|&i| i != tau).collect();
                let xs = x.select_rows(&keep);
                let ys: Vec<f64> = keep.iter().map(|&i| d.response()[i]).collect();
                let ts: Vec<f64> = keep.iter().map(|&i| d.times()[i]).collect();
                let sub = Design::from_parts_with_times(xs, ys, ts).unwrap();
                let fit = boost(&sub, d.times()[tau], &cfg).unwrap();
                let e = d.response()[tau] - fit.predict(&d.row(tau)).unwrap();
                total += e * e;
            }
            approx::assert_relative_eq!(p.score, total / 30.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn weighted_loo_ignores_rows_outside_the_outer_kernel() {
        let d = random_design(40, 2, 5, |_, x| x[0]);
        let grid = BandwidthGrid::new(vec![0.2]).unwrap();
        let config = two_sided();
        let a = cv_bandwidth_loo(
            &d,
            &grid,
            &LooSpec {
                target: 39,
                global: false,
            },
            &config,
        )
        .unwrap();
        // Perturbing an early response changes no term with nonzero weight
        // except through the refits, which drop rows outside the window.
        let mut y = d.response().to_vec();
        y[0] += 100.0;
        let b = cv_bandwidth_loo(
            &d.with_response(y).unwrap(),
            &grid,
            &LooSpec {
                target: 39,
                global: false,
            },
            &config,
        )
        .unwrap();
        assert_eq!(a.table[0].score, b.table[0].score);
    }

    #[test]
    fn pure_noise_favours_the_largest_bandwidth() {
        let grid = BandwidthGrid::new(vec![0.4, 0.7, 1.0]).unwrap();
        let config = BoostConfig {
            learner: Learner::LocalConstant,
            ..two_sided()
        };
        let mut wins = 0;
        let mut spread = Vec::new();
        let draws = 40;
        for s in 0..draws {
            let d = random_design(40, 2, 100 + s, |_, _| 0.0);
            let out = cv_bandwidth_loo(
                &d,
                &grid,
                &LooSpec {
                    target: 0,
                    global: true,
                },
                &config,
            )
            .unwrap();
            if out.bandwidth == 1.0 {
                wins += 1;
            }
            let scores: Vec<f64> = out.table.iter().map(|p| p.score).collect();
            let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = scores.iter().cloned().fold(0.0, f64::max);
            spread.push((hi - lo) / lo);
        }
        assert!(wins * 2 > draws, "largest bandwidth won {wins} of {draws}");
        // Curves are flat up to sampling noise.
        assert!(crate::stats::median(&spread) < 0.25, "{:?}", spread);
    }

    #[test]
    fn loo_needs_a_two_sided_kernel_and_a_valid_target() {
        let d = random_design(20, 2, 1, |_, x| x[0]);
        let grid = BandwidthGrid::single(1.0).unwrap();
        let loo = LooSpec {
            target: 5,
            global: false,
        };
        assert!(cv_bandwidth_loo(&d, &grid, &loo, &one_sided(KernelFamily::Uniform)).is_err());
        assert!(cv_bandwidth_loo(
            &d,
            &grid,
            &LooSpec {
                target: 20,
                global: false
            },
            &two_sided()
        )
        .is_err());
    }
}
