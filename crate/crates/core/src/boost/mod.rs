//! Componentwise L2 boosting with kernel-weighted learners.
//!
//! A fit targets one evaluation point `u` in rescaled time. Each regressor
//! column is standardized with kernel-weighted moments over the estimation
//! window, the intercept is the loss-minimizing constant, and every
//! iteration adds `nu` times the best single-column learner fitted to the
//! current negative gradient. All `max_iter` iterations are run once; the
//! stopping rule then picks how many of them the fit uses.
//!
//! ```
//! use nalgebra::DMatrix;
//! use tvboost::boost::{boost, BoostConfig, Stopping};
//! use tvboost::panel::Design;
//!
//! let x = DMatrix::from_fn(60, 3, |i, j| ((i * (j + 2)) as f64).sin());
//! let y: Vec<f64> = (0..60).map(|i| 2.0 * x[(i, 1)]).collect();
//! let design = Design::from_parts(x, y).unwrap();
//! let config = BoostConfig { stopping: Stopping::Fixed, ..BoostConfig::default() };
//! let fit = boost(&design, 1.0, &config).unwrap();
//! assert_eq!(fit.steps[0].column, 1);
//! ```

mod engine;
mod hat;
mod loss;

pub use loss::Loss;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec, Sidedness};
use crate::learner::Coef;
use crate::panel::Design;
use engine::{PathRun, Window};

/// Default bound on the design size for hat-trace based stopping.
pub const DEFAULT_HAT_CAP: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Learner {
    LocalConstant,
    LocalLinear,
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Learner::LocalConstant => "lc",
            Learner::LocalLinear => "ll",
        })
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lc" | "local-constant" => Ok(Learner::LocalConstant),
            "ll" | "local-linear" => Ok(Learner::LocalLinear),
            _ => Err(Error::config(format!(
                "unknown learner `{s}` (expected lc or ll)"
            ))),
        }
    }
}

impl TryFrom<String> for Learner {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Learner> for String {
    fn from(l: Learner) -> String {
        l.to_string()
    }
}

/// How the number of iterations `M_T` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Stopping {
    /// Minimize the corrected AIC over `m = 0..=max_iter`.
    Aicc,
    /// Use all `max_iter` iterations.
    Fixed,
    /// Fit without the last `rows` design rows and pick the iteration with
    /// the smallest kernel-weighted loss on them.
    HeldOut { rows: usize },
}

impl fmt::Display for Stopping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stopping::Aicc => f.write_str("aicc"),
            Stopping::Fixed => f.write_str("fixed"),
            Stopping::HeldOut { rows } => write!(f, "cv:{rows}"),
        }
    }
}

impl FromStr for Stopping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "aicc" => Ok(Stopping::Aicc),
            "fixed" => Ok(Stopping::Fixed),
            "cv" => Ok(Stopping::HeldOut { rows: 20 }),
            other => match other.strip_prefix("cv:") {
                Some(k) => Ok(Stopping::HeldOut {
                    rows: k
                        .parse()
                        .map_err(|_| Error::config(format!("bad held-out size `{k}`")))?,
                }),
                None => Err(Error::config(format!(
                    "unknown stopping rule `{s}` (expected aicc, fixed or cv[:rows])"
                ))),
            },
        }
    }
}

impl TryFrom<String> for Stopping {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Stopping> for String {
    fn from(s: Stopping) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub nu: f64,
    pub max_iter: usize,
    pub stopping: Stopping,
    pub learner: Learner,
    pub loss: Loss,
    pub kernel: KernelSpec,
    /// Standardize columns over the kernel window before boosting.
    pub standardize: bool,
    /// Largest design for which the hat trace is computed.
    pub hat_cap: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            nu: 0.1,
            max_iter: 100,
            stopping: Stopping::Aicc,
            learner: Learner::LocalConstant,
            loss: Loss::Squared,
            kernel: KernelSpec {
                family: KernelFamily::Uniform,
                bandwidth: 1.0,
                sided: Sidedness::OneSidedPast,
            },
            standardize: true,
            hat_cap: DEFAULT_HAT_CAP,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::config(format!(
                "step length must lie in (0, 1], got {}",
                self.nu
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter must be at least 1"));
        }
        self.loss.validate()?;
        self.kernel.validate()?;
        if self.learner == Learner::LocalLinear && self.loss != Loss::Squared {
            return Err(Error::config(
                "the local-linear learner requires squared loss",
            ));
        }
        if self.stopping == Stopping::Aicc && self.loss != Loss::Squared {
            return Err(Error::config(
                "AICc stopping needs the hat matrix and is only defined for squared loss; use fixed or cv stopping",
            ));
        }
        if let Stopping::HeldOut { rows } = self.stopping {
            if rows == 0 {
                return Err(Error::config("held-out stopping needs at least one row"));
            }
        }
        Ok(())
    }

    pub fn with_bandwidth(&self, bandwidth: f64) -> Self {
        BoostConfig {
            kernel: self.kernel.with_bandwidth(bandwidth),
            ..*self
        }
    }
}

/// One boosting iteration: the selected column and the unshrunk learner
/// coefficients (in standardized units). `fallback` marks a local-linear
/// step that used the local-constant learner because the local-linear
/// system was singular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub column: usize,
    pub coef: Coef,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostFit {
    pub u: f64,
    pub learner: Learner,
    pub loss: Loss,
    pub nu: f64,
    pub intercept: f64,
    /// All `max_iter` steps; the fit uses the first `stop` of them.
    pub steps: Vec<Step>,
    /// Kernel-weighted loss `sum w L(y, F^(m))` for `m = 0..=max_iter`.
    /// For squared loss `L = r^2 / 2`.
    pub loss_path: Vec<f64>,
    /// Trace of the boosting operator for `m = 0..=max_iter`.
    pub df_path: Option<Vec<f64>>,
    pub aicc_path: Option<Vec<f64>>,
    pub stop: usize,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub active: Vec<bool>,
    pub weight_sum: f64,
    pub effective_n: f64,
    /// `y - F^(stop)` for every design row; local-linear fits include the
    /// slope term at each row's own time.
    pub residuals: Vec<f64>,
}

impl BoostFit {
    pub fn n_columns(&self) -> usize {
        self.center.len()
    }

    /// Weighted residual sum of squares path (squared loss only).
    pub fn ssr_path(&self) -> Option<Vec<f64>> {
        (self.loss == Loss::Squared).then(|| self.loss_path.iter().map(|l| 2.0 * l).collect())
    }

    /// Accumulated level and slope coefficients after `m` steps, in
    /// standardized units and including the step length.
    pub fn coefficients_at(&self, m: usize) -> (Vec<f64>, Vec<f64>) {
        let q = self.n_columns();
        let mut level = vec![0.0; q];
        let mut slope = vec![0.0; q];
        for s in self.steps.iter().take(m) {
            level[s.column] += self.nu * s.coef.level();
            slope[s.column] += self.nu * s.coef.slope();
        }
        (level, slope)
    }

    /// Coefficients on the raw regressors at the stopping iteration.
    pub fn raw_coefficients(&self) -> Vec<f64> {
        let (level, _) = self.coefficients_at(self.stop);
        level
            .iter()
            .zip(&self.scale)
            .zip(&self.active)
            .map(|((b, s), &a)| if a { b / s } else { 0.0 })
            .collect()
    }

    fn standardized(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_columns() {
            return Err(Error::DimensionMismatch {
                expected: self.n_columns(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.active[j] {
                    (v - self.center[j]) / self.scale[j]
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Prediction from raw regressors at the evaluation point, using the
    /// first `m` steps. The local-linear slope term vanishes there.
    pub fn predict_with(&self, x: &[f64], m: usize) -> Result<f64> {
        self.predict_at_with(x, self.u, m)
    }

    /// Prediction from raw regressors at rescaled time `t`, including the
    /// local-linear slope term `(t - u)`.
    pub fn predict_at_with(&self, x: &[f64], t: f64, m: usize) -> Result<f64> {
        let z = self.standardized(x)?;
        let mut f = self.intercept;
        for s in self.steps.iter().take(m) {
            f += self.nu * (s.coef.level() + s.coef.slope() * (t - self.u)) * z[s.column];
        }
        Ok(f)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_with(x, self.stop)
    }

    pub fn predict_at(&self, x: &[f64], t: f64) -> Result<f64> {
        self.predict_at_with(x, t, self.stop)
    }
}

/// `intercept + nu * sum_m coef_m x[S_m]` at the stopping iteration.
pub fn predict(fit: &BoostFit, x_new: &[f64]) -> Result<f64> {
    fit.predict(x_new)
}

/// Corrected AIC: `log(sigma2) + (1 + df/n) / (1 - (df + 2)/n)`.
pub fn aicc(sigma2: f64, df: f64, n: f64) -> Result<f64> {
    if df + 2.0 >= n {
        return Err(Error::Saturated { df, n });
    }
    if !(sigma2 > 0.0) || !(df > 0.0) {
        return Err(Error::config(format!(
            "AICc needs sigma2 > 0 and df > 0, got {sigma2} and {df}"
        )));
    }
    Ok(sigma2.ln() + (1.0 + df / n) / (1.0 - (df + 2.0) / n))
}

/// AICc for each entry of a df path; `+inf` from the first saturated entry
/// on. A zero residual variance gives `-inf`.
fn aicc_path(loss_path: &[f64], df_path: &[f64], wsum: f64, n: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(df_path.len());
    let mut saturated = false;
    for (l, &df) in loss_path.iter().zip(df_path) {
        saturated |= df + 2.0 >= n;
        if saturated {
            out.push(f64::INFINITY);
            continue;
        }
        let sigma2 = 2.0 * l / wsum;
        out.push(sigma2.ln() + (1.0 + df / n) / (1.0 - (df + 2.0) / n));
    }
    out
}

/// Lowest index of the minimum; `NaN` entries never win.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

fn run(win: &Window, config: &BoostConfig, track_df: bool) -> Result<PathRun> {
    match (config.learner, config.loss) {
        (Learner::LocalConstant, Loss::Squared) => {
            engine::run_lc_squared(win, config.nu, config.max_iter, track_df)
        }
        (Learner::LocalLinear, Loss::Squared) => {
            engine::run_ll_squared(win, config.nu, config.max_iter, track_df)
        }
        (Learner::LocalConstant, loss) => {
            engine::run_generic(win, loss, config.nu, config.max_iter)
        }
        (Learner::LocalLinear, _) => Err(Error::config(
            "the local-linear learner requires squared loss",
        )),
    }
}

fn assemble(
    design: &Design,
    u: f64,
    config: &BoostConfig,
    win: &Window,
    path: PathRun,
    stop: usize,
) -> BoostFit {
    let mut fit = BoostFit {
        u,
        learner: config.learner,
        loss: config.loss,
        nu: config.nu,
        intercept: path.intercept,
        steps: path.steps,
        loss_path: path.loss_path,
        aicc_path: None,
        df_path: path.df_path,
        stop,
        center: win.center.clone(),
        scale: win.scale.clone(),
        active: win.active.clone(),
        weight_sum: win.wsum,
        effective_n: win.effective_n(),
        residuals: Vec::new(),
    };
    if let Some(df) = &fit.df_path {
        fit.aicc_path = Some(aicc_path(&fit.loss_path, df, win.wsum, win.effective_n()));
    }
    let (level, slope) = fit.coefficients_at(stop);
    let used: Vec<usize> = (0..level.len())
        .filter(|&j| level[j] != 0.0 || slope[j] != 0.0)
        .collect();
    let x = design.regressors();
    fit.residuals = (0..design.n_rows())
        .map(|i| {
            let d = design.times()[i] - u;
            let f: f64 = used
                .iter()
                .map(|&j| (level[j] + slope[j] * d) * win.transform(j, x[(i, j)]))
                .sum();
            design.response()[i] - fit.intercept - f
        })
        .collect();
    fit
}

fn check_hat_cap(design: &Design, config: &BoostConfig) -> Result<()> {
    if design.n_rows() > config.hat_cap {
        return Err(Error::HatCapExceeded {
            n: design.n_rows(),
            cap: config.hat_cap,
        });
    }
    Ok(())
}

/// Held-out loss for each `m = 0..=max_iter` on design rows `from..n`.
fn held_out_path(
    design: &Design,
    u: f64,
    config: &BoostConfig,
    win: &Window,
    path: &PathRun,
    from: usize,
) -> Vec<f64> {
    let n = design.n_rows();
    let rows: Vec<usize> = (from..n).collect();
    let mut weights: Vec<f64> = rows
        .iter()
        .map(|&i| config.kernel.profile_weight(design.times()[i], u))
        .collect();
    if weights.iter().all(|&w| w <= 0.0) {
        weights.fill(1.0);
    }
    let x = design.regressors();
    let mut f = vec![path.intercept; rows.len()];
    let loss = |f: &[f64]| -> f64 {
        rows.iter()
            .zip(f)
            .zip(&weights)
            .map(|((&i, &fi), &w)| w * config.loss.value(design.response()[i], fi))
            .sum()
    };
    let mut out = vec![loss(&f)];
    for s in &path.steps {
        for (k, &i) in rows.iter().enumerate() {
            let d = design.times()[i] - u;
            f[k] += config.nu
                * (s.coef.level() + s.coef.slope() * d)
                * win.transform(s.column, x[(i, s.column)]);
        }
        out.push(loss(&f));
    }
    out
}

/// Boosting at rescaled time `u` with the learner and loss in `config`.
pub fn boost(design: &Design, u: f64, config: &BoostConfig) -> Result<BoostFit> {
    config.validate()?;
    match config.stopping {
        Stopping::Aicc => {
            check_hat_cap(design, config)?;
            let win = Window::build(design, u, &config.kernel, config.standardize, None)?;
            let path = run(&win, config, true)?;
            let mut fit = assemble(design, u, config, &win, path, config.max_iter);
            let stop = argmin(fit.aicc_path.as_deref().expect("tracked"));
            if stop != fit.stop {
                fit = refresh_stop(design, config, &win, fit, stop);
            }
            Ok(fit)
        }
        Stopping::Fixed => {
            let win = Window::build(design, u, &config.kernel, config.standardize, None)?;
            let path = run(&win, config, false)?;
            Ok(assemble(design, u, config, &win, path, config.max_iter))
        }
        Stopping::HeldOut { rows } => {
            let n = design.n_rows();
            if rows >= n {
                return Err(Error::insufficient("held-out stopping", rows + 1, n));
            }
            let from = n - rows;
            let inner = Window::build(design, u, &config.kernel, config.standardize, Some(from))?;
            let inner_path = run(&inner, config, false)?;
            let stop = argmin(&held_out_path(design, u, config, &inner, &inner_path, from));
            let win = Window::build(design, u, &config.kernel, config.standardize, None)?;
            let path = run(&win, config, false)?;
            Ok(assemble(design, u, config, &win, path, stop))
        }
    }
}

fn refresh_stop(
    design: &Design,
    config: &BoostConfig,
    win: &Window,
    fit: BoostFit,
    stop: usize,
) -> BoostFit {
    let path = PathRun {
        intercept: fit.intercept,
        steps: fit.steps,
        loss_path: fit.loss_path,
        df_path: fit.df_path,
    };
    assemble(design, fit.u, config, win, path, stop)
}

fn require(config: &BoostConfig, learner: Learner, squared: bool) -> Result<()> {
    if config.learner != learner {
        return Err(Error::config(format!(
            "expected the {learner} learner, config has {}",
            config.learner
        )));
    }
    if squared && config.loss != Loss::Squared {
        return Err(Error::config(format!(
            "expected squared loss, config has {}",
            config.loss
        )));
    }
    Ok(())
}

/// Local-constant L2 boosting.
pub fn lc_boost(design: &Design, u: f64, config: &BoostConfig) -> Result<BoostFit> {
    require(config, Learner::LocalConstant, true)?;
    boost(design, u, config)
}

/// Local-linear L2 boosting.
pub fn ll_boost(design: &Design, u: f64, config: &BoostConfig) -> Result<BoostFit> {
    require(config, Learner::LocalLinear, true)?;
    boost(design, u, config)
}

/// Local-constant boosting on the negative gradient of `config.loss`. With
/// squared loss this is [`lc_boost`].
pub fn generic_boost(design: &Design, u: f64, config: &BoostConfig) -> Result<BoostFit> {
    require(config, Learner::LocalConstant, false)?;
    boost(design, u, config)
}

/// Trace of the boosting operator for `m = 0..=max_iter`.
pub fn hat_trace_path(design: &Design, u: f64, config: &BoostConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if config.loss != Loss::Squared {
        return Err(Error::config(
            "the hat trace is only defined for squared loss",
        ));
    }
    check_hat_cap(design, config)?;
    let win = Window::build(design, u, &config.kernel, config.standardize, None)?;
    let path = run(&win, config, true)?;
    Ok(path.df_path.expect("tracked"))
}

/// Fits at the end of `train` (`u = 1`) and predicts from the raw regressor
/// row `x_new`.
pub fn fit_and_forecast(
    train: &Design,
    x_new: &[f64],
    config: &BoostConfig,
) -> Result<(f64, BoostFit)> {
    let fit = boost(train, 1.0, config)?;
    let yhat = fit.predict(x_new)?;
    Ok((yhat, fit))
}
