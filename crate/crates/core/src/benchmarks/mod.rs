//! Comparison forecasters and the named forecasting methods.
//!
//! Every method forecasts one response from a [`Problem`]: a training
//! design, the regressor row for the forecast, and the positions of the
//! target's own lags among the design columns. Factor methods expect a
//! design built from own lags and estimated factors (see
//! [`Method::inputs`]); the caller assembles it.

mod lasso;
mod ols;
mod pca;

pub use lasso::{
    bic, lambda_path, lasso_fit, LassoFit, LassoProblem, LASSO_MAX_SWEEPS, LASSO_PATH_LENGTH,
    LASSO_TOLERANCE,
};
pub use ols::{
    ar_forecast, di_forecast, ols_or_mean, ols_or_ridge, ArSpec, ArWindow, OlsForecast, DI_RIDGE,
};
pub use pca::{column_moments, pca_factors, standardize, FactorSet};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boost::{boost, BoostConfig, Learner};
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec, Sidedness};
use crate::panel::Design;
use crate::tune::{cv_bandwidth_oos, BandwidthGrid, CvSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Ar,
    TvAr,
    RollingAr,
    Boost,
    RollingBoost,
    Lasso,
    LcBoost,
    LlBoost,
    Di,
    BoostFactor,
    LcBoostFactor,
    LlBoostFactor,
}

/// Which regressors a method's design holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inputs {
    /// Own lags and every candidate predictor.
    Full,
    /// Own lags and `k` principal-component factors at lags `0..=lags`.
    Factors { k: usize, lags: usize },
}

impl Method {
    pub const ALL: [Method; 12] = [
        Method::Ar,
        Method::TvAr,
        Method::RollingAr,
        Method::Boost,
        Method::RollingBoost,
        Method::Lasso,
        Method::LcBoost,
        Method::LlBoost,
        Method::Di,
        Method::BoostFactor,
        Method::LcBoostFactor,
        Method::LlBoostFactor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ar => "ar",
            Method::TvAr => "tvar",
            Method::RollingAr => "rolling-ar",
            Method::Boost => "boost",
            Method::RollingBoost => "rolling-boost",
            Method::Lasso => "lasso",
            Method::LcBoost => "lc-boost",
            Method::LlBoost => "ll-boost",
            Method::Di => "di",
            Method::BoostFactor => "boost-factor",
            Method::LcBoostFactor => "lc-boost-factor",
            Method::LlBoostFactor => "ll-boost-factor",
        }
    }

    pub fn inputs(self, settings: &MethodSettings) -> Inputs {
        match self {
            Method::Di => Inputs::Factors {
                k: settings.di_factors,
                lags: 0,
            },
            Method::BoostFactor | Method::LcBoostFactor | Method::LlBoostFactor => {
                Inputs::Factors {
                    k: settings.factors,
                    lags: settings.factor_lags,
                }
            }
            _ => Inputs::Full,
        }
    }

    /// Whether the method selects a bandwidth by CV.
    pub fn is_time_varying(self) -> bool {
        matches!(
            self,
            Method::TvAr
                | Method::LcBoost
                | Method::LlBoost
                | Method::LcBoostFactor
                | Method::LlBoostFactor
        )
    }

    /// Parses a comma-separated list of method names.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let methods: Vec<Method> = s
            .split(',')
            .map(|m| m.trim().parse())
            .collect::<Result<_>>()?;
        let mut seen = methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != methods.len() {
            return Err(Error::config(format!("duplicate method in `{s}`")));
        }
        Ok(methods)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::config(format!(
                    "unknown method `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> Self {
        m.name().to_string()
    }
}

/// Tuning shared by the named methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    /// Step length, iteration cap, stopping rule and hat cap for every
    /// boosting method; its kernel and learner are set per method.
    pub boost: BoostConfig,
    pub lc_kernel: KernelFamily,
    pub ll_kernel: KernelFamily,
    pub grid: BandwidthGrid,
    pub cv_window: usize,
    /// Rolling methods use the most recent `floor(fraction * n) + 1` rows,
    /// the support of a one-sided uniform kernel with this bandwidth.
    pub rolling_fraction: f64,
    pub factors: usize,
    pub factor_lags: usize,
    pub di_factors: usize,
}

impl MethodSettings {
    /// Uniform kernels, `omega = 20`, grid `.3:.1:1`.
    pub fn simulation() -> Self {
        MethodSettings {
            boost: BoostConfig::default(),
            lc_kernel: KernelFamily::Uniform,
            ll_kernel: KernelFamily::Uniform,
            grid: BandwidthGrid::simulation(),
            cv_window: 20,
            rolling_fraction: 0.2,
            factors: 8,
            factor_lags: 3,
            di_factors: 4,
        }
    }

    /// Uniform kernel for local-constant and Gaussian for local-linear
    /// methods, `omega = 60`, grid `.3:.025:1`.
    pub fn empirical() -> Self {
        MethodSettings {
            ll_kernel: KernelFamily::Gaussian,
            grid: BandwidthGrid::empirical(),
            cv_window: 60,
            ..MethodSettings::simulation()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.boost.validate()?;
        if self.cv_window == 0 {
            return Err(Error::config("CV window must be at least 1"));
        }
        if !(self.rolling_fraction > 0.0 && self.rolling_fraction <= 1.0) {
            return Err(Error::config(format!(
                "rolling fraction must lie in (0, 1], got {}",
                self.rolling_fraction
            )));
        }
        Ok(())
    }

    fn config(
        &self,
        learner: Learner,
        family: KernelFamily,
        bandwidth: f64,
        sided: Sidedness,
    ) -> BoostConfig {
        BoostConfig {
            learner,
            kernel: KernelSpec {
                family,
                bandwidth,
                sided,
            },
            ..self.boost
        }
    }

    /// Rows kept by the rolling methods out of `n`.
    pub fn rolling_rows(&self, n: usize) -> usize {
        (((self.rolling_fraction * n as f64) * (1.0 + 1e-12)).floor() as usize + 1).min(n)
    }
}

impl Default for MethodSettings {
    fn default() -> Self {
        MethodSettings::simulation()
    }
}

/// Training data for one forecast.
#[derive(Debug, Clone)]
pub struct Problem {
    pub design: Design,
    pub x_new: Vec<f64>,
    /// Columns of `design` holding the target's own lags.
    pub own_lags: Vec<usize>,
}

impl Problem {
    pub fn new(design: Design, x_new: Vec<f64>, own_lags: Vec<usize>) -> Result<Self> {
        if x_new.len() != design.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: design.n_cols(),
                found: x_new.len(),
            });
        }
        if let Some(&j) = own_lags.iter().find(|&&j| j >= design.n_cols()) {
            return Err(Error::config(format!(
                "own-lag column {j} is outside the design"
            )));
        }
        Ok(Problem {
            design,
            x_new,
            own_lags,
        })
    }

    fn own(&self) -> Result<(Design, Vec<f64>)> {
        if self.own_lags.is_empty() {
            return Err(Error::config("method needs the target's own lags"));
        }
        Ok((
            self.design.select_columns(&self.own_lags),
            self.own_lags.iter().map(|&j| self.x_new[j]).collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodForecast {
    pub prediction: f64,
    /// CV-selected bandwidth of time-varying methods.
    pub bandwidth: Option<f64>,
    /// Number of boosting iterations used.
    pub stop: Option<usize>,
    /// A least-squares fit hit its singular fallback.
    pub singular: bool,
}

impl MethodForecast {
    fn plain(prediction: f64) -> Self {
        MethodForecast {
            prediction,
            bandwidth: None,
            stop: None,
            singular: false,
        }
    }
}

fn ols_on(design: &Design, x_new: &[f64], rows: usize) -> Result<OlsForecast> {
    let d = design.tail(rows)?;
    ols_or_mean(d.regressors(), d.response(), x_new)
}

fn boost_at_end(
    design: &Design,
    x_new: &[f64],
    config: &BoostConfig,
    bandwidth: Option<f64>,
) -> Result<MethodForecast> {
    let fit = boost(design, 1.0, config)?;
    Ok(MethodForecast {
        prediction: fit.predict(x_new)?,
        bandwidth,
        stop: Some(fit.stop),
        singular: false,
    })
}

fn tv_boost(
    design: &Design,
    x_new: &[f64],
    config: BoostConfig,
    settings: &MethodSettings,
) -> Result<MethodForecast> {
    let spec = CvSpec::new(settings.cv_window, design.horizon())?;
    let cv = cv_bandwidth_oos(design, &settings.grid, &spec, &config)?;
    boost_at_end(
        design,
        x_new,
        &config.with_bandwidth(cv.bandwidth),
        Some(cv.bandwidth),
    )
}

/// Forecast of `method` for one problem.
pub fn forecast(
    method: Method,
    problem: &Problem,
    settings: &MethodSettings,
) -> Result<MethodForecast> {
    let d = &problem.design;
    let x = &problem.x_new;
    let n = d.n_rows();
    let one = Sidedness::OneSidedPast;
    match method {
        Method::Ar | Method::RollingAr => {
            let (own, own_new) = problem.own()?;
            let rows = if method == Method::Ar {
                n
            } else {
                settings.rolling_rows(n)
            };
            let f = ols_on(&own, &own_new, rows)?;
            Ok(MethodForecast {
                singular: f.singular,
                ..MethodForecast::plain(f.prediction)
            })
        }
        Method::Di => {
            let f = ols_or_ridge(d.regressors(), d.response(), x)?;
            Ok(MethodForecast {
                singular: f.singular,
                ..MethodForecast::plain(f.prediction)
            })
        }
        Method::Lasso => Ok(MethodForecast::plain(
            lasso_fit(d.regressors(), d.response())?.predict(x),
        )),
        Method::Boost | Method::BoostFactor => {
            let config = settings.config(
                Learner::LocalConstant,
                KernelFamily::Uniform,
                1.0,
                Sidedness::TwoSided,
            );
            boost_at_end(d, x, &config, None)
        }
        Method::RollingBoost => {
            let config = settings.config(
                Learner::LocalConstant,
                KernelFamily::Uniform,
                settings.rolling_fraction,
                one,
            );
            boost_at_end(d, x, &config, None)
        }
        Method::TvAr => {
            let (own, own_new) = problem.own()?;
            let config = settings.config(Learner::LocalConstant, settings.lc_kernel, 1.0, one);
            tv_boost(&own, &own_new, config, settings)
        }
        Method::LcBoost | Method::LcBoostFactor => {
            let config = settings.config(Learner::LocalConstant, settings.lc_kernel, 1.0, one);
            tv_boost(d, x, config, settings)
        }
        Method::LlBoost | Method::LlBoostFactor => {
            let config = settings.config(Learner::LocalLinear, settings.ll_kernel, 1.0, one);
            tv_boost(d, x, config, settings)
        }
    }
}
