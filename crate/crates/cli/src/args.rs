//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "tvboost",
    version,
    about = "Time-varying parameter boosting for forecasting"
)]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// TOML file of flag values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Manifest path; defaults to `<output>.manifest.json`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo relative MSFE for simulated designs.
    Sim(SimArgs),
    /// Expanding-window forecasts on a FRED-MD panel.
    Forecast(ForecastArgs),
    /// Bandwidth cross-validation and a boosted forecast on one series.
    Cv(CvArgs),
    /// Relative accuracy metrics from a forecast log.
    Report(ReportArgs),
    /// Applies FRED-MD transform codes.
    Transform(TransformArgs),
    /// Reruns the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sim(_) => "sim",
            Command::Forecast(_) => "forecast",
            Command::Cv(_) => "cv",
            Command::Report(_) => "report",
            Command::Transform(_) => "transform",
            Command::Replay(_) => "replay",
        }
    }
}

/// Tuning shared by the named methods.
#[derive(Debug, Clone, Args)]
pub struct SettingsArgs {
    /// Boosting step length.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// aicc, fixed or cv[:rows].
    #[arg(long)]
    pub stop: Option<String>,
    /// l2, l1 or quantile:<tau>.
    #[arg(long)]
    pub loss: Option<String>,
    /// Kernel of both time-varying learners: uniform, epa or gauss.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub lc_kernel: Option<String>,
    #[arg(long)]
    pub ll_kernel: Option<String>,
    /// Bandwidth grid, `start:stop:step` or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Validation forecasts per bandwidth.
    #[arg(long)]
    pub cv_window: Option<usize>,
    #[arg(long)]
    pub rolling_fraction: Option<f64>,
    #[arg(long)]
    pub factors: Option<usize>,
    #[arg(long)]
    pub factor_lags: Option<usize>,
    #[arg(long)]
    pub di_factors: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BreakReading {
    Variance,
    Sd,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// DGP ids, a comma list or `all`.
    #[arg(long)]
    pub dgp: String,
    /// gauss or t5.
    #[arg(long, default_value = "gauss")]
    pub innov: String,
    #[arg(long, default_value_t = 300)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Method list; boost is added as the denominator.
    #[arg(long, default_value = "boost,lc-boost,ll-boost")]
    pub methods: String,
    #[arg(long, default_value_t = 200)]
    pub periods: usize,
    #[arg(long, default_value_t = 100)]
    pub predictors: usize,
    /// Reading of the variance-break scale.
    #[arg(long, value_enum, default_value = "variance")]
    pub variance_break: BreakReading,
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// FRED-MD layout CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Target series; defaults to the eight headline series.
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long, default_value = "1,3,6,12")]
    pub horizons: String,
    /// Methods as `name` or `label=name`; defaults to all.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, default_value = "ar")]
    pub benchmark: String,
    /// First forecast date, YYYY-MM.
    #[arg(long)]
    pub oos_start: Option<String>,
    #[arg(long)]
    pub oos_end: Option<String>,
    #[arg(long, default_value_t = 120)]
    pub initial_window: usize,
    #[arg(long, default_value_t = 3)]
    pub lags: usize,
    /// Predictors missing more than this fraction of rows are dropped.
    #[arg(long, default_value_t = 0.05)]
    pub max_missing: f64,
    /// Keep the file's transform codes for housing series.
    #[arg(long)]
    pub no_housing_remap: bool,
    #[command(flatten)]
    pub settings: SettingsArgs,
    /// Forecast log CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of forecasts that failed.
    #[arg(long)]
    pub failures: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sided {
    One,
    Two,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Panel CSV of stationary series.
    #[arg(long)]
    pub data: PathBuf,
    /// Series to forecast; every series enters with lags.
    #[arg(long)]
    pub response: String,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    #[arg(long, default_value_t = 3)]
    pub lags: usize,
    /// lc or ll.
    #[arg(long, default_value = "lc")]
    pub learner: String,
    #[arg(long, default_value = "uniform")]
    pub kernel: String,
    #[arg(long, value_enum, default_value = "one")]
    pub sided: Sided,
    /// A bandwidth in (0, 1] or `cv`.
    #[arg(long, default_value = "cv")]
    pub bandwidth: String,
    #[arg(long, default_value_t = 60)]
    pub cv_window: usize,
    #[arg(long, default_value = ".3:.025:1")]
    pub grid: String,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value = "aicc")]
    pub stop: String,
    #[arg(long, default_value = "l2")]
    pub loss: String,
    /// JSON summary.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Relmsfe,
    Bystart,
    Local,
    Rl,
    Lbw,
    All,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, value_enum, default_value = "relmsfe")]
    pub metric: MetricArg,
    /// Windows for relative MSFE: full, pre-gm, gm, post-gm or T1:T2.
    #[arg(long, default_value = "full,pre-gm,gm,post-gm")]
    pub window: String,
    #[arg(long, default_value = "ar")]
    pub benchmark: String,
    /// Half-width of local windows, in periods.
    #[arg(long, default_value_t = 70)]
    pub delta: usize,
    /// Fixed window compared with local bandwidths.
    #[arg(long, default_value_t = 120)]
    pub rolling_window: usize,
    /// Last date of the by-start-date series.
    #[arg(long)]
    pub end: Option<String>,
    /// Two method labels for the relative local MSFE.
    #[arg(long)]
    pub pair: Option<String>,
    /// Output CSV; a directory for `--metric all`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// FRED-MD layout CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Drop sparse predictors and trim the ragged edge first.
    #[arg(long)]
    pub clean: bool,
    /// Series never dropped when cleaning.
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub max_missing: f64,
    #[arg(long)]
    pub no_housing_remap: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
