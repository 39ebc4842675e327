//! Expanding-window forecast evaluation: the pseudo-real-time driver, the
//! forecast log and relative accuracy metrics.

mod log;
mod metrics;
mod run;
mod synthetic;

pub use self::log::{ForecastFailure, ForecastLog, ForecastRecord};
pub use metrics::{
    local_bandwidth, local_msfe, metric_series, msfe_by_start_date, paired_squared_errors,
    relative_msfe, relative_table, rl_msfe, rolling_bandwidth, sse_pair, write_series_csv,
    write_tables_csv, Cell, EvalWindow, RelativeTable, SeriesMetric, SeriesPoint, SeriesSettings,
    SsePair, DEFAULT_DELTA, DEFAULT_ROLLING_WINDOW,
};
pub use run::{
    housing_remap, prepare_panel, run_expanding, ExpandingConfig, ExpandingRun, NamedMethod,
    PreparedPanel, DEFAULT_INITIAL_WINDOW, DEFAULT_LAGS, DEFAULT_MAX_MISSING,
};
pub use synthetic::{factor_coefficient, synthetic_factor_panel, SyntheticSpec, FREDMD_TARGETS};
