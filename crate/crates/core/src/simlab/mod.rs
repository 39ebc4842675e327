//! Simulation designs and the Monte Carlo harness.

mod dgp;
mod mc;

pub use dgp::{
    break_date, coefficient_path, coefficient_paths, lgt, predictor_innovations, random_walk_sd,
    simulate, toeplitz_transition, DgpSpec, Innovation, Sample, VarianceBreak, BASE_COEFFICIENT,
    BURN_IN, DGP_COUNT, RHO,
};
pub use mc::{
    forecast_problem, monte_carlo, replication_rng, write_table, McResult, RepRecord, SIM_LAGS,
};
