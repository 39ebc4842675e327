//! Componentwise L2 boosting for high-dimensional time-varying-parameter
//! regressions.
//!
//! The base learners are one-column kernel-weighted least squares fits in
//! rescaled time: a local-constant learner (one coefficient per column) and a
//! local-linear learner (level plus slope in rescaled time). Around the
//! boosting engine sit the pieces needed to run forecasting experiments end
//! to end:
//!
//! - [`panel`]: time-indexed panels, FRED-MD-style transforms, targets and
//!   lagged design matrices.
//! - [`kernel`]: kernel families and realized weight vectors.
//! - [`learner`]: the local-constant and local-linear componentwise fits.
//! - [`boost`]: LC-Boost, LL-Boost, generic-loss boosting, hat-matrix trace
//!   and AICc stopping.
//! - [`tune`]: bandwidth selection by out-of-sample or leave-one-out CV.
//! - [`benchmarks`]: AR, lasso, principal-component factors, diffusion index
//!   and the named forecasting methods.
//! - [`simlab`]: the fourteen simulation designs and the Monte Carlo harness.
//! - [`evalharness`]: expanding-window forecasting and evaluation metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod benchmarks;
pub mod boost;
pub mod error;
pub mod evalharness;
pub mod kernel;
pub mod learner;
pub mod panel;
mod par;
pub mod simlab;
pub mod stats;
pub mod tune;

pub use error::{Error, Result};
