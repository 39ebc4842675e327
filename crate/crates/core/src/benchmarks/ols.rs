//! Least-squares forecasters: direct autoregressions and the diffusion-index
//! regression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mean;

/// Relative singular-value threshold below which normal equations count as
/// singular.
const SINGULAR_RCOND: f64 = 1e-10;

/// Diagonal jitter for singular diffusion-index regressions.
pub const DI_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArWindow {
    Expanding,
    /// The most recent `n` rows.
    Rolling(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArSpec {
    pub order: usize,
    pub window: ArWindow,
}

impl ArSpec {
    pub fn new(order: usize, window: ArWindow) -> Result<Self> {
        if order == 0 {
            return Err(Error::config("AR order must be at least 1"));
        }
        if let ArWindow::Rolling(n) = window {
            if n <= order + 2 {
                return Err(Error::config(format!(
                    "rolling window of {n} rows is too short for AR({order})"
                )));
            }
        }
        Ok(ArSpec { order, window })
    }
}

/// A least-squares forecast. `singular` marks a fit whose normal equations
/// were (numerically) singular and was replaced by the fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsForecast {
    pub prediction: f64,
    /// Intercept first, then one coefficient per regressor.
    pub coefficients: Vec<f64>,
    pub singular: bool,
}

fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] })
}

fn is_singular(x: &DMatrix<f64>) -> bool {
    let s = x.singular_values();
    let max = s.max();
    !(max > 0.0) || s.min() <= SINGULAR_RCOND * max
}

fn least_squares(x: &DMatrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let beta = x
        .clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 0.0)
        .map_err(|e| Error::config(format!("least squares failed: {e}")))?;
    Ok(beta.iter().copied().collect())
}

fn ridge(x: &DMatrix<f64>, y: &[f64], jitter: f64) -> Result<Vec<f64>> {
    let mut g = x.transpose() * x;
    for i in 0..g.nrows() {
        g[(i, i)] += jitter;
    }
    let rhs = x.transpose() * DVector::from_column_slice(y);
    let chol = g.cholesky().ok_or(Error::AllColumnsDegenerate)?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

fn predict(beta: &[f64], x_new: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x_new).map(|(b, x)| b * x).sum::<f64>()
}

fn check_shapes(x: &DMatrix<f64>, y: &[f64], x_new: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.nrows(),
        });
    }
    if x_new.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: x_new.len(),
        });
    }
    if x.nrows() < x.ncols() + 2 {
        return Err(Error::insufficient(
            "least-squares forecast",
            x.ncols() + 2,
            x.nrows(),
        ));
    }
    Ok(())
}

/// OLS with intercept of `y` on `x`, predicting at `x_new`. A singular fit
/// falls back to the sample mean of `y`.
pub fn ols_or_mean(x: &DMatrix<f64>, y: &[f64], x_new: &[f64]) -> Result<OlsForecast> {
    check_shapes(x, y, x_new)?;
    let xi = with_intercept(x);
    if is_singular(&xi) {
        log::warn!("singular least-squares fit; forecasting the window mean");
        let m = mean(y);
        let mut coefficients = vec![0.0; xi.ncols()];
        coefficients[0] = m;
        return Ok(OlsForecast {
            prediction: m,
            coefficients,
            singular: true,
        });
    }
    let beta = least_squares(&xi, y)?;
    Ok(OlsForecast {
        prediction: predict(&beta, x_new),
        coefficients: beta,
        singular: false,
    })
}

/// OLS with intercept; a singular fit is solved with `DI_RIDGE` added to
/// the Gram diagonal.
pub fn ols_or_ridge(x: &DMatrix<f64>, y: &[f64], x_new: &[f64]) -> Result<OlsForecast> {
    check_shapes(x, y, x_new)?;
    let xi = with_intercept(x);
    let singular = is_singular(&xi);
    let beta = if singular {
        log::warn!("singular diffusion-index regression; adding ridge jitter {DI_RIDGE}");
        ridge(&xi, y, DI_RIDGE)?
    } else {
        least_squares(&xi, y)?
    };
    Ok(OlsForecast {
        prediction: predict(&beta, x_new),
        coefficients: beta,
        singular,
    })
}

/// Direct `h`-step regression rows for a single series: the response at `t`
/// against `y[t-h], ..., y[t-h-p+1]` and, optionally, the rows of `extra`
/// dated `t-h`. Also returns the regressors for forecasting `h` steps past
/// the last observation.
fn direct_rows(
    y: &[f64],
    extra: Option<&DMatrix<f64>>,
    p: usize,
    h: usize,
) -> Result<(DMatrix<f64>, Vec<f64>, Vec<f64>)> {
    let n = y.len();
    let k = extra.map_or(0, |e| e.ncols());
    if let Some(e) = extra {
        if e.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: e.nrows(),
            });
        }
    }
    let first = h + p - 1;
    if n <= first {
        return Err(Error::insufficient("direct autoregression", first + 1, n));
    }
    let rows = n - first;
    let regressors = |s: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..p).map(|j| y[s - j]).collect();
        if let Some(e) = extra {
            v.extend(e.row(s).iter());
        }
        v
    };
    let mut x = DMatrix::zeros(rows, p + k);
    for (r, t) in (first..n).enumerate() {
        for (c, v) in regressors(t - h).into_iter().enumerate() {
            x[(r, c)] = v;
        }
    }
    Ok((x, y[first..].to_vec(), regressors(n - 1)))
}

/// Direct `h`-step AR(p) forecast of `y` beyond its last observation:
/// least squares of `y_t` on `(1, y_{t-h}, ..., y_{t-h-p+1})` over the window.
pub fn ar_forecast(y: &[f64], spec: &ArSpec, h: usize) -> Result<OlsForecast> {
    if h == 0 {
        return Err(Error::config("forecast horizon must be at least 1"));
    }
    let (x, resp, x_new) = direct_rows(y, None, spec.order, h)?;
    let n = resp.len();
    let start = match spec.window {
        ArWindow::Expanding => 0,
        ArWindow::Rolling(len) if len <= n => n - len,
        ArWindow::Rolling(len) => {
            return Err(Error::insufficient("rolling autoregression", len, n))
        }
    };
    ols_or_mean(
        &x.rows(start, n - start).into_owned(),
        &resp[start..],
        &x_new,
    )
}

/// Diffusion-index forecast: least squares of `y_t` on `(1, y_{t-h}, ...,
/// y_{t-h-3}, F_{t-h})`, with `factors` aligned row by row with `y`.
pub fn di_forecast(y: &[f64], factors: &DMatrix<f64>, h: usize) -> Result<OlsForecast> {
    if h == 0 {
        return Err(Error::config("forecast horizon must be at least 1"));
    }
    let (x, resp, x_new) = direct_rows(y, Some(factors), 4, h)?;
    ols_or_ridge(&x, &resp, &x_new)
}
