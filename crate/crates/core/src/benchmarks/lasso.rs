//! Lasso by cyclic coordinate descent, with the penalty chosen by BIC.
//!
//! The objective on standardized columns `x` and centered response `y` is
//! `(1/2n) |y - x b|^2 + lambda |b|_1`. Coefficients are reported on the
//! original scale with an unpenalized intercept.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::pca::column_moments;
use crate::error::{Error, Result};
use crate::stats::dot;

pub const LASSO_TOLERANCE: f64 = 1e-7;
pub const LASSO_MAX_SWEEPS: usize = 100_000;
pub const LASSO_PATH_LENGTH: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub bic: Vec<f64>,
}

impl LassoFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    pub fn active(&self) -> usize {
        self.coefficients.iter().filter(|&&b| b != 0.0).count()
    }
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Column-major standardized problem.
pub struct LassoProblem {
    cols: Vec<Vec<f64>>,
    /// `x_j'x_j / n` per column; zero for constant columns.
    norms: Vec<f64>,
    y: Vec<f64>,
    n: usize,
}

impl LassoProblem {
    /// Takes columns already standardized and a centered response.
    pub fn new(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: x.nrows(),
            });
        }
        let n = y.len();
        if n == 0 {
            return Err(Error::insufficient("lasso", 1, 0));
        }
        let cols: Vec<Vec<f64>> = x
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        let norms = cols.iter().map(|c| dot(c, c) / n as f64).collect();
        Ok(LassoProblem {
            cols,
            norms,
            y: y.to_vec(),
            n,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Smallest penalty with an all-zero solution.
    pub fn lambda_max(&self) -> f64 {
        self.cols
            .iter()
            .map(|c| dot(c, &self.y).abs() / self.n as f64)
            .fold(0.0, f64::max)
    }

    pub fn objective(&self, beta: &[f64], lambda: f64) -> f64 {
        let r = self.residual(beta);
        dot(&r, &r) / (2.0 * self.n as f64) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.y.clone();
        for (c, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (ri, xi) in r.iter_mut().zip(c) {
                    *ri -= b * xi;
                }
            }
        }
        r
    }

    /// `x_j' r / n` for every column at `beta`.
    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let r = self.residual(beta);
        self.cols
            .iter()
            .map(|c| dot(c, &r) / self.n as f64)
            .collect()
    }

    /// Coordinate descent from `beta` until no coefficient moves by more
    /// than `LASSO_TOLERANCE` in a full sweep. Returns the sweep count.
    pub fn solve(&self, lambda: f64, beta: &mut [f64]) -> Result<usize> {
        let n = self.n as f64;
        let mut r = self.residual(beta);
        let mut last = f64::INFINITY;
        for sweep in 1..=LASSO_MAX_SWEEPS {
            let mut max_change = 0.0f64;
            for (j, c) in self.cols.iter().enumerate() {
                if self.norms[j] == 0.0 {
                    continue;
                }
                let old = beta[j];
                let z = dot(c, &r) / n + self.norms[j] * old;
                let new = soft_threshold(z, lambda) / self.norms[j];
                if new != old {
                    let delta = new - old;
                    for (ri, xi) in r.iter_mut().zip(c) {
                        *ri -= delta * xi;
                    }
                    beta[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            last = max_change;
            if max_change < LASSO_TOLERANCE {
                return Ok(sweep);
            }
        }
        Err(Error::NoConvergence {
            sweeps: LASSO_MAX_SWEEPS,
            max_change: last,
        })
    }
}

/// `count` penalties log-spaced from `lambda_max` down to `ratio * lambda_max`.
pub fn lambda_path(lambda_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lambda_max];
    }
    (0..count)
        .map(|i| lambda_max * ratio.powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// BIC `n log(SSR / n) + df log n`, with `df` the number of nonzero
/// coefficients.
pub fn bic(ssr: f64, df: usize, n: usize) -> f64 {
    let n = n as f64;
    n * (ssr.max(f64::MIN_POSITIVE) / n).ln() + df as f64 * n.ln()
}

/// Lasso on raw regressors: columns are standardized internally, a
/// warm-started descending path of `LASSO_PATH_LENGTH` penalties is
/// solved and the BIC-minimizing fit is returned on the original scale.
pub fn lasso_fit(x: &DMatrix<f64>, y: &[f64]) -> Result<LassoFit> {
    let (n, p) = x.shape();
    let ratio = if n > p { 1e-4 } else { 1e-2 };
    let (means, sds) = column_moments(x);
    let xs = DMatrix::from_fn(n, p, |i, j| (x[(i, j)] - means[j]) / sds[j]);
    let ybar = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let problem = LassoProblem::new(&xs, &yc)?;
    let lambdas = lambda_path(problem.lambda_max(), ratio, LASSO_PATH_LENGTH);
    let mut beta = vec![0.0; p];
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut bics = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        problem.solve(lambda, &mut beta)?;
        let r = problem.residual(&beta);
        let df = beta.iter().filter(|&&b| b != 0.0).count();
        let score = bic(dot(&r, &r), df, n);
        bics.push(score);
        if best.as_ref().is_none_or(|(b, _, _)| score < *b) {
            best = Some((score, i, beta.clone()));
        }
    }
    let (_, i, bs) = best.expect("non-empty path");
    let coefficients: Vec<f64> = bs.iter().zip(&sds).map(|(b, s)| b / s).collect();
    let intercept = ybar
        - coefficients
            .iter()
            .zip(&means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok(LassoFit {
        intercept,
        coefficients,
        lambda: lambdas[i],
        lambdas,
        bic: bics,
    })
}
