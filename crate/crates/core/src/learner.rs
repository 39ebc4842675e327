//! Componentwise kernel-weighted base learners.
//!
//! Both learners regress a working residual `r` on a single column `x` by
//! weighted least squares. The local-constant learner fits one coefficient;
//! the local-linear learner fits a level and a slope in rescaled time, i.e.
//! regresses `r` on `(x, x * (t - u))`. Weights may be normalized or raw:
//! every estimate is a ratio of weighted sums and does not depend on the
//! overall weight scale.

use serde::{Deserialize, Serialize};

/// Above this condition number the local-linear Gram matrix is treated as
/// singular.
pub const LL_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcCoef {
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlCoef {
    pub alpha: f64,
    pub alpha_dot: f64,
}

/// Local-constant fit `alpha = sum w x r / sum w x^2`.
///
/// Returns `None` when the weighted second moment of `x` is zero; the
/// caller skips the column.
pub fn lc_fit(x: &[f64], r: &[f64], w: &[f64]) -> Option<LcCoef> {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() {
        num += w[i] * x[i] * r[i];
        den += w[i] * x[i] * x[i];
    }
    lc_from_moments(num, den)
}

pub(crate) fn lc_from_moments(cross: f64, second: f64) -> Option<LcCoef> {
    (second > 0.0 && second.is_finite()).then(|| LcCoef {
        alpha: cross / second,
    })
}

/// The symmetric 2x2 weighted Gram matrix `[[a, b], [b, e]]` of
/// `(x, x * (t - u))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Gram2 {
    pub a: f64,
    pub b: f64,
    pub e: f64,
}

impl Gram2 {
    pub fn condition(&self) -> f64 {
        let mid = 0.5 * (self.a + self.e);
        let rad = (0.25 * (self.a - self.e).powi(2) + self.b * self.b).sqrt();
        let (hi, lo) = (mid + rad, mid - rad);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn is_solvable(&self) -> bool {
        self.a > 0.0 && self.condition() <= LL_CONDITION_LIMIT
    }

    fn apply_inverse(&self, c1: f64, c2: f64) -> (f64, f64) {
        let det = self.a * self.e - self.b * self.b;
        (
            (self.e * c1 - self.b * c2) / det,
            (self.a * c2 - self.b * c1) / det,
        )
    }

    /// Adjugate solve followed by one step of iterative refinement.
    pub fn solve(&self, c1: f64, c2: f64) -> (f64, f64) {
        let (t1, t2) = self.apply_inverse(c1, c2);
        let r1 = c1 - (self.a * t1 + self.b * t2);
        let r2 = c2 - (self.b * t1 + self.e * t2);
        let (d1, d2) = self.apply_inverse(r1, r2);
        (t1 + d1, t2 + d2)
    }
}

/// Local-linear fit: minimizes `sum w (r - a x - d x (t - u))^2`.
///
/// Returns `None` when the Gram matrix is singular or its condition number
/// exceeds [`LL_CONDITION_LIMIT`]; the caller then falls back to
/// [`lc_fit`] with a zero slope.
pub fn ll_fit(x: &[f64], r: &[f64], w: &[f64], times: &[f64], u: f64) -> Option<LlCoef> {
    let (mut a, mut b, mut e, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let d = times[i] - u;
        let wx = w[i] * x[i];
        a += wx * x[i];
        b += wx * x[i] * d;
        e += wx * x[i] * d * d;
        c1 += wx * r[i];
        c2 += wx * d * r[i];
    }
    let g = Gram2 { a, b, e };
    g.is_solvable().then(|| {
        let (alpha, alpha_dot) = g.solve(c1, c2);
        LlCoef { alpha, alpha_dot }
    })
}

/// Local-linear fit with the singular fallback applied. The flag reports
/// whether the fallback was used.
pub fn ll_fit_or_fallback(
    x: &[f64],
    r: &[f64],
    w: &[f64],
    times: &[f64],
    u: f64,
) -> Option<(LlCoef, bool)> {
    match ll_fit(x, r, w, times, u) {
        Some(c) => Some((c, false)),
        None => lc_fit(x, r, w).map(|c| {
            (
                LlCoef {
                    alpha: c.alpha,
                    alpha_dot: 0.0,
                },
                true,
            )
        }),
    }
}

/// Coefficients of either learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Coef {
    Lc(LcCoef),
    Ll(LlCoef),
}

impl Coef {
    pub fn level(&self) -> f64 {
        match self {
            Coef::Lc(c) => c.alpha,
            Coef::Ll(c) => c.alpha,
        }
    }

    pub fn slope(&self) -> f64 {
        match self {
            Coef::Lc(_) => 0.0,
            Coef::Ll(c) => c.alpha_dot,
        }
    }
}

/// Weighted sum of squared residuals after fitting `coef` to `r`.
pub fn learner_ssr(x: &[f64], r: &[f64], w: &[f64], coef: &Coef, times: &[f64], u: f64) -> f64 {
    (0..x.len())
        .map(|i| {
            let fit = (coef.level() + coef.slope() * (times[i] - u)) * x[i];
            w[i] * (r[i] - fit).powi(2)
        })
        .sum()
}
