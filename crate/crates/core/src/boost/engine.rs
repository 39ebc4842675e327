//! Boosting loops over a gathered kernel window.
//!
//! Only rows with positive kernel weight take part in a fit, so they are
//! copied into contiguous column-major buffers once. Weights are the kernel
//! profile `K((t - u) / b)` without normalization; every quantity below is a
//! ratio of weighted sums, so the overall weight scale cancels.
//!
//! For squared loss the per-column cross moments with the residual are
//! updated in place after each step using cached cross-products with the
//! selected column, so an iteration costs `O(q)` plus `O(q n)` the first
//! time a column is selected.

use std::collections::HashMap;

use super::hat::{Basis, HatTracker};
use super::{Loss, Step};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::learner::{lc_from_moments, Coef, Gram2, LcCoef, LlCoef};
use crate::panel::Design;
use crate::stats::dot;

pub(crate) struct Window {
    pub w: Vec<f64>,
    pub d: Vec<f64>,
    pub y: Vec<f64>,
    x: Vec<f64>,
    pub m: usize,
    pub q: usize,
    pub active: Vec<bool>,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub wsum: f64,
    pub wsq: f64,
}

impl Window {
    /// Gathers the rows with positive weight at `u`. Rows at or after
    /// `cutoff` are excluded (held-out validation).
    pub fn build(
        design: &Design,
        u: f64,
        kernel: &KernelSpec,
        standardize: bool,
        cutoff: Option<usize>,
    ) -> Result<Window> {
        kernel.validate()?;
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::config(format!("evaluation time {u} outside [0, 1]")));
        }
        let n = design.n_rows();
        let q = design.n_cols();
        let times = design.times();
        let limit = cutoff.unwrap_or(n).min(n);
        let mut rows = Vec::new();
        let mut w = Vec::new();
        for (i, &t) in times.iter().enumerate().take(limit) {
            let k = kernel.profile_weight(t, u);
            if k > 0.0 {
                rows.push(i);
                w.push(k);
            }
        }
        if rows.is_empty() {
            return Err(Error::DegenerateWindow {
                bandwidth: kernel.bandwidth,
                u,
            });
        }
        let m = rows.len();
        let d: Vec<f64> = rows.iter().map(|&i| times[i] - u).collect();
        let y: Vec<f64> = rows.iter().map(|&i| design.response()[i]).collect();
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPanel(
                "non-finite response in the estimation window".into(),
            ));
        }
        let ones = vec![1.0; m];
        let wsum = dot(&w, &ones);
        let wsq = dot(&w, &w);
        let data = design.regressors().as_slice();
        let mut x = vec![0.0; m * q];
        let mut active = vec![false; q];
        let mut center = vec![0.0; q];
        let mut scale = vec![0.0; q];
        let mut buf = vec![0.0; m];
        for j in 0..q {
            let src = &data[j * n..(j + 1) * n];
            let col = &mut x[j * m..(j + 1) * m];
            for (c, &i) in col.iter_mut().zip(&rows) {
                *c = src[i];
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPanel(format!(
                    "non-finite regressor in column {j}"
                )));
            }
            if standardize {
                let mean = dot(col, &w) / wsum;
                for v in col.iter_mut() {
                    *v -= mean;
                }
                for ((b, &v), &wi) in buf.iter_mut().zip(col.iter()).zip(&w) {
                    *b = wi * v;
                }
                let sd = (dot(col, &buf) / wsum).sqrt();
                if sd > 0.0 && sd.is_finite() && sd > 1e-12 * mean.abs() {
                    for v in col.iter_mut() {
                        *v /= sd;
                    }
                    active[j] = true;
                    center[j] = mean;
                    scale[j] = sd;
                } else {
                    col.fill(0.0);
                }
            } else {
                for ((b, &v), &wi) in buf.iter_mut().zip(col.iter()).zip(&w) {
                    *b = wi * v;
                }
                let g = dot(col, &buf);
                active[j] = g > 0.0 && g.is_finite();
                scale[j] = 1.0;
            }
        }
        Ok(Window {
            w,
            d,
            y,
            x,
            m,
            q,
            active,
            center,
            scale,
            wsum,
            wsq,
        })
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.x[j * self.m..(j + 1) * self.m]
    }

    /// Kish effective sample size `(sum w)^2 / sum w^2`.
    pub fn effective_n(&self) -> f64 {
        self.wsum * self.wsum / self.wsq
    }

    /// Standardizes a raw regressor value for column `j`.
    pub fn transform(&self, j: usize, raw: f64) -> f64 {
        if self.active[j] {
            (raw - self.center[j]) / self.scale[j]
        } else {
            0.0
        }
    }

    fn weighted(&self, v: &[f64], out: &mut [f64]) {
        for ((o, &a), &w) in out.iter_mut().zip(v).zip(&self.w) {
            *o = a * w;
        }
    }

    fn weighted_ssr(&self, r: &[f64], buf: &mut [f64]) -> f64 {
        self.weighted(r, buf);
        dot(buf, r)
    }
}

pub(crate) struct PathRun {
    pub intercept: f64,
    pub steps: Vec<Step>,
    /// `sum w L(y, F)` for `m = 0..=iters`.
    pub loss_path: Vec<f64>,
    pub df_path: Option<Vec<f64>>,
}

fn first_active(win: &Window) -> Result<()> {
    if win.active.iter().any(|&a| a) {
        Ok(())
    } else {
        Err(Error::AllColumnsDegenerate)
    }
}

/// Largest score among active columns; strict comparison keeps the lowest
/// index on ties.
fn argmax(win: &Window, score: impl Fn(usize) -> f64) -> usize {
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    for j in (0..win.q).filter(|&j| win.active[j]) {
        let s = score(j);
        let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
        if best.is_none() || s > best_score {
            best = Some(j);
            best_score = s;
        }
    }
    best.expect("at least one active column")
}

/// Column cross-products `sum w x_j x_s d^k` for `k = 0..powers`.
fn cross_products(win: &Window, s: usize, powers: usize) -> Vec<Vec<f64>> {
    let mut v = vec![0.0; win.m];
    win.weighted(win.col(s), &mut v);
    let mut out = Vec::with_capacity(powers);
    for k in 0..powers {
        if k > 0 {
            for (a, &d) in v.iter_mut().zip(&win.d) {
                *a *= d;
            }
        }
        out.push(
            (0..win.q)
                .map(|j| {
                    if win.active[j] {
                        dot(win.col(j), &v)
                    } else {
                        0.0
                    }
                })
                .collect(),
        );
    }
    out
}

pub(crate) fn run_lc_squared(
    win: &Window,
    nu: f64,
    iters: usize,
    track_df: bool,
) -> Result<PathRun> {
    first_active(win)?;
    let (m, q) = (win.m, win.q);
    let intercept = dot(&win.w, &win.y) / win.wsum;
    let mut r: Vec<f64> = win.y.iter().map(|y| y - intercept).collect();
    let mut buf = vec![0.0; m];
    let mut c = vec![0.0; q];
    let mut sec = vec![0.0; q];
    win.weighted(&r, &mut buf);
    for j in 0..q {
        if win.active[j] {
            c[j] = dot(win.col(j), &buf);
        }
    }
    for j in 0..q {
        if win.active[j] {
            win.weighted(win.col(j), &mut buf);
            sec[j] = dot(win.col(j), &buf);
        }
    }
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut hat = track_df.then(|| HatTracker::new(&win.w));
    let mut df_path = track_df.then(|| vec![1.0]);
    let mut loss_path = vec![0.5 * win.weighted_ssr(&r, &mut buf)];
    let mut steps = Vec::with_capacity(iters);
    for _ in 0..iters {
        let s = argmax(win, |j| c[j] * c[j] / sec[j]);
        let alpha = c[s] / sec[s];
        let xs = win.col(s);
        for (ri, &xi) in r.iter_mut().zip(xs) {
            *ri -= nu * alpha * xi;
        }
        let gram = cache
            .entry(s)
            .or_insert_with(|| cross_products(win, s, 1).remove(0));
        for j in 0..q {
            c[j] -= nu * alpha * gram[j];
        }
        steps.push(Step {
            column: s,
            coef: Coef::Lc(LcCoef { alpha }),
            fallback: false,
        });
        loss_path.push(0.5 * win.weighted_ssr(&r, &mut buf));
        if let (Some(h), Some(p)) = (hat.as_mut(), df_path.as_mut()) {
            let k = h.ensure(Basis::Column(s), || xs.to_vec());
            h.step(nu, &[k]);
            p.push(h.df());
        }
    }
    Ok(PathRun {
        intercept,
        steps,
        loss_path,
        df_path,
    })
}

pub(crate) fn run_ll_squared(
    win: &Window,
    nu: f64,
    iters: usize,
    track_df: bool,
) -> Result<PathRun> {
    first_active(win)?;
    let (m, q) = (win.m, win.q);
    let intercept = dot(&win.w, &win.y) / win.wsum;
    let mut r: Vec<f64> = win.y.iter().map(|y| y - intercept).collect();
    let mut buf = vec![0.0; m];
    let mut buf_d = vec![0.0; m];
    let mut grams = vec![
        Gram2 {
            a: 0.0,
            b: 0.0,
            e: 0.0
        };
        q
    ];
    let mut solvable = vec![false; q];
    let mut c1 = vec![0.0; q];
    let mut c2 = vec![0.0; q];
    win.weighted(&r, &mut buf);
    for i in 0..m {
        buf_d[i] = buf[i] * win.d[i];
    }
    for j in 0..q {
        if win.active[j] {
            c1[j] = dot(win.col(j), &buf);
            c2[j] = dot(win.col(j), &buf_d);
        }
    }
    for j in 0..q {
        if !win.active[j] {
            continue;
        }
        let x = win.col(j);
        for i in 0..m {
            buf[i] = win.w[i] * x[i] * x[i];
            buf_d[i] = buf[i] * win.d[i];
        }
        let g = Gram2 {
            a: buf.iter().sum(),
            b: buf_d.iter().sum(),
            e: dot(&buf_d, &win.d),
        };
        solvable[j] = g.is_solvable();
        grams[j] = g;
    }
    let fit = |j: usize, c1: f64, c2: f64| -> (f64, f64, f64) {
        let g = &grams[j];
        if solvable[j] {
            let (a, ad) = g.solve(c1, c2);
            (a, ad, a * c1 + ad * c2)
        } else {
            let a = c1 / g.a;
            (a, 0.0, a * c1)
        }
    };
    let mut cache: HashMap<usize, Vec<Vec<f64>>> = HashMap::new();
    let mut hat = track_df.then(|| HatTracker::new(&win.w));
    let mut df_path = track_df.then(|| vec![1.0]);
    let mut loss_path = vec![0.5 * win.weighted_ssr(&r, &mut buf)];
    let mut steps = Vec::with_capacity(iters);
    for _ in 0..iters {
        let s = argmax(win, |j| fit(j, c1[j], c2[j]).2);
        let (alpha, alpha_dot, _) = fit(s, c1[s], c2[s]);
        let xs = win.col(s);
        for i in 0..m {
            r[i] -= nu * (alpha + alpha_dot * win.d[i]) * xs[i];
        }
        let p = cache.entry(s).or_insert_with(|| cross_products(win, s, 3));
        for j in 0..q {
            c1[j] -= nu * (alpha * p[0][j] + alpha_dot * p[1][j]);
            c2[j] -= nu * (alpha * p[1][j] + alpha_dot * p[2][j]);
        }
        let fallback = !solvable[s];
        steps.push(Step {
            column: s,
            coef: Coef::Ll(LlCoef { alpha, alpha_dot }),
            fallback,
        });
        loss_path.push(0.5 * win.weighted_ssr(&r, &mut buf));
        if let (Some(h), Some(path)) = (hat.as_mut(), df_path.as_mut()) {
            let k0 = h.ensure(Basis::Column(s), || xs.to_vec());
            if fallback {
                h.step(nu, &[k0]);
            } else {
                let k1 = h.ensure(Basis::TimeColumn(s), || {
                    xs.iter().zip(&win.d).map(|(x, d)| x * d).collect()
                });
                h.step(nu, &[k0, k1]);
            }
            path.push(h.df());
        }
    }
    Ok(PathRun {
        intercept,
        steps,
        loss_path,
        df_path,
    })
}

/// Local-constant boosting on the pointwise negative gradient of `loss`.
pub(crate) fn run_generic(win: &Window, loss: Loss, nu: f64, iters: usize) -> Result<PathRun> {
    first_active(win)?;
    let (m, q) = (win.m, win.q);
    let intercept = loss
        .intercept(&win.y, &win.w)
        .ok_or(Error::DegenerateWindow {
            bandwidth: f64::NAN,
            u: f64::NAN,
        })?;
    let mut f = vec![intercept; m];
    let mut buf = vec![0.0; m];
    let mut sec = vec![0.0; q];
    for j in 0..q {
        if win.active[j] {
            win.weighted(win.col(j), &mut buf);
            sec[j] = dot(win.col(j), &buf);
        }
    }
    let total_loss = |f: &[f64]| -> f64 {
        let l: Vec<f64> = (0..m)
            .map(|i| win.w[i] * loss.value(win.y[i], f[i]))
            .collect();
        crate::stats::pairwise_sum(&l)
    };
    let mut loss_path = vec![total_loss(&f)];
    let mut steps = Vec::with_capacity(iters);
    let mut c = vec![0.0; q];
    for _ in 0..iters {
        for i in 0..m {
            buf[i] = win.w[i] * loss.negative_gradient(win.y[i], f[i]);
        }
        for j in 0..q {
            if win.active[j] {
                c[j] = dot(win.col(j), &buf);
            }
        }
        let s = argmax(win, |j| c[j] * c[j] / sec[j]);
        let coef = lc_from_moments(c[s], sec[s]).ok_or(Error::AllColumnsDegenerate)?;
        for (fi, &xi) in f.iter_mut().zip(win.col(s)) {
            *fi += nu * coef.alpha * xi;
        }
        steps.push(Step {
            column: s,
            coef: Coef::Lc(coef),
            fallback: false,
        });
        loss_path.push(total_loss(&f));
    }
    Ok(PathRun {
        intercept,
        steps,
        loss_path,
        df_path: None,
    })
}
