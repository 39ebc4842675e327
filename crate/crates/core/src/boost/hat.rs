//! Trace of the boosting operator in factored form.
//!
//! Every boosting fit is linear in the response. On the kernel support the
//! operator is `B_m = U C_m U' W`, where the columns of `U` are the constant
//! and the selected learner columns (plus their time-interaction columns for
//! the local-linear learner) and `W` holds the kernel weights. With
//! `G = U' W U` the recursion `B_m = B_{m-1} + nu H (I - B_{m-1})` becomes
//! `C <- C + nu (P - P G C)` with `H = U P U' W`, and `trace(B_m) =
//! trace(C G)`. Only rows of `C` touched by `P` change, so an iteration
//! costs `O(K^2)` for `K` basis columns instead of `O(n^2)`.

use std::collections::HashMap;

use crate::stats::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Basis {
    Column(usize),
    TimeColumn(usize),
}

pub(crate) struct HatTracker {
    weights: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<Basis, usize>,
    gram: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    df: f64,
}

impl HatTracker {
    /// Starts from the weighted-mean operator, whose trace is one.
    pub fn new(weights: &[f64]) -> Self {
        let ones = vec![1.0; weights.len()];
        let total = dot(weights, &ones);
        HatTracker {
            weights: weights.to_vec(),
            vectors: vec![ones],
            index: HashMap::new(),
            gram: vec![vec![total]],
            c: vec![vec![1.0 / total]],
            df: 1.0,
        }
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    /// Index of a basis column, adding it with `make()` on first use.
    pub fn ensure(&mut self, key: Basis, make: impl FnOnce() -> Vec<f64>) -> usize {
        if let Some(&k) = self.index.get(&key) {
            return k;
        }
        let v = make();
        let wv: Vec<f64> = v.iter().zip(&self.weights).map(|(a, w)| a * w).collect();
        let k = self.vectors.len();
        let row: Vec<f64> = self.vectors.iter().map(|u| dot(&wv, u)).collect();
        for (g, &r) in self.gram.iter_mut().zip(&row) {
            g.push(r);
        }
        let mut new_row = row;
        new_row.push(dot(&wv, &v));
        self.gram.push(new_row);
        for row in &mut self.c {
            row.push(0.0);
        }
        self.c.push(vec![0.0; k + 1]);
        self.vectors.push(v);
        self.index.insert(key, k);
        k
    }

    /// Applies one boosting step whose learner projects onto the basis
    /// columns `idx` (one for local-constant, two for local-linear).
    pub fn step(&mut self, nu: f64, idx: &[usize]) {
        let kdim = self.c.len();
        // rows idx of E' - G[idx, :] C
        let mut rows: Vec<Vec<f64>> = idx
            .iter()
            .map(|&r| {
                let mut out = vec![0.0; kdim];
                for (a, &g) in self.gram[r].iter().enumerate() {
                    if g != 0.0 {
                        for (o, &cv) in out.iter_mut().zip(&self.c[a]) {
                            *o -= g * cv;
                        }
                    }
                }
                out[r] += 1.0;
                out
            })
            .collect();
        let m = |i: usize, j: usize| self.gram[idx[i]][idx[j]];
        match idx.len() {
            1 => {
                let inv = 1.0 / m(0, 0);
                for v in &mut rows[0] {
                    *v *= nu * inv;
                }
            }
            2 => {
                let (a, b, e) = (m(0, 0), m(0, 1), m(1, 1));
                let det = a * e - b * b;
                let (i00, i01, i11) = (e / det, -b / det, a / det);
                let (r0, r1) = (rows[0].clone(), rows[1].clone());
                for k in 0..kdim {
                    rows[0][k] = nu * (i00 * r0[k] + i01 * r1[k]);
                    rows[1][k] = nu * (i01 * r0[k] + i11 * r1[k]);
                }
            }
            _ => unreachable!("learners project onto one or two columns"),
        }
        for (&r, delta) in idx.iter().zip(&rows) {
            let mut change = 0.0;
            for (b, &dv) in delta.iter().enumerate() {
                self.c[r][b] += dv;
                change += dv * self.gram[b][r];
            }
            self.df += change;
        }
    }
}
