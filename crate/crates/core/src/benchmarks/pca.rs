//! Principal-component factors.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    /// `n x k` factor scores, one column per component.
    pub scores: DMatrix<f64>,
    /// `p x k` unit-norm loadings.
    pub loadings: DMatrix<f64>,
    /// Covariance eigenvalues of the retained components, decreasing.
    pub eigenvalues: Vec<f64>,
    /// Share of total variance explained by each retained component.
    pub explained: Vec<f64>,
}

impl FactorSet {
    pub fn k(&self) -> usize {
        self.scores.ncols()
    }
}

/// Column means and standard deviations (divisor `n`). A constant column
/// gets unit scale so it standardizes to zero.
pub fn column_moments(x: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let means: Vec<f64> = x.column_iter().map(|c| c.sum() / n).collect();
    let sds = x
        .column_iter()
        .zip(&means)
        .map(|(c, m)| {
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (means, sds)
}

pub fn standardize(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (means, sds) = column_moments(x);
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - means[j]) / sds[j])
}

/// The first `k` principal components of a column-standardized window.
///
/// Loadings are eigenvectors of `X'X / n`, each signed so that its largest
/// absolute entry is positive; scores are `X` times the loadings. When `k`
/// exceeds the numerical rank, only the nonzero components are returned.
pub fn pca_factors(x: &DMatrix<f64>, k: usize) -> Result<FactorSet> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::insufficient("principal components", 1, 0));
    }
    if k == 0 {
        return Ok(FactorSet {
            scores: DMatrix::zeros(n, 0),
            loadings: DMatrix::zeros(p, 0),
            eigenvalues: vec![],
            explained: vec![],
        });
    }
    let cov = x.transpose() * x / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let top = eig.eigenvalues[order[0]].max(0.0);
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let rank = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] > RANK_TOLERANCE * top)
        .count();
    let kk = k.min(rank).min(n);
    if kk < k {
        log::warn!("requested {k} factors but the window has rank {rank}; using {kk}");
    }
    let mut loadings = DMatrix::zeros(p, kk);
    for (c, &i) in order.iter().take(kk).enumerate() {
        let v = eig.eigenvectors.column(i);
        let lead = v
            .iter()
            .fold(0.0f64, |acc, &e| if e.abs() > acc.abs() { e } else { acc });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        loadings.set_column(c, &(v * sign));
    }
    let eigenvalues: Vec<f64> = order.iter().take(kk).map(|&i| eig.eigenvalues[i]).collect();
    Ok(FactorSet {
        scores: x * &loadings,
        explained: eigenvalues.iter().map(|v| v / total).collect(),
        loadings,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::*;

    fn random(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn rank_one_panel_is_reconstructed() {
        let f = random(40, 1, 1);
        let lambda = random(1, 6, 2);
        let x = standardize(&(&f * &lambda));
        let fs = pca_factors(&x, 1).unwrap();
        let recon = &fs.scores * fs.loadings.transpose();
        assert!((recon - &x).abs().max() < 1e-10);
        // Scores are proportional to the centered factor.
        let fc: Vec<f64> = {
            let m = f.mean();
            f.iter().map(|v| v - m).collect()
        };
        let ratio = fs.scores[(0, 0)] / fc[0];
        for (s, v) in fs.scores.column(0).iter().zip(&fc) {
            assert_relative_eq!(*s, ratio * v, epsilon = 1e-9);
        }
        assert_relative_eq!(fs.explained[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn excess_factors_are_dropped() {
        let f = random(40, 2, 1);
        let lambda = random(2, 6, 2);
        let x = standardize(&(&f * &lambda));
        assert_eq!(pca_factors(&x, 5).unwrap().k(), 2);
        assert_eq!(pca_factors(&x, 0).unwrap().k(), 0);
    }

    #[test]
    fn score_gram_is_diagonal_and_loadings_are_signed() {
        let x = standardize(&random(50, 20, 3));
        let fs = pca_factors(&x, 8).unwrap();
        let g = fs.scores.transpose() * &fs.scores;
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(g[(i, j)].abs() < 1e-8, "({i},{j}) = {}", g[(i, j)]);
                }
            }
            assert_relative_eq!(g[(i, i)], 50.0 * fs.eigenvalues[i], max_relative = 1e-10);
            let col = fs.loadings.column(i);
            let lead = col
                .iter()
                .cloned()
                .fold(0.0f64, |a, e| if e.abs() > a.abs() { e } else { a });
            assert!(lead > 0.0);
        }
        assert!(fs.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    /// Power iteration with deflation.
    fn power_components(cov: &DMatrix<f64>, k: usize) -> Vec<(f64, DVector<f64>)> {
        let mut a = cov.clone();
        let mut out = Vec::new();
        for c in 0..k {
            let mut v = DVector::from_fn(a.nrows(), |i, _| 1.0 + ((i + c) % 7) as f64);
            v /= v.norm();
            let mut lambda = 0.0;
            for _ in 0..100_000 {
                let w = &a * &v;
                let next = w.norm();
                let w = w / next;
                let done = (&w - &v).norm() < 1e-14 || (&w + &v).norm() < 1e-14;
                v = w;
                lambda = next;
                if done {
                    break;
                }
            }
            a -= lambda * &v * v.transpose();
            out.push((lambda, v));
        }
        out
    }

    #[test]
    fn scores_match_power_iteration() {
        let x = standardize(&random(50, 20, 5));
        let fs = pca_factors(&x, 5).unwrap();
        let cov = x.transpose() * &x / 50.0;
        for (c, (lambda, v)) in power_components(&cov, 5).into_iter().enumerate() {
            assert_relative_eq!(fs.eigenvalues[c], lambda, max_relative = 1e-8);
            let scores = &x * v;
            let sign = if scores.dot(&fs.scores.column(c)) < 0.0 {
                -1.0
            } else {
                1.0
            };
            let diff = (scores * sign - fs.scores.column(c)).abs().max();
            assert!(diff < 1e-8, "component {c}: {diff}");
        }
    }

    #[test]
    fn constant_columns_standardize_to_zero() {
        let mut x = random(10, 3, 1);
        x.column_mut(1).fill(4.0);
        let s = standardize(&x);
        assert!(s.column(1).iter().all(|&v| v == 0.0));
        let (m, sd) = column_moments(&s);
        assert!(m.iter().all(|v| v.abs() < 1e-12));
        assert_relative_eq!(sd[0], 1.0, epsilon = 1e-12);
    }
}
