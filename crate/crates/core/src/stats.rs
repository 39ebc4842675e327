//! Small numerical helpers shared across modules.

/// Pairwise (cascade) summation. Rounding error grows as O(log n) instead of
/// O(n), and the result does not depend on how the input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Dot product with four interleaved accumulators combined in a fixed
/// order, so the result is deterministic for a given input.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Smallest `y` whose cumulative weight reaches `tau` of the total; this is a
/// minimizer of the weighted pinball loss `sum w_i rho_tau(y_i - c)`.
///
/// Zero-weight observations are ignored. Returns `None` when the total
/// weight is not positive.
pub fn weighted_quantile(values: &[f64], weights: &[f64], tau: f64) -> Option<f64> {
    debug_assert_eq!(values.len(), weights.len());
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&y, &w)| (y, w))
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if pairs.is_empty() || total <= 0.0 {
        return None;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let target = tau * total;
    let mut acc = 0.0;
    for &(y, w) in &pairs {
        acc += w;
        if acc >= target * (1.0 - 1e-15) {
            return Some(y);
        }
    }
    pairs.last().map(|p| p.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 1.3).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-13);
        assert_eq!(dot(&[], &[]), 0.0);
    }

    #[test]
    fn weighted_median_of_symmetric_sample() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let w = [1.0; 5];
        assert_eq!(weighted_quantile(&y, &w, 0.5), Some(3.0));
        assert_eq!(weighted_quantile(&y, &w, 0.9), Some(5.0));
        assert_eq!(weighted_quantile(&y, &[0.0; 5], 0.5), None);
    }

    #[test]
    fn weighted_quantile_minimizes_pinball_loss() {
        let y = [0.3, -1.2, 2.5, 0.9, 4.1, -0.4, 1.7];
        let w = [0.5, 1.0, 2.0, 0.1, 0.7, 1.3, 0.9];
        for &tau in &[0.1, 0.5, 0.9] {
            let q = weighted_quantile(&y, &w, tau).unwrap();
            let loss = |c: f64| -> f64 {
                y.iter()
                    .zip(&w)
                    .map(|(&yi, &wi)| {
                        let e = yi - c;
                        wi * if e >= 0.0 { tau * e } else { (tau - 1.0) * e }
                    })
                    .sum()
            };
            for &c in &y {
                assert!(loss(q) <= loss(c) + 1e-12, "tau {tau}: q {q} vs {c}");
            }
        }
    }
}
