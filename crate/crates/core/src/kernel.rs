//! Kernel families and realized weights over rescaled time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on the closed support `|x| <= 1` so that grid points sitting
/// exactly on the window edge are not lost to rounding in `(t - u) / b`.
const SUPPORT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Uniform,
    Epanechnikov,
    Gaussian,
}

impl KernelFamily {
    /// The kernel `K(x)` itself. Uniform is `1{|x| <= 1}`.
    pub fn profile(self, x: f64) -> f64 {
        match self {
            KernelFamily::Uniform => {
                if x.abs() <= 1.0 + SUPPORT_SLACK {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::Epanechnikov => {
                if x.abs() <= 1.0 + SUPPORT_SLACK {
                    0.75 * (1.0 - x * x).max(0.0)
                } else {
                    0.0
                }
            }
            KernelFamily::Gaussian => (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Uniform => "uniform",
            KernelFamily::Epanechnikov => "epa",
            KernelFamily::Gaussian => "gauss",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "unif" => Ok(KernelFamily::Uniform),
            "epa" | "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            "gauss" | "gaussian" => Ok(KernelFamily::Gaussian),
            _ => Err(Error::config(format!(
                "unknown kernel `{s}` (expected uniform, epa or gauss)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    TwoSided,
    /// Zero weight on rescaled times after the evaluation point.
    OneSidedPast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
    pub sided: Sidedness,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64, sided: Sidedness) -> Result<Self> {
        let spec = KernelSpec {
            family,
            bandwidth,
            sided,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::config(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }

    pub fn with_bandwidth(self, bandwidth: f64) -> Self {
        KernelSpec { bandwidth, ..self }
    }

    /// `K((t - u) / b)` with the sidedness applied, without the `1/b` factor.
    pub fn profile_weight(&self, t: f64, u: f64) -> f64 {
        if self.sided == Sidedness::OneSidedPast && t > u {
            return 0.0;
        }
        self.family.profile((t - u) / self.bandwidth)
    }

    /// Profile weights for every time; zero where the kernel vanishes.
    pub fn profile_weights(&self, times: &[f64], u: f64) -> Vec<f64> {
        times.iter().map(|&t| self.profile_weight(t, u)).collect()
    }
}

/// Realized kernel weights for one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub normalized: bool,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        crate::stats::pairwise_sum(&self.weights)
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| self.weights[i] > 0.0)
            .collect()
    }
}

/// Evaluates `K_b(t_i - u) = K((t_i - u)/b)/b` at every time, optionally
/// rescaled to sum to one.
pub fn kernel_weights(
    spec: &KernelSpec,
    times: &[f64],
    u: f64,
    normalize: bool,
) -> Result<WeightVector> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::config(format!("evaluation time {u} outside [0, 1]")));
    }
    if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::config(format!("rescaled time {t} outside [0, 1]")));
    }
    let b = spec.bandwidth;
    let mut weights: Vec<f64> = times
        .iter()
        .map(|&t| spec.profile_weight(t, u) / b)
        .collect();
    let total = crate::stats::pairwise_sum(&weights);
    if !(total > 0.0) {
        return Err(Error::DegenerateWindow { bandwidth: b, u });
    }
    if normalize {
        for w in &mut weights {
            *w /= total;
        }
    }
    Ok(WeightVector {
        weights,
        normalized: normalize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn one_sided_uniform_window() {
        let spec = KernelSpec::new(KernelFamily::Uniform, 0.5, Sidedness::OneSidedPast).unwrap();
        let w = kernel_weights(&spec, &[0.25, 0.5, 0.75, 1.0], 1.0, true).unwrap();
        let third = 1.0 / 3.0;
        for (a, b) in w.weights.iter().zip([0.0, third, third, third]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_peaks_at_the_evaluation_point() {
        let times = grid(40);
        for b in [0.05, 0.3, 2.0] {
            let spec = KernelSpec::new(KernelFamily::Gaussian, b, Sidedness::TwoSided).unwrap();
            let w = kernel_weights(&spec, &times, times[17], false).unwrap();
            let argmax = (0..40)
                .max_by(|&a, &c| w.weights[a].total_cmp(&w.weights[c]))
                .unwrap();
            assert_eq!(argmax, 17);
        }
    }

    #[test]
    fn epanechnikov_matches_pointwise_formula() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let spec = KernelSpec::new(KernelFamily::Epanechnikov, 0.3, Sidedness::TwoSided).unwrap();
        let w = kernel_weights(&spec, &times, 0.5, true).unwrap();
        let raw: Vec<f64> = times
            .iter()
            .map(|t| {
                let x: f64 = (t - 0.5) / 0.3;
                (0.75 * (1.0 - x * x)).max(0.0)
            })
            .collect();
        let s: f64 = raw.iter().sum();
        for (a, r) in w.weights.iter().zip(&raw) {
            assert!((a - r / s).abs() < 1e-14);
        }
    }

    #[test]
    fn tiny_bandwidth_is_degenerate() {
        let spec = KernelSpec::new(KernelFamily::Uniform, 1e-4, Sidedness::TwoSided).unwrap();
        let err = kernel_weights(&spec, &grid(10), 0.55, true).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow { .. }));
        assert!(KernelSpec::new(KernelFamily::Uniform, 0.0, Sidedness::TwoSided).is_err());
    }

    #[test]
    fn raw_weights_carry_the_bandwidth_factor() {
        let spec = KernelSpec::new(KernelFamily::Uniform, 0.5, Sidedness::TwoSided).unwrap();
        let w = kernel_weights(&spec, &[0.5], 0.5, false).unwrap();
        assert_eq!(w.weights, vec![2.0]);
    }

    #[test]
    fn uniform_one_sided_keeps_ceil_bn_rows_off_the_grid_edge() {
        for n in [7usize, 23, 61, 199, 1001] {
            for b in [0.13, 0.2, 0.37, 0.5, 0.9] {
                let spec =
                    KernelSpec::new(KernelFamily::Uniform, b, Sidedness::OneSidedPast).unwrap();
                let w = kernel_weights(&spec, &grid(n), 1.0, false).unwrap();
                let kept = w.support();
                let bn = b * n as f64;
                let expect = bn.ceil() as usize;
                // a grid point lands exactly on the window edge when b*n is an integer
                let expect = if (bn - bn.round()).abs() < 1e-9 {
                    bn.round() as usize + 1
                } else {
                    expect
                };
                assert_eq!(kept.len(), expect, "n={n} b={b}");
                assert_eq!(*kept.last().unwrap(), n - 1);
                assert!(kept.windows(2).all(|p| p[1] == p[0] + 1));
            }
        }
    }

    proptest! {
        #[test]
        fn normalized_weights_sum_to_one(n in 2usize..10_000, b in 0.01f64..3.0, u in 0.0f64..=1.0, fam in 0u8..3, one in any::<bool>()) {
            let family = [KernelFamily::Uniform, KernelFamily::Epanechnikov, KernelFamily::Gaussian][fam as usize];
            let sided = if one { Sidedness::OneSidedPast } else { Sidedness::TwoSided };
            let spec = KernelSpec::new(family, b, sided).unwrap();
            if let Ok(w) = kernel_weights(&spec, &grid(n), u, true) {
                prop_assert!((w.sum() - 1.0).abs() < 1e-12);
                prop_assert!(w.weights.iter().all(|&x| x >= 0.0));
            }
        }

        #[test]
        fn two_sided_weights_are_symmetric(k in 1usize..200, b in 0.02f64..1.5, fam in 0u8..3) {
            let family = [KernelFamily::Uniform, KernelFamily::Epanechnikov, KernelFamily::Gaussian][fam as usize];
            let spec = KernelSpec::new(family, b, Sidedness::TwoSided).unwrap();
            // symmetric grid around u = 1/2
            let n = 2 * k + 1;
            let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let w = spec.profile_weights(&times, 0.5);
            for i in 0..n {
                prop_assert!((w[i] - w[n - 1 - i]).abs() <= 1e-12);
            }
        }
    }
}
