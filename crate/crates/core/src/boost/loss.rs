use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::weighted_quantile;

/// Loss functions for generic boosting.
///
/// Squared loss is `(y - f)^2 / 2`, so its negative gradient is the plain
/// residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Loss {
    Squared,
    Absolute,
    Quantile(f64),
}

impl Loss {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Loss::Quantile(tau) if !(tau > 0.0 && tau < 1.0) => Err(Error::config(format!(
                "quantile level must lie in (0, 1), got {tau}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn value(&self, y: f64, f: f64) -> f64 {
        let e = y - f;
        match *self {
            Loss::Squared => 0.5 * e * e,
            Loss::Absolute => e.abs(),
            Loss::Quantile(tau) => {
                if e >= 0.0 {
                    tau * e
                } else {
                    (tau - 1.0) * e
                }
            }
        }
    }

    /// `-dL/df` at `(y, f)`. At the kink the absolute loss returns 0 and the
    /// quantile loss returns `tau`.
    pub fn negative_gradient(&self, y: f64, f: f64) -> f64 {
        match *self {
            Loss::Squared => y - f,
            Loss::Absolute => {
                if y > f {
                    1.0
                } else if y < f {
                    -1.0
                } else {
                    0.0
                }
            }
            Loss::Quantile(tau) => {
                if y < f {
                    tau - 1.0
                } else {
                    tau
                }
            }
        }
    }

    /// Minimizer of `sum w L(y, c)` over constants `c`.
    pub fn intercept(&self, y: &[f64], w: &[f64]) -> Option<f64> {
        match *self {
            Loss::Squared => {
                let total = crate::stats::dot(w, &vec![1.0; w.len()]);
                (total > 0.0).then(|| crate::stats::dot(w, y) / total)
            }
            Loss::Absolute => weighted_quantile(y, w, 0.5),
            Loss::Quantile(tau) => weighted_quantile(y, w, tau),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loss::Squared => f.write_str("l2"),
            Loss::Absolute => f.write_str("l1"),
            Loss::Quantile(tau) => write!(f, "quantile:{tau}"),
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let loss = match s.trim().to_ascii_lowercase().as_str() {
            "l2" | "squared" => Loss::Squared,
            "l1" | "absolute" => Loss::Absolute,
            other => match other.strip_prefix("quantile:") {
                Some(tau) => Loss::Quantile(
                    tau.parse()
                        .map_err(|_| Error::config(format!("bad quantile level `{tau}`")))?,
                ),
                None => {
                    return Err(Error::config(format!(
                        "unknown loss `{s}` (expected l2, l1 or quantile:<tau>)"
                    )))
                }
            },
        };
        loss.validate()?;
        Ok(loss)
    }
}

impl TryFrom<String> for Loss {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Loss> for String {
    fn from(l: Loss) -> String {
        l.to_string()
    }
}
