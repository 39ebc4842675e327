//! The fourteen simulation designs.
//!
//! `Y_t = .6 Y_{t-1} + sum_{j<=4} (.5 + beta_j(t/T)) z_{j,t-1} + eps_t` and
//! `z_t = A(t/T) z_{t-1} + eta_t`, with `A = {.4^{|i-j|+1}}` except for
//! DGPs 13 and 14, where `A` moves linearly from `{.2^{|i-j|+1}}` at `t = 0`
//! to `{.4^{|i-j|+1}}` at `t = T`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RHO: f64 = 0.6;
pub const BASE_COEFFICIENT: f64 = 0.5;
pub const BURN_IN: usize = 100;
pub const DGP_COUNT: u8 = 14;

const LGT_GAMMA: [f64; 4] = [10.0, 5.0, 20.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Innovation {
    Gaussian,
    /// Student t with 5 degrees of freedom. Predictor innovations are scaled
    /// to unit variance; regression errors are not.
    T5,
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Innovation::Gaussian => "gauss",
            Innovation::T5 => "t5",
        })
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "gaussian" | "normal" => Ok(Innovation::Gaussian),
            "t5" => Ok(Innovation::T5),
            _ => Err(Error::config(format!(
                "unknown innovation `{s}`; expected gauss or t5"
            ))),
        }
    }
}

impl TryFrom<String> for Innovation {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Innovation> for String {
    fn from(i: Innovation) -> Self {
        i.to_string()
    }
}

/// How the late-sample error distribution of DGP 2 is scaled: `2.5` read as
/// a variance or as a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VarianceBreak {
    #[default]
    Variance,
    StdDev,
}

impl VarianceBreak {
    fn scale(self) -> f64 {
        match self {
            VarianceBreak::Variance => 2.5f64.sqrt(),
            VarianceBreak::StdDev => 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub id: u8,
    pub innovation: Innovation,
    /// Sample length `T`.
    pub periods: usize,
    /// Number of exogenous series `d`.
    pub exogenous: usize,
    pub variance_break: VarianceBreak,
}

impl DgpSpec {
    pub fn new(id: u8, innovation: Innovation) -> Result<Self> {
        let spec = DgpSpec {
            id,
            innovation,
            periods: 200,
            exogenous: 100,
            variance_break: VarianceBreak::Variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=DGP_COUNT).contains(&self.id) {
            return Err(Error::config(format!(
                "DGP id must be 1..={DGP_COUNT}, got {}",
                self.id
            )));
        }
        if self.periods < 50 {
            return Err(Error::config(format!(
                "T must be at least 50, got {}",
                self.periods
            )));
        }
        if self.exogenous < 4 {
            return Err(Error::config(format!(
                "need at least 4 exogenous series, got {}",
                self.exogenous
            )));
        }
        Ok(())
    }

    /// Number of candidate predictors: three lags of `Y` and of each `z_j`.
    pub fn n_predictors(&self) -> usize {
        3 * (self.exogenous + 1)
    }

    fn locally_stationary(&self) -> bool {
        matches!(self.id, 13 | 14)
    }
}

/// `1 / (1 + exp(-gamma (u - c)))`.
pub fn lgt(gamma: f64, c: f64, u: f64) -> f64 {
    1.0 / (1.0 + (-gamma * (u - c)).exp())
}

/// Break date `T_b` for DGPs 3, 4, 5 and 14: `T/4`, `T/2` or `3T/4`.
pub fn break_date(id: u8, periods: usize) -> Option<usize> {
    match id {
        3 => Some(periods / 4),
        4 => Some(periods / 2),
        5 | 14 => Some(3 * periods / 4),
        _ => None,
    }
}

/// Standard deviation of the random-walk increments of DGPs 6 and 7.
pub fn random_walk_sd(id: u8, periods: usize) -> Option<f64> {
    let scale = match id {
        6 => 0.5,
        7 => 1.0,
        _ => return None,
    };
    Some(scale / (periods as f64).sqrt())
}

/// Deterministic coefficient `beta_j(t/T)` for `j` in `1..=4`. `None` for
/// the random-walk designs 6 and 7, whose paths are drawn per replication.
pub fn coefficient_path(id: u8, j: usize, t: usize, periods: usize) -> Option<f64> {
    assert!((1..=4).contains(&j), "coefficient index {j} outside 1..=4");
    let u = t as f64 / periods as f64;
    match id {
        1 | 2 => Some(0.0),
        3 | 4 | 5 | 14 => {
            let tb = break_date(id, periods).expect("break design");
            Some(if t > tb { -1.0 } else { 0.0 })
        }
        6 | 7 => None,
        8 | 9 | 10 | 13 => {
            let c = match id {
                8 => 0.25,
                10 => 0.90,
                _ => 0.75,
            };
            Some(lgt(LGT_GAMMA[j - 1], c, u))
        }
        11 => Some([-0.3 * u * u, u * u, -0.4 * u, u][j - 1]),
        12 => Some(
            [
                0.0,
                0.0,
                3.0 * (2.0 * std::f64::consts::PI * u).cos(),
                2.0 * u * (2.0 * std::f64::consts::PI * u).sin(),
            ][j - 1],
        ),
        _ => panic!("DGP id {id} outside 1..=14"),
    }
}

/// `{base^{|i-j|+1}}`.
pub fn toeplitz_transition(d: usize, base: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| base.powi(i.abs_diff(j) as i32 + 1))
}

/// One simulated sample: `y[t-1]` and row `t-1` of `z` hold period `t`.
#[derive(Debug, Clone)]
pub struct Sample {
    pub y: Vec<f64>,
    pub z: DMatrix<f64>,
    /// `beta_j(t/T)` for `t = 0..=T`, one row per `j`.
    pub betas: [Vec<f64>; 4],
}

/// The four coefficient paths on `t = 0..=T`. Random walks start at zero
/// and draw their increments from `rng`.
pub fn coefficient_paths(spec: &DgpSpec, rng: &mut ChaCha8Rng) -> [Vec<f64>; 4] {
    let n = spec.periods;
    std::array::from_fn(|k| {
        let j = k + 1;
        match random_walk_sd(spec.id, n) {
            Some(sd) => {
                let normal = Normal::new(0.0, sd).expect("positive sd");
                let mut path = Vec::with_capacity(n + 1);
                let mut level = 0.0;
                path.push(level);
                for _ in 0..n {
                    level += normal.sample(rng);
                    path.push(level);
                }
                path
            }
            None => (0..=n)
                .map(|t| coefficient_path(spec.id, j, t, n).expect("deterministic design"))
                .collect(),
        }
    })
}

struct Draws {
    t5: Option<StudentT<f64>>,
}

impl Draws {
    fn new(innovation: Innovation) -> Self {
        Draws {
            t5: match innovation {
                Innovation::Gaussian => None,
                Innovation::T5 => Some(StudentT::new(5.0).expect("valid dof")),
            },
        }
    }

    fn raw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.t5 {
            None => rng.sample(StandardNormal),
            Some(t) => t.sample(rng),
        }
    }

    /// Unit-variance predictor innovation.
    fn eta(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.t5 {
            None => rng.sample(StandardNormal),
            Some(t) => t.sample(rng) * (3.0f64 / 5.0).sqrt(),
        }
    }
}

/// Draws `n` predictor innovations (unit variance for both families).
pub fn predictor_innovations(innovation: Innovation, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let draws = Draws::new(innovation);
    (0..n).map(|_| draws.eta(rng)).collect()
}

/// Simulates one sample after a burn-in of `BURN_IN` periods from zero
/// states. The burn-in runs with the `t = 0` coefficients and transition.
pub fn simulate(spec: &DgpSpec, rng: &mut ChaCha8Rng) -> Result<Sample> {
    spec.validate()?;
    let (n, d) = (spec.periods, spec.exogenous);
    let betas = coefficient_paths(spec, rng);
    let draws = Draws::new(spec.innovation);
    let a2 = toeplitz_transition(d, 0.4);
    let a1 = if spec.locally_stationary() {
        toeplitz_transition(d, 0.2)
    } else {
        a2.clone()
    };
    let late_scale = spec.variance_break.scale();
    let mut y = Vec::with_capacity(n);
    let mut z = DMatrix::zeros(n, d);
    let mut y_prev = 0.0;
    let mut z_prev = DVector::zeros(d);
    let mut z_next = DVector::zeros(d);
    for step in 0..BURN_IN + n {
        let t = if step >= BURN_IN {
            step - BURN_IN + 1
        } else {
            0
        };
        let u = t as f64 / n as f64;
        let mut mean = RHO * y_prev;
        for j in 0..4 {
            mean += (BASE_COEFFICIENT + betas[j][t]) * z_prev[j];
        }
        let mut eps = draws.raw(rng);
        if spec.id == 2 && 4 * t >= 3 * n {
            eps *= late_scale;
        }
        let y_t = mean + eps;
        if spec.locally_stationary() {
            z_next.gemv(1.0 - u, &a1, &z_prev, 0.0);
            z_next.gemv(u, &a2, &z_prev, 1.0);
        } else {
            z_next.gemv(1.0, &a2, &z_prev, 0.0);
        }
        for v in z_next.iter_mut() {
            *v += draws.eta(rng);
        }
        if step >= BURN_IN {
            y.push(y_t);
            z.set_row(t - 1, &z_next.transpose());
        }
        y_prev = y_t;
        std::mem::swap(&mut z_prev, &mut z_next);
    }
    Ok(Sample { y, z, betas })
}
