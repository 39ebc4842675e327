//! Synthetic factor-structured panel in the FRED-MD layout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::panel::{
    monthly_dates, FredMd, Panel, TargetKind, TargetSpec, TransformCode, YearMonth,
};
use crate::simlab::lgt;

/// The eight headline FRED-MD series.
pub const FREDMD_TARGETS: [&str; 8] = [
    "INDPRO", "PAYEMS", "UNRATE", "CLF16OV", "W875RX1", "CPIAUCSL", "FEDFUNDS", "TB3MS",
];

const FACTOR_AR: f64 = 0.7;
const OWN_AR: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub periods: usize,
    pub predictors: usize,
    pub factors: usize,
    pub targets: Vec<String>,
    /// Factor coefficients of the targets shift over the sample.
    pub time_varying: bool,
    /// Adds a housing series and a mostly missing series.
    pub irregular: bool,
    pub start: YearMonth,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            periods: 300,
            predictors: 30,
            factors: 3,
            targets: vec!["TARGET".into()],
            time_varying: true,
            irregular: false,
            start: YearMonth::new(1960, 1).expect("valid date"),
        }
    }
}

/// Factor coefficient `j` of a target at rescaled time `u`.
pub fn factor_coefficient(j: usize, u: f64, time_varying: bool) -> f64 {
    match (j, time_varying) {
        (0, true) => 2.0 - 4.0 * lgt(10.0, 0.5, u),
        (1, true) => 2.0 * u,
        (0, false) => 1.0,
        (1, false) => 1.0,
        _ => 0.5,
    }
}

/// Simulates levels whose one-period target follows
/// `y_t = 0.3 y_{t-1} + β(t/T)'f_{t-1} + ε_t` with AR(1) factors `f` that
/// also drive every predictor.
pub fn synthetic_factor_panel(spec: &SyntheticSpec, seed: u64) -> Result<FredMd> {
    if spec.periods < 24
        || spec.predictors < spec.factors
        || spec.factors == 0
        || spec.targets.is_empty()
    {
        return Err(Error::config(
            "synthetic panel needs 24 periods, at least one factor and predictors >= factors",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let t_len = spec.periods;
    let k = spec.factors;
    let mut f = vec![vec![0.0; k]; t_len];
    for t in 0..t_len {
        let prev = if t == 0 {
            vec![0.0; k]
        } else {
            f[t - 1].clone()
        };
        for (v, p) in f[t].iter_mut().zip(prev) {
            *v = FACTOR_AR * p + normal();
        }
    }
    let mut names = Vec::new();
    let mut codes = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for (i, name) in spec.targets.iter().enumerate() {
        let kind = TargetSpec::conventional(name.clone(), 1)?.kind;
        let mut y_prev = 0.0;
        let mut level = if kind == TargetKind::LogGrowth {
            100.0
        } else {
            5.0
        };
        let mut col = Vec::with_capacity(t_len);
        for t in 0..t_len {
            if t > 0 {
                let u = t as f64 / (t_len - 1) as f64;
                let signal: f64 = (0..k)
                    .map(|j| factor_coefficient(j, u, spec.time_varying) * f[t - 1][j])
                    .sum();
                let scale = 1.0 + 0.1 * i as f64;
                let y = OWN_AR * y_prev + scale * signal + normal();
                y_prev = y;
                level = match kind {
                    TargetKind::LogGrowth => level * (y / 1200.0).exp(),
                    TargetKind::LevelDifference => level + y / 12.0,
                };
            }
            col.push(Some(level));
        }
        names.push(name.clone());
        codes.push(TransformCode::new(if kind == TargetKind::LogGrowth {
            5
        } else {
            2
        })?);
        columns.push(col);
    }
    for p in 0..spec.predictors {
        let loadings: Vec<f64> = (0..k).map(|_| normal()).collect();
        let col = (0..t_len)
            .map(|t| Some((0..k).map(|j| loadings[j] * f[t][j]).sum::<f64>() + normal()))
            .collect();
        names.push(format!("X{:03}", p + 1));
        codes.push(TransformCode::new(1)?);
        columns.push(col);
    }
    if spec.irregular {
        let col = (0..t_len)
            .map(|t| Some((7.0 + 0.1 * f[t][0] + 0.05 * normal()).exp()))
            .collect();
        names.push("HOUST".into());
        codes.push(TransformCode::new(4)?);
        columns.push(col);
        let col = (0..t_len)
            .map(|t| (t >= t_len / 2).then(&mut normal))
            .collect();
        names.push("SPARSE".into());
        codes.push(TransformCode::new(1)?);
        columns.push(col);
    }
    let panel = Panel::from_columns(monthly_dates(spec.start, t_len), names, columns)?;
    Ok(FredMd { panel, codes })
}
