//! Browser bindings: kernel weights, simulated coefficient paths and
//! local-constant versus local-linear boosted coefficient estimates.

use nalgebra::DMatrix;
use wasm_bindgen::prelude::*;

use tvboost::boost::{boost, BoostConfig, Learner, Stopping};
use tvboost::kernel::{kernel_weights as weights, KernelSpec, Sidedness};
use tvboost::panel::Design;
use tvboost::simlab::{
    coefficient_paths as paths, predictor_innovations, replication_rng, DgpSpec, Innovation,
};

fn js(e: tvboost::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn sided(two_sided: bool) -> Sidedness {
    if two_sided {
        Sidedness::TwoSided
    } else {
        Sidedness::OneSidedPast
    }
}

/// Normalized weights on the times `i/n`, `i = 1..=n`, for evaluation point
/// `u`.
#[wasm_bindgen]
pub fn kernel_weights(
    family: &str,
    bandwidth: f64,
    two_sided: bool,
    n: usize,
    u: f64,
) -> Result<Vec<f64>, JsError> {
    let spec =
        KernelSpec::new(family.parse().map_err(js)?, bandwidth, sided(two_sided)).map_err(js)?;
    let times: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    Ok(weights(&spec, &times, u, true).map_err(js)?.weights)
}

/// The four coefficient paths of a simulation design over `t = 0..=periods`,
/// concatenated.
#[wasm_bindgen]
pub fn coefficient_paths(dgp: u8, periods: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let spec = DgpSpec {
        periods,
        ..DgpSpec::new(dgp, Innovation::Gaussian).map_err(js)?
    };
    spec.validate().map_err(js)?;
    let mut rng = replication_rng(seed, 0);
    Ok(paths(&spec, &mut rng).concat())
}

/// True coefficient at rescaled time `u` for a named shape.
fn shape_value(shape: &str, u: f64) -> Result<f64, JsError> {
    Ok(match shape {
        "linear" => 2.0 * u - 1.0,
        "sine" => (2.0 * std::f64::consts::PI * u).sin(),
        "break" => {
            if u < 0.5 {
                1.0
            } else {
                -1.0
            }
        }
        "constant" => 0.5,
        other => return Err(JsError::new(&format!("unknown shape `{other}`"))),
    })
}

/// Simulates `y_t = beta(t/n) x_t + sigma e_t` and estimates `beta` at `points`
/// evaluation times with both learners. Returns `[u, truth, lc, ll]`, each of
/// length `points`, concatenated.
#[wasm_bindgen]
pub fn fit_curves(
    shape: &str,
    n: usize,
    noise: f64,
    family: &str,
    bandwidth: f64,
    points: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    if !(10..=2000).contains(&n) || !(2..=200).contains(&points) || noise.is_nan() || noise < 0.0 {
        return Err(JsError::new(
            "need 10 <= n <= 2000, 2 <= points <= 200 and noise >= 0",
        ));
    }
    let mut rng = replication_rng(seed, 1);
    let x = predictor_innovations(Innovation::Gaussian, n, &mut rng);
    let e = predictor_innovations(Innovation::Gaussian, n, &mut rng);
    let times: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let y = (0..n)
        .map(|i| Ok(shape_value(shape, times[i])? * x[i] + noise * e[i]))
        .collect::<Result<Vec<f64>, JsError>>()?;
    let design = Design::from_parts(DMatrix::from_column_slice(n, 1, &x), y).map_err(js)?;
    let kernel =
        KernelSpec::new(family.parse().map_err(js)?, bandwidth, Sidedness::TwoSided).map_err(js)?;
    let config = |learner| BoostConfig {
        learner,
        kernel,
        max_iter: 200,
        stopping: Stopping::Aicc,
        ..BoostConfig::default()
    };
    let us: Vec<f64> = (0..points)
        .map(|k| k as f64 / (points - 1) as f64)
        .collect();
    let mut out = us.clone();
    for &u in &us {
        out.push(shape_value(shape, u)?);
    }
    for learner in [Learner::LocalConstant, Learner::LocalLinear] {
        for &u in &us {
            let fit = boost(&design, u, &config(learner)).map_err(js)?;
            out.push(fit.predict(&[1.0]).map_err(js)? - fit.predict(&[0.0]).map_err(js)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        let w = kernel_weights("epa", 0.3, true, 50, 0.5).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w = kernel_weights("uniform", 0.5, false, 4, 1.0).unwrap();
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn paths_cover_four_coefficients() {
        assert_eq!(coefficient_paths(9, 200, 1).unwrap().len(), 4 * 201);
    }

    #[test]
    fn local_linear_tracks_a_linear_coefficient() {
        let out = fit_curves("linear", 400, 0.0, "uniform", 0.3, 11, 3).unwrap();
        let k = 11;
        let truth = &out[k..2 * k];
        let ll = &out[3 * k..4 * k];
        let lc = &out[2 * k..3 * k];
        assert!((ll[k - 1] - truth[k - 1]).abs() < (lc[k - 1] - truth[k - 1]).abs());
    }
}
