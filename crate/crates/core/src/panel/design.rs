//! Lagged design matrices for direct `h`-step forecasting regressions.

use nalgebra::DMatrix;

use super::{build_target, monthly_dates, Panel, TargetSpec, YearMonth};
use crate::error::{Error, Result};

/// Smallest number of usable rows a design may have.
pub const MIN_ROWS: usize = 5;

/// Which source series and lag a design column was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnOrigin {
    pub series: String,
    /// Lag beyond the forecast horizon: the column holds values dated
    /// `t - h - lag` for the response dated `t`.
    pub lag: usize,
}

/// Additional regressors (e.g. estimated factors) with their own lag depth.
#[derive(Debug, Clone, Copy)]
pub struct ExtraColumns<'a> {
    pub panel: &'a Panel,
    pub lags: usize,
}

/// Regressors dated at the end of the panel, for the first unobserved
/// response.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub target_date: YearMonth,
    pub regressor_date: YearMonth,
    pub values: Vec<f64>,
}

/// Response `Y_t` aligned with regressors `x_{t-h}`, plus rescaled times.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    response: Vec<f64>,
    regressors: DMatrix<f64>,
    times: Vec<f64>,
    columns: Vec<ColumnOrigin>,
    response_dates: Vec<YearMonth>,
    regressor_dates: Vec<YearMonth>,
    horizon: usize,
    step: i64,
    next: Option<ForecastRow>,
}

fn rescaled_times(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / n as f64).collect()
}

impl Design {
    /// A design from a bare matrix and response, with monthly placeholder
    /// dates, horizon 1 and columns named `x0, x1, ...`.
    pub fn from_parts(regressors: DMatrix<f64>, response: Vec<f64>) -> Result<Self> {
        let n = response.len();
        Design::from_parts_with_times(regressors, response, rescaled_times(n))
    }

    /// Like [`Design::from_parts`] with explicit rescaled times.
    pub fn from_parts_with_times(
        regressors: DMatrix<f64>,
        response: Vec<f64>,
        times: Vec<f64>,
    ) -> Result<Self> {
        let n = response.len();
        if regressors.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: regressors.nrows(),
            });
        }
        if times.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: times.len(),
            });
        }
        if regressors.ncols() == 0 || n == 0 {
            return Err(Error::insufficient("design", 1, 0));
        }
        let start = YearMonth::new(2000, 1).expect("valid");
        let dates = monthly_dates(start, n + 1);
        Ok(Design {
            columns: (0..regressors.ncols())
                .map(|j| ColumnOrigin {
                    series: format!("x{j}"),
                    lag: 0,
                })
                .collect(),
            response,
            regressors,
            times,
            response_dates: dates[1..].to_vec(),
            regressor_dates: dates[..n].to_vec(),
            horizon: 1,
            step: 1,
            next: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_cols(&self) -> usize {
        self.regressors.ncols()
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn regressors(&self) -> &DMatrix<f64> {
        &self.regressors
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn columns(&self) -> &[ColumnOrigin] {
        &self.columns
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn response_dates(&self) -> &[YearMonth] {
        &self.response_dates
    }

    pub fn regressor_dates(&self) -> &[YearMonth] {
        &self.regressor_dates
    }

    /// Regressor vector for the first response beyond the sample, when every
    /// lag is observed.
    pub fn forecast_row(&self) -> Option<&ForecastRow> {
        self.next.as_ref()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.regressors.row(i).iter().copied().collect()
    }

    /// Date of the panel cell behind `(row, col)`.
    pub fn source_date(&self, row: usize, col: usize) -> YearMonth {
        self.regressor_dates[row].offset(-(self.columns[col].lag as i64) * self.step)
    }

    /// Column indices built from the named series, in lag order.
    pub fn columns_of(&self, series: &str) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.series == series)
            .map(|(j, _)| j)
            .collect()
    }

    /// The first `rows` rows, with rescaled times recomputed for the shorter
    /// sample.
    pub fn head(&self, rows: usize) -> Result<Design> {
        self.slice(0, rows)
    }

    /// The last `rows` rows, with rescaled times recomputed.
    pub fn tail(&self, rows: usize) -> Result<Design> {
        self.slice(self.n_rows().saturating_sub(rows), rows)
    }

    fn slice(&self, start: usize, rows: usize) -> Result<Design> {
        if rows == 0 || start + rows > self.n_rows() {
            return Err(Error::insufficient(
                "design slice",
                start + rows.max(1),
                self.n_rows(),
            ));
        }
        Ok(Design {
            response: self.response[start..start + rows].to_vec(),
            regressors: self.regressors.rows(start, rows).into_owned(),
            times: rescaled_times(rows),
            columns: self.columns.clone(),
            response_dates: self.response_dates[start..start + rows].to_vec(),
            regressor_dates: self.regressor_dates[start..start + rows].to_vec(),
            horizon: self.horizon,
            step: self.step,
            next: None,
        })
    }

    /// Drops one row and keeps every other row's rescaled time.
    pub fn without_row(&self, row: usize) -> Design {
        let keep: Vec<usize> = (0..self.n_rows()).filter(|&i| i != row).collect();
        Design {
            response: keep.iter().map(|&i| self.response[i]).collect(),
            regressors: self.regressors.select_rows(&keep),
            times: keep.iter().map(|&i| self.times[i]).collect(),
            columns: self.columns.clone(),
            response_dates: keep.iter().map(|&i| self.response_dates[i]).collect(),
            regressor_dates: keep.iter().map(|&i| self.regressor_dates[i]).collect(),
            horizon: self.horizon,
            step: self.step,
            next: None,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Design {
        Design {
            response: self.response.clone(),
            regressors: self.regressors.select_columns(cols),
            times: self.times.clone(),
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
            response_dates: self.response_dates.clone(),
            regressor_dates: self.regressor_dates.clone(),
            horizon: self.horizon,
            step: self.step,
            next: self.next.as_ref().map(|f| ForecastRow {
                target_date: f.target_date,
                regressor_date: f.regressor_date,
                values: cols.iter().map(|&j| f.values[j]).collect(),
            }),
        }
    }

    /// Replaces the response (e.g. with a pseudo-response in tests).
    pub fn with_response(&self, response: Vec<f64>) -> Result<Design> {
        if response.len() != self.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows(),
                found: response.len(),
            });
        }
        Ok(Design {
            response,
            ..self.clone()
        })
    }

    /// Verifies that every regressor cell is dated at least `h` periods
    /// before its response and, when given, that no response or regressor is
    /// dated after `cutoff`.
    pub fn check_no_lookahead(&self, cutoff: Option<YearMonth>) -> Result<()> {
        let h = self.horizon as i64 * self.step;
        for i in 0..self.n_rows() {
            let limit = self.response_dates[i].offset(-h);
            for j in 0..self.n_cols() {
                let src = self.source_date(i, j);
                if src > limit {
                    return Err(Error::Lookahead(format!(
                        "row {i} (response {}) reads {} dated {src}",
                        self.response_dates[i], self.columns[j].series
                    )));
                }
            }
            if let Some(c) = cutoff {
                if self.response_dates[i] > c {
                    return Err(Error::Lookahead(format!(
                        "response dated {} is after the information cutoff {c}",
                        self.response_dates[i]
                    )));
                }
            }
        }
        if let (Some(c), Some(f)) = (cutoff, &self.next) {
            if f.regressor_date > c {
                return Err(Error::Lookahead(format!(
                    "forecast regressors dated {} are after the cutoff {c}",
                    f.regressor_date
                )));
            }
        }
        Ok(())
    }
}

struct Source<'a> {
    panel: &'a Panel,
    col: usize,
    lags: usize,
    first: usize,
}

fn first_observed(series: &[Option<f64>], name: &str) -> Result<usize> {
    let first = series
        .iter()
        .position(Option::is_some)
        .ok_or_else(|| Error::InvalidPanel(format!("series `{name}` has no observations")))?;
    if let Some(k) = series[first..].iter().position(Option::is_none) {
        return Err(Error::InteriorMissing {
            series: name.to_string(),
            row: first + k,
        });
    }
    Ok(first)
}

/// Aligns a response series with lagged predictors for direct `h`-step
/// regression.
///
/// Each predictor contributes `lags + 1` columns holding values dated
/// `t-h, t-h-1, ..., t-h-lags` for the response dated `t`. Rows before the
/// last leading-missing position of any input are trimmed; missing values
/// after that point are an error.
pub fn assemble_design(
    predictors: &Panel,
    response: &[Option<f64>],
    horizon: usize,
    lags: usize,
    extra: Option<ExtraColumns<'_>>,
) -> Result<Design> {
    if horizon == 0 {
        return Err(Error::config("horizon must be at least 1"));
    }
    let t_len = predictors.n_periods();
    if response.len() != t_len {
        return Err(Error::DimensionMismatch {
            expected: t_len,
            found: response.len(),
        });
    }
    let mut sources = Vec::new();
    for j in 0..predictors.n_series() {
        let col = predictors.column(j);
        sources.push(Source {
            panel: predictors,
            col: j,
            lags,
            first: first_observed(&col, &predictors.names()[j])?,
        });
    }
    if let Some(ex) = extra {
        if ex.panel.dates() != predictors.dates() {
            return Err(Error::InvalidPanel(
                "extra columns are not aligned with the predictor panel".into(),
            ));
        }
        for j in 0..ex.panel.n_series() {
            let col = ex.panel.column(j);
            sources.push(Source {
                panel: ex.panel,
                col: j,
                lags: ex.lags,
                first: first_observed(&col, &ex.panel.names()[j])?,
            });
        }
    }
    let resp_first = first_observed(response, "response")?;
    let start = sources
        .iter()
        .map(|s| s.first + horizon + s.lags)
        .chain(std::iter::once(resp_first))
        .max()
        .unwrap_or(resp_first);
    let n = t_len.saturating_sub(start);
    let q: usize = sources.iter().map(|s| s.lags + 1).sum();
    if n < MIN_ROWS {
        return Err(Error::insufficient(
            "design assembly",
            start + MIN_ROWS,
            t_len,
        ));
    }

    let mut columns = Vec::with_capacity(q);
    for s in &sources {
        for l in 0..=s.lags {
            columns.push(ColumnOrigin {
                series: s.panel.names()[s.col].clone(),
                lag: l,
            });
        }
    }
    let mut regressors = DMatrix::zeros(n, q);
    let mut j = 0;
    for s in &sources {
        for l in 0..=s.lags {
            for i in 0..n {
                let src = start + i - horizon - l;
                regressors[(i, j)] = s.panel.get(src, s.col).expect("checked observed");
            }
            j += 1;
        }
    }
    let dates = predictors.dates();
    let step = predictors.step();
    let last = t_len - 1;
    let next = if sources.iter().all(|s| last >= s.first + s.lags) {
        let values = sources
            .iter()
            .flat_map(|s| {
                (0..=s.lags).map(move |l| s.panel.get(last - l, s.col).expect("observed"))
            })
            .collect();
        Some(ForecastRow {
            target_date: dates[last].offset(horizon as i64 * step),
            regressor_date: dates[last],
            values,
        })
    } else {
        None
    };

    Ok(Design {
        response: response[start..]
            .iter()
            .map(|v| v.expect("checked observed"))
            .collect(),
        regressors,
        times: rescaled_times(n),
        columns,
        response_dates: dates[start..].to_vec(),
        regressor_dates: (start..t_len).map(|t| dates[t - horizon]).collect(),
        horizon,
        step,
        next,
    })
}

/// Builds the forecasting design for one target: the response is the
/// `h`-period target, own lags use the one-period target, and every other
/// transformed series enters as a lagged predictor.
pub fn assemble_target_design(
    raw: &Panel,
    transformed: &Panel,
    target: &TargetSpec,
    lags: usize,
    extra: Option<ExtraColumns<'_>>,
) -> Result<Design> {
    let response = build_target(raw, target)?;
    let own = build_target(raw, &target.at_horizon(1)?)?;
    let others = transformed.without(&target.series)?;
    let mut names = vec![target.series.clone()];
    names.extend(others.names().iter().cloned());
    let mut columns = vec![own];
    columns.extend((0..others.n_series()).map(|j| others.column(j)));
    let predictors = Panel::from_columns(transformed.dates().to_vec(), names, columns)?;
    assemble_design(&predictors, &response, target.horizon, lags, extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{apply_transform, TransformCode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dates(n: usize) -> Vec<YearMonth> {
        monthly_dates(YearMonth::new(1990, 1).unwrap(), n)
    }

    fn random_panel(rng: &mut ChaCha8Rng, t: usize, names: &[&str]) -> Panel {
        let cols = names
            .iter()
            .map(|_| (0..t).map(|_| Some(rng.random_range(1.0..2.0))).collect())
            .collect();
        Panel::from_columns(
            dates(t),
            names.iter().map(|s| s.to_string()).collect(),
            cols,
        )
        .unwrap()
    }

    #[test]
    fn one_lag_loses_one_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_panel(&mut rng, 10, &["a", "b"]);
        let y: Vec<Option<f64>> = (0..10).map(|t| Some(t as f64)).collect();
        let d = assemble_design(&p, &y, 1, 0, None).unwrap();
        assert_eq!((d.n_rows(), d.n_cols()), (9, 2));
        assert_eq!(d.response()[0], 1.0);
        assert_eq!(d.regressors()[(0, 1)], p.get(0, 1).unwrap());
        assert_eq!(d.times().last(), Some(&1.0));
        assert!((d.times()[0] - 1.0 / 9.0).abs() < 1e-15);
        let f = d.forecast_row().unwrap();
        assert_eq!(f.regressor_date, p.dates()[9]);
        assert_eq!(f.values[0], p.get(9, 0).unwrap());
    }

    #[test]
    fn simulation_geometry_has_303_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut names = vec!["Y".to_string()];
        names.extend((1..=100).map(|j| format!("z{j}")));
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let p = random_panel(&mut rng, 40, &refs);
        let y = p.column(0);
        let d = assemble_design(&p, &y, 1, 2, None).unwrap();
        assert_eq!(d.n_cols(), 303);
        assert_eq!(d.n_rows(), 37);
    }

    #[test]
    fn first_usable_row_matches_a_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 30;
        let raw = random_panel(&mut rng, t, &["a", "b", "c"]);
        let codes = [6u8, 2, 5];
        let cols: Vec<Vec<Option<f64>>> = (0..3)
            .map(|j| {
                apply_transform(&raw.column(j), TransformCode::new(codes[j]).unwrap(), "s").unwrap()
            })
            .collect();
        let p =
            Panel::from_columns(dates(t), vec!["a".into(), "b".into(), "c".into()], cols).unwrap();
        let y: Vec<Option<f64>> = (0..t).map(|i| (i >= 1).then_some(i as f64)).collect();
        let (h, lags) = (2, 1);
        let d = assemble_design(&p, &y, h, lags, None).unwrap();
        // scan every candidate start row for completeness of all needed cells
        let brute = (0..t)
            .find(|&s| {
                (s..t).all(|r| {
                    y[r].is_some()
                        && (0..3).all(|c| {
                            (0..=lags).all(|l| r >= h + l && p.get(r - h - l, c).is_some())
                        })
                })
            })
            .unwrap();
        assert_eq!(brute, 2 + h + lags);
        assert_eq!(d.n_rows(), t - brute);
        assert_eq!(d.response_dates()[0], p.dates()[brute]);
    }

    #[test]
    fn no_lookahead_holds_for_every_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_panel(&mut rng, 50, &["a", "b", "c"]);
        let y = p.column(0);
        for h in [1, 3, 6, 12] {
            let d = assemble_design(&p, &y, h, 3, None).unwrap();
            d.check_no_lookahead(Some(*p.dates().last().unwrap()))
                .unwrap();
            for i in 0..d.n_rows() {
                for j in 0..d.n_cols() {
                    assert!(d.source_date(i, j).months_since(d.response_dates()[i]) <= -(h as i64));
                    let src_row = p.row_of(d.source_date(i, j)).unwrap();
                    let col = p.column_index(&d.columns()[j].series).unwrap();
                    assert_eq!(p.get(src_row, col).unwrap(), d.regressors()[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn column_permutation_permutes_design_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_panel(&mut rng, 25, &["a", "b", "c"]);
        let y = p.column(0);
        let d1 = assemble_design(&p, &y, 1, 1, None).unwrap();
        let d2 = assemble_design(&p.select(&["c", "a", "b"]).unwrap(), &y, 1, 1, None).unwrap();
        let perm = [4, 5, 0, 1, 2, 3];
        assert_eq!(d1.select_columns(&perm).regressors(), d2.regressors());
        assert_eq!(assemble_design(&p, &y, 1, 1, None).unwrap(), d1);
    }

    #[test]
    fn interior_missing_and_short_samples_fail() {
        let mut cols = vec![vec![Some(1.0); 20]];
        cols[0][7] = None;
        let p = Panel::from_columns(dates(20), vec!["a".into()], cols).unwrap();
        let y: Vec<Option<f64>> = vec![Some(0.0); 20];
        assert!(matches!(
            assemble_design(&p, &y, 1, 0, None),
            Err(Error::InteriorMissing { row: 7, .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let short = random_panel(&mut rng, 8, &["a"]);
        assert!(matches!(
            assemble_design(&short, &short.column(0), 1, 3, None),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn extra_columns_get_their_own_lags() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_panel(&mut rng, 30, &["y"]);
        let f = random_panel(&mut rng, 30, &["F1", "F2"]);
        let d = assemble_design(
            &p,
            &p.column(0),
            1,
            3,
            Some(ExtraColumns { panel: &f, lags: 0 }),
        )
        .unwrap();
        assert_eq!(d.n_cols(), 4 + 2);
        assert_eq!(d.columns_of("F2"), vec![5]);
    }

    #[test]
    fn head_recomputes_rescaled_time() {
        let x = DMatrix::from_fn(20, 2, |i, j| (i * 2 + j) as f64);
        let d = Design::from_parts(x, (0..20).map(f64::from).collect()).unwrap();
        let h = d.head(10).unwrap();
        assert_eq!(h.times()[9], 1.0);
        assert_eq!(h.response()[9], 9.0);
        let w = d.without_row(3);
        assert_eq!(w.n_rows(), 19);
        assert_eq!(w.times()[3], d.times()[4]);
    }
}
