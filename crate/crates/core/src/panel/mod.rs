//! Time-indexed panels, FRED-MD transforms, forecast targets and lagged
//! design matrices.
//!
//! A [`Panel`] is the universal data carrier: a `T x p` matrix of
//! observations indexed by evenly spaced periods, with column names and a
//! missing-value mask. Missing cells hold `NaN` in the value matrix so that
//! an accidental read poisons the result instead of silently using a number.

mod date;
mod design;
mod io;
mod transform;

pub use date::YearMonth;
pub use design::{
    assemble_design, assemble_target_design, ColumnOrigin, Design, ExtraColumns, MIN_ROWS,
};
pub use io::{read_fredmd_csv, read_panel_csv, write_fredmd_csv, write_panel_csv, FredMd};
pub use transform::{
    apply_transform, build_target, transform_panel, TargetKind, TargetSpec, TransformCode,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Observations for `p` named series over `T` evenly spaced periods.
#[derive(Debug, Clone)]
pub struct Panel {
    dates: Vec<YearMonth>,
    names: Vec<String>,
    values: DMatrix<f64>,
    missing: DMatrix<bool>,
}

impl Panel {
    /// Builds a panel from per-series columns; `None` marks a missing cell.
    pub fn from_columns(
        dates: Vec<YearMonth>,
        names: Vec<String>,
        columns: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidPanel(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let t = dates.len();
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != t) {
            return Err(Error::InvalidPanel(format!(
                "column `{}` has {} rows, expected {t}",
                names[j],
                c.len()
            )));
        }
        let p = columns.len();
        let values = DMatrix::from_fn(t, p, |i, j| columns[j][i].unwrap_or(f64::NAN));
        let missing = DMatrix::from_fn(t, p, |i, j| columns[j][i].is_none());
        Self::validated(dates, names, values, missing)
    }

    /// Builds a fully observed panel from a `T x p` matrix.
    pub fn from_matrix(
        dates: Vec<YearMonth>,
        names: Vec<String>,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if values.ncols() != names.len() || values.nrows() != dates.len() {
            return Err(Error::InvalidPanel(format!(
                "matrix is {}x{}, expected {}x{}",
                values.nrows(),
                values.ncols(),
                dates.len(),
                names.len()
            )));
        }
        let missing = values.map(|v| !v.is_finite());
        Self::validated(dates, names, values, missing)
    }

    fn validated(
        dates: Vec<YearMonth>,
        names: Vec<String>,
        mut values: DMatrix<f64>,
        missing: DMatrix<bool>,
    ) -> Result<Self> {
        if dates.len() < 2 {
            return Err(Error::InvalidPanel(format!(
                "need at least 2 periods, have {}",
                dates.len()
            )));
        }
        if names.is_empty() {
            return Err(Error::InvalidPanel("panel has no series".into()));
        }
        let step = dates[1].months_since(dates[0]);
        if step <= 0 {
            return Err(Error::InvalidPanel(
                "dates must be strictly increasing".into(),
            ));
        }
        for w in dates.windows(2) {
            if w[1].months_since(w[0]) != step {
                return Err(Error::InvalidPanel(format!(
                    "dates are not evenly spaced around {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidPanel(format!("duplicate series name `{n}`")));
            }
        }
        for (v, &m) in values.iter_mut().zip(missing.iter()) {
            if m {
                *v = f64::NAN;
            } else if !v.is_finite() {
                return Err(Error::InvalidPanel(
                    "non-finite value in an observed cell".into(),
                ));
            }
        }
        Ok(Panel {
            dates,
            names,
            values,
            missing,
        })
    }

    pub fn n_periods(&self) -> usize {
        self.dates.len()
    }

    pub fn n_series(&self) -> usize {
        self.names.len()
    }

    pub fn dates(&self) -> &[YearMonth] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSeries(name.to_string()))
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        if self.missing[(row, col)] {
            None
        } else {
            Some(self.values[(row, col)])
        }
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[(row, col)]
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.n_periods()).map(|i| self.get(i, col)).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<Option<f64>>> {
        Ok(self.column(self.column_index(name)?))
    }

    /// Raw value matrix; missing cells are `NaN`.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Index of the row dated `date`, if inside the panel.
    pub fn row_of(&self, date: YearMonth) -> Option<usize> {
        let first = self.dates[0];
        let step = self.step();
        let off = date.months_since(first);
        if off < 0 || off % step != 0 {
            return None;
        }
        let idx = (off / step) as usize;
        (idx < self.n_periods()).then_some(idx)
    }

    /// Spacing between consecutive periods, in months.
    pub fn step(&self) -> i64 {
        self.dates[1].months_since(self.dates[0])
    }

    /// Keeps the rows dated on or before `last`.
    pub fn truncate_through(&self, last: YearMonth) -> Result<Panel> {
        let keep = self.dates.iter().take_while(|d| **d <= last).count();
        self.head(keep)
    }

    /// Keeps the first `rows` periods.
    pub fn head(&self, rows: usize) -> Result<Panel> {
        if rows < 2 {
            return Err(Error::insufficient("panel truncation", 2, rows));
        }
        let rows = rows.min(self.n_periods());
        Ok(Panel {
            dates: self.dates[..rows].to_vec(),
            names: self.names.clone(),
            values: self.values.rows(0, rows).into_owned(),
            missing: self.missing.rows(0, rows).into_owned(),
        })
    }

    /// Sub-panel with the named series, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Panel> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<_>>()?;
        Ok(Panel {
            dates: self.dates.clone(),
            names: idx.iter().map(|&j| self.names[j].clone()).collect(),
            values: self.values.select_columns(&idx),
            missing: self.missing.select_columns(&idx),
        })
    }

    /// Panel without the named series.
    pub fn without(&self, name: &str) -> Result<Panel> {
        let drop = self.column_index(name)?;
        let keep: Vec<&str> = self
            .names
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != drop)
            .map(|(_, n)| n.as_str())
            .collect();
        self.select(&keep)
    }

    /// Appends a column, which must cover the same dates.
    pub fn with_column(&self, name: &str, column: &[Option<f64>]) -> Result<Panel> {
        let mut names = self.names.clone();
        names.push(name.to_string());
        let mut columns: Vec<Vec<Option<f64>>> =
            (0..self.n_series()).map(|j| self.column(j)).collect();
        columns.push(column.to_vec());
        Panel::from_columns(self.dates.clone(), names, columns)
    }

    /// Index of the first row where every series is observed.
    pub fn first_complete_row(&self) -> Option<usize> {
        (0..self.n_periods()).find(|&i| (0..self.n_series()).all(|j| !self.missing[(i, j)]))
    }

    /// Drops trailing rows in which any series is missing (a ragged edge).
    pub fn trim_ragged_edge(&self) -> Result<Panel> {
        let mut last = self.n_periods();
        while last > 0 && (0..self.n_series()).any(|j| self.missing[(last - 1, j)]) {
            last -= 1;
        }
        self.head(last)
    }
}

impl PartialEq for Panel {
    /// Equal dates, names, missing masks and observed values.
    fn eq(&self, other: &Self) -> bool {
        self.dates == other.dates
            && self.names == other.names
            && self.missing == other.missing
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .zip(self.missing.iter())
                .all(|((a, b), &m)| m || a == b)
    }
}

/// Consecutive monthly dates starting at `start`.
pub fn monthly_dates(start: YearMonth, count: usize) -> Vec<YearMonth> {
    (0..count as i64).map(|k| start.offset(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ym(y: i32, m: u32) -> YearMonth {
        YearMonth::new(y, m).unwrap()
    }

    #[test]
    fn rejects_uneven_dates() {
        let dates = vec![ym(2000, 1), ym(2000, 2), ym(2000, 4)];
        let err =
            Panel::from_columns(dates, vec!["a".into()], vec![vec![Some(1.0); 3]]).unwrap_err();
        assert!(matches!(err, Error::InvalidPanel(_)));
    }

    #[test]
    fn rejects_short_or_empty_panels() {
        assert!(
            Panel::from_columns(vec![ym(2000, 1)], vec!["a".into()], vec![vec![Some(1.0)]])
                .is_err()
        );
        assert!(Panel::from_columns(monthly_dates(ym(2000, 1), 3), vec![], vec![]).is_err());
    }

    #[test]
    fn missing_cells_are_never_read_as_numbers() {
        let p = Panel::from_columns(
            monthly_dates(ym(2000, 1), 3),
            vec!["a".into()],
            vec![vec![None, Some(2.0), Some(3.0)]],
        )
        .unwrap();
        assert_eq!(p.get(0, 0), None);
        assert!(p.values()[(0, 0)].is_nan());
        assert_eq!(p.first_complete_row(), Some(1));
    }

    #[test]
    fn truncation_and_row_lookup() {
        let p = Panel::from_columns(
            monthly_dates(ym(1999, 11), 6),
            vec!["a".into(), "b".into()],
            vec![vec![Some(1.0); 6], vec![Some(2.0); 6]],
        )
        .unwrap();
        assert_eq!(p.row_of(ym(2000, 1)), Some(2));
        assert_eq!(p.row_of(ym(2001, 1)), None);
        let t = p.truncate_through(ym(2000, 2)).unwrap();
        assert_eq!(t.n_periods(), 4);
        assert_eq!(p.without("a").unwrap().names(), &["b".to_string()]);
    }

    #[test]
    fn ragged_edge_is_trimmed() {
        let p = Panel::from_columns(
            monthly_dates(ym(2000, 1), 4),
            vec!["a".into(), "b".into()],
            vec![
                vec![Some(1.0); 4],
                vec![Some(1.0), Some(1.0), Some(1.0), None],
            ],
        )
        .unwrap();
        assert_eq!(p.trim_ragged_edge().unwrap().n_periods(), 3);
    }
}
