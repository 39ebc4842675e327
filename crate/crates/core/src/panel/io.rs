//! CSV readers and writers.
//!
//! FRED-MD layout: a header row of series names (first cell is the date
//! column label), a second row of integer transform codes, then one row per
//! period with the date in `YYYY-MM` or `M/D/YYYY` form. Blank cells are
//! missing.
//!
//! Internal panel layout: the same without the transform row, with ISO
//! `YYYY-MM` dates.

use std::io::{Read, Write};

use super::{Panel, TransformCode, YearMonth};
use crate::error::{Error, Result};

/// A parsed FRED-MD file: raw levels plus the per-series transform codes.
#[derive(Debug, Clone)]
pub struct FredMd {
    pub panel: Panel,
    pub codes: Vec<TransformCode>,
}

fn parse_cell(s: &str, row: usize, col: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") || s == "." {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("row {row}, series `{col}`: `{s}` is not a number")))
}

fn read_body(
    records: impl Iterator<Item = csv::Result<csv::StringRecord>>,
    names: &[String],
    first_row: usize,
) -> Result<Panel> {
    let mut dates = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for (k, rec) in records.enumerate() {
        let rec = rec?;
        let row = first_row + k;
        let date_cell = rec.get(0).unwrap_or("").trim();
        if date_cell.is_empty() {
            continue;
        }
        dates.push(YearMonth::parse(date_cell)?);
        if rec.len() > names.len() + 1 {
            return Err(Error::Parse(format!(
                "row {row} has {} cells, expected {}",
                rec.len(),
                names.len() + 1
            )));
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.push(parse_cell(rec.get(j + 1).unwrap_or(""), row, &names[j])?);
        }
    }
    Panel::from_columns(dates, names.to_vec(), columns)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

pub fn read_fredmd_csv<R: Read>(input: R) -> Result<FredMd> {
    let mut rdr = reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty FRED-MD file".into()))??;
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let codes_row = records
        .next()
        .ok_or_else(|| Error::Parse("FRED-MD file has no transform-code row".into()))??;
    let codes = (0..names.len())
        .map(|j| {
            let cell = codes_row.get(j + 1).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!("transform code for `{}` is `{cell}`", names[j]))
            })?;
            if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
                return Err(Error::Parse(format!(
                    "transform code for `{}` is `{cell}`",
                    names[j]
                )));
            }
            TransformCode::new(v as u8)
        })
        .collect::<Result<Vec<_>>>()?;
    let panel = read_body(records, &names, 3)?;
    Ok(FredMd { panel, codes })
}

pub fn read_panel_csv<R: Read>(input: R) -> Result<Panel> {
    let mut rdr = reader(input);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty panel file".into()))??;
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    read_body(records, &names, 2)
}

pub fn write_panel_csv<W: Write>(panel: &Panel, output: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    let mut header = vec!["date".to_string()];
    header.extend(panel.names().iter().cloned());
    w.write_record(&header)?;
    for (i, d) in panel.dates().iter().enumerate() {
        let mut rec = vec![d.to_string()];
        rec.extend((0..panel.n_series()).map(|j| {
            panel
                .get(i, j)
                .map(|v| format!("{v:?}"))
                .unwrap_or_default()
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the FRED-MD layout with `M/D/YYYY` dates.
pub fn write_fredmd_csv<W: Write>(data: &FredMd, output: W) -> Result<()> {
    let panel = &data.panel;
    if data.codes.len() != panel.n_series() {
        return Err(Error::DimensionMismatch {
            expected: panel.n_series(),
            found: data.codes.len(),
        });
    }
    let mut w = csv::Writer::from_writer(output);
    let mut header = vec!["sasdate".to_string()];
    header.extend(panel.names().iter().cloned());
    w.write_record(&header)?;
    let mut codes = vec!["Transform:".to_string()];
    codes.extend(data.codes.iter().map(|c| c.code().to_string()));
    w.write_record(&codes)?;
    for (i, d) in panel.dates().iter().enumerate() {
        let mut rec = vec![format!("{}/1/{}", d.month(), d.year())];
        rec.extend((0..panel.n_series()).map(|j| {
            panel
                .get(i, j)
                .map(|v| format!("{v:?}"))
                .unwrap_or_default()
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
