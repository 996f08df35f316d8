//! CSV readers and writers; every output goes through a temporary file in
//! the destination directory and is renamed into place.

use std::io::Write;
use std::path::Path;

use shiftdens_core::signal::{CurvePanel, TimeGrid};

use crate::error::{CliError, CliResult};

const TIME_TOLERANCE: f64 = 1e-9;
const MIN_ROWS: usize = 4;

pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes())
}

fn parse_cell(cell: &str, line: u64, column: usize) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Data(format!("line {line}, column {column}: '{cell}' is not a finite number"))),
    }
}

/// Wide panel: header `t,curve_1,...,curve_J`, one row per time point
/// `t_i = i/n`.
pub fn read_panel(path: &Path) -> CliResult<CurvePanel> {
    parse_panel(&read_text(path)?)
}

pub fn parse_panel(text: &str) -> CliResult<CurvePanel> {
    if text.trim().is_empty() {
        return Err(CliError::Data("panel file is empty".into()));
    }
    let mut records = reader(text).into_records();
    let header = records
        .next()
        .ok_or_else(|| CliError::Data("panel file is empty".into()))?
        .map_err(|e| CliError::Data(format!("header: {e}")))?;
    let curves = header.len().saturating_sub(1);
    if curves == 0 || &header[0] != "t" {
        return Err(CliError::Data("line 1: header must be 't,curve_1,...,curve_J' with J >= 1".into()));
    }
    for (c, name) in header.iter().enumerate().skip(1) {
        if name != format!("curve_{c}") {
            return Err(CliError::Data(format!("line 1, column {}: expected 'curve_{c}', found '{name}'", c + 1)));
        }
    }
    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); curves];
    for rec in records {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != curves + 1 {
            return Err(CliError::Data(format!(
                "line {line}: expected {} fields, found {}",
                curves + 1,
                rec.len()
            )));
        }
        times.push((line, parse_cell(&rec[0], line, 1)?));
        for (c, col) in columns.iter_mut().enumerate() {
            col.push(parse_cell(&rec[c + 1], line, c + 2)?);
        }
    }
    let n = times.len();
    if n < MIN_ROWS {
        return Err(CliError::Data(format!("panel has {n} time points, at least {MIN_ROWS} are required")));
    }
    for (i, &(line, t)) in times.iter().enumerate() {
        let expected = (i + 1) as f64 / n as f64;
        if (t - expected).abs() > TIME_TOLERANCE {
            return Err(CliError::Data(format!(
                "line {line}, column 1: time {t} does not match the design point {expected} (= {}/{n})",
                i + 1
            )));
        }
    }
    let grid = TimeGrid::new(n).map_err(crate::error::data)?;
    CurvePanel::new(grid, columns, 0.0, None).map_err(crate::error::data)
}

pub fn format_panel(panel: &CurvePanel) -> String {
    let mut out = String::from("t");
    for c in 1..=panel.curves() {
        out.push_str(&format!(",curve_{c}"));
    }
    out.push('\n');
    let grid = panel.grid();
    for i in 0..panel.n() {
        out.push_str(&grid.point(i + 1).to_string());
        for row in panel.rows() {
            out.push(',');
            out.push_str(&row[i].to_string());
        }
        out.push('\n');
    }
    out
}

/// Shift values from a `curve_id,...` table: the `theta_hat` column, else
/// `theta_true`, else the second column.
pub fn read_shift_values(path: &Path) -> CliResult<Vec<f64>> {
    parse_shift_values(&read_text(path)?)
}

pub fn parse_shift_values(text: &str) -> CliResult<Vec<f64>> {
    let mut records = reader(text).into_records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| CliError::Data(format!("header: {e}")))?,
        None => return Err(CliError::Data("shifts file is empty".into())),
    };
    let column = header
        .iter()
        .position(|h| h == "theta_hat")
        .or_else(|| header.iter().position(|h| h == "theta_true"))
        .unwrap_or(1);
    if header.len() <= column {
        return Err(CliError::Data("line 1: shifts file needs at least two columns".into()));
    }
    let mut values = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let cell = rec
            .get(column)
            .ok_or_else(|| CliError::Data(format!("line {line}: missing column {}", column + 1)))?;
        values.push(parse_cell(cell, line, column + 1)?);
    }
    if values.is_empty() {
        return Err(CliError::Data("shifts file has no values".into()));
    }
    Ok(values)
}

pub fn format_true_shifts(shifts: &[f64]) -> String {
    let mut out = String::from("curve_id,theta_true\n");
    for (j, s) in shifts.iter().enumerate() {
        out.push_str(&format!("{},{}\n", j + 1, s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel_text(n: usize) -> String {
        let mut s = String::from("t,curve_1,curve_2\n");
        for i in 1..=n {
            s.push_str(&format!("{},{},{}\n", i as f64 / n as f64, i, -(i as f64)));
        }
        s
    }

    #[test]
    fn parses_well_formed_panel() {
        let p = parse_panel(&panel_text(6)).unwrap();
        assert_eq!(p.n(), 6);
        assert_eq!(p.curves(), 2);
        assert_eq!(p.row(1)[2], -3.0);
    }

    #[test]
    fn round_trips_through_text() {
        let p = parse_panel(&panel_text(5)).unwrap();
        assert_eq!(format_panel(&p), panel_text(5));
    }

    #[test]
    fn rejects_bad_cells_with_position() {
        let text = panel_text(5).replace("\n0.6,3,", "\n0.6,abc,");
        match parse_panel(&text) {
            Err(CliError::Data(m)) => assert!(m.contains("line 4, column 2"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shift_column_preference() {
        let t = "curve_id,theta_true,theta_hat\n1,0.1,0.2\n";
        assert_eq!(parse_shift_values(t).unwrap(), vec![0.2]);
        assert_eq!(parse_shift_values("curve_id,theta_true\n1,0.1\n").unwrap(), vec![0.1]);
        assert_eq!(parse_shift_values("id,x\n1,0.3\n2,0.4\n").unwrap(), vec![0.3, 0.4]);
        assert!(parse_shift_values("").is_err());
        assert!(parse_shift_values("id,x\n").is_err());
    }
}
