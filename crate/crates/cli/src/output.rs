//! CSV rendering of sweep tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::preset::Engine;
use crate::sweep::{Cell, Row, SweepTable};

/// Significant digits written for every floating-point column.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const STATUS_COLUMN: &str = "status";
pub const STATUS_OK: &str = "ok";

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
}

/// Header of the result table.
pub fn header(table: &SweepTable) -> Vec<String> {
    let mut h = vec![table.parameter.clone()];
    for s in &table.series {
        if table.engine.analytic() {
            h.push(format!("{s}_analytic"));
        }
        if table.engine.simulation() {
            h.push(format!("{s}_sim"));
            h.push(format!("{s}_ci"));
        }
    }
    h.push(STATUS_COLUMN.into());
    h
}

fn record(table: &SweepTable, row: &Row) -> Vec<String> {
    let mut r = vec![format_value(row.value)];
    for c in &row.cells {
        let mut push = |v: Option<f64>| r.push(v.map(format_value).unwrap_or_default());
        if table.engine.analytic() {
            push(c.analytic);
        }
        if table.engine.simulation() {
            push(c.sim);
            push(c.ci_halfwidth);
        }
    }
    r.push(STATUS_OK.into());
    r
}

fn error_record(width: usize, value: f64, err: &CliError) -> Vec<String> {
    let mut r = vec![format_value(value)];
    r.resize(width - 1, String::new());
    r.push(format!("error: {err}"));
    r
}

/// Writes the table as CSV: header, one line per row, then an error row if
/// the sweep stopped early. Each row is flushed as it is written.
pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let head = header(table);
    let width = head.len();
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&head).map_err(io)?;
    for row in &table.rows {
        w.write_record(record(table, row)).map_err(io)?;
        w.flush()?;
    }
    if let Some((value, err)) = &table.failure {
        w.write_record(error_record(width, *value, err)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_csv(table, std::io::BufWriter::new(file))
}

/// Path of the per-cell timing file written next to `path`.
pub fn runtime_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".runtime.csv");
    path.with_file_name(name)
}

/// Writes per-cell wall-clock seconds. Kept out of the result table so that
/// reruns with the same seed reproduce it byte for byte.
pub fn emit_runtimes(table: &SweepTable, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut head = vec![table.parameter.clone()];
    head.extend(table.series.iter().map(|s| format!("{s}_runtime_s")));
    w.write_record(&head).map_err(io)?;
    for row in &table.rows {
        let mut r = vec![format_value(row.value)];
        r.extend(row.cells.iter().map(|c| format!("{:.3}", c.runtime)));
        w.write_record(&r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table written by [`write_csv`]; runtimes are not restored.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<SweepTable, CliError> {
    let bad = |m: &str| CliError::Io(format!("malformed table: {m}"));
    let mut rdr = csv::Reader::from_reader(input);
    let head: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if head.len() < 2 || head.last().map(String::as_str) != Some(STATUS_COLUMN) {
        return Err(bad("missing status column"));
    }
    let analytic = head.iter().any(|h| h.ends_with("_analytic"));
    let simulation = head.iter().any(|h| h.ends_with("_sim"));
    let engine = match (analytic, simulation) {
        (true, true) => Engine::Both,
        (true, false) => Engine::Analytic,
        (false, true) => Engine::Simulation,
        (false, false) => return Err(bad("no result columns")),
    };
    let per_series = analytic as usize + 2 * simulation as usize;
    let body = &head[1..head.len() - 1];
    if body.len() % per_series != 0 {
        return Err(bad("column count"));
    }
    let series = body
        .chunks(per_series)
        .map(|c| {
            let first = &c[0];
            let suffix = if analytic { "_analytic" } else { "_sim" };
            first.strip_suffix(suffix).map(str::to_string).ok_or_else(|| bad(first))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = SweepTable::new(&head[0], series, engine);

    let num = |s: &str| -> Result<Option<f64>, CliError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(s))
        }
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        let value = num(&rec[0])?.ok_or_else(|| bad("empty swept value"))?;
        let status = &rec[rec.len() - 1];
        if status != STATUS_OK {
            let msg = status.strip_prefix("error: ").unwrap_or(status);
            table.failure = Some((value, CliError::Numeric(msg.to_string())));
            break;
        }
        let fields: Vec<&str> = rec.iter().skip(1).take(body.len()).collect();
        let cells = fields
            .chunks(per_series)
            .map(|c| {
                let mut it = c.iter();
                let mut cell = Cell::default();
                if analytic {
                    cell.analytic = num(it.next().unwrap())?;
                }
                if simulation {
                    cell.sim = num(it.next().unwrap())?;
                    cell.ci_halfwidth = num(it.next().unwrap())?;
                }
                Ok(cell)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        table.rows.push(Row { value, cells });
    }
    Ok(table)
}
