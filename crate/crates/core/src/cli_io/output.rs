use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::series::TimeSeries;

/// An I/O failure together with the path involved.
#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn create_parent(path: &Path) -> Result<(), OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| OutputError {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    create_parent(path)?;
    fs::write(path, bytes).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

/// Shortest round-trip form, with an exponent for very large or small magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

/// Probe records as CSV text. Columns that no record carries are omitted.
pub fn series_csv(ts: &TimeSeries) -> String {
    let with_err = ts.has_target();
    let with_h = ts.has_front();
    let with_g = ts.has_left_front();
    let mut header = vec!["t", "sup_u", "inf_u"];
    if with_err {
        header.push("err_to_target");
    }
    if with_h {
        header.push("h");
    }
    if with_g {
        header.push("g");
    }
    if with_h {
        header.push("ux_front");
    }
    header.push("clip_mass");

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in &ts.records {
        let mut row = vec![num(r.t), num(r.sup_u), num(r.inf_u)];
        if with_err {
            row.push(cell(r.err_to_target));
        }
        if with_h {
            row.push(cell(r.h));
        }
        if with_g {
            row.push(cell(r.g));
        }
        if with_h {
            row.push(cell(r.ux_front));
        }
        row.push(num(r.clip_mass));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Write the series as CSV to `path`, creating parent directories.
pub fn emit_series(ts: &TimeSeries, path: &Path) -> Result<(), OutputError> {
    write_bytes(path, series_csv(ts).as_bytes())
}

/// Pretty JSON with a trailing newline.
pub fn report_json<T: Serialize + ?Sized>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Write a report as JSON to `path`, creating parent directories.
pub fn emit_report<T: Serialize + ?Sized>(report: &T, path: &Path) -> Result<(), OutputError> {
    write_bytes(path, report_json(report).as_bytes())
}

/// Write delimited rows (header first) to `path`.
pub fn emit_table(rows: &[Vec<String>], path: &Path) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    write_bytes(path, &bytes)
}
