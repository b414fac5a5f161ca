//! Deterministic CSV and JSON emission, and parsers for the emitted CSV.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::global::{StabilityReport, StabilityRow};
use crate::lfunc::MomentReport;

/// JSON with object keys sorted at every depth.
pub fn to_sorted_json<T: Serialize>(v: &T) -> Result<String> {
    // serde_json::Map is a BTreeMap unless preserve_order is enabled
    let value = serde_json::to_value(v).map_err(|e| Error::Unsupported(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Unsupported(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_csv<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(vec![]);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    let (line, column) = e
        .position()
        .map_or((0, 0), |p| (p.line() as usize, p.record() as usize));
    Error::Parse {
        line,
        column,
        msg: e.to_string(),
    }
}

fn read_csv<T: for<'de> Deserialize<'de>>(text: &str, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let got = r.headers().map_err(csv_err)?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            msg: format!("expected header {}, got {}", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        });
    }
    r.deserialize().map(|x| x.map_err(csv_err)).collect()
}

/// One line of the moment CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCsvRow {
    #[serde(rename = "N")]
    pub level: u64,
    pub k: u32,
    pub q: u64,
    pub label: String,
    #[serde(rename = "L_re")]
    pub l_re: f64,
    #[serde(rename = "L_im")]
    pub l_im: f64,
    #[serde(rename = "absL2")]
    pub abs_l2: f64,
}

pub const MOMENT_HEADER: [&str; 7] = ["N", "k", "q", "label", "L_re", "L_im", "absL2"];

pub fn moment_rows(reports: &[MomentReport]) -> Vec<MomentCsvRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.entries.iter().map(move |e| MomentCsvRow {
                level: r.level,
                k: r.k,
                q: r.q,
                label: e.label.clone(),
                l_re: e.l_re,
                l_im: e.l_im,
                abs_l2: e.abs_l2,
            })
        })
        .collect()
}

pub fn moment_csv(reports: &[MomentReport]) -> Result<String> {
    write_csv(&MOMENT_HEADER, &moment_rows(reports))
}

pub fn parse_report_csv(text: &str) -> Result<Vec<MomentCsvRow>> {
    read_csv(text, &MOMENT_HEADER)
}

pub const STABILITY_HEADER: [&str; 8] = [
    "M",
    "q",
    "gcd",
    "support_size",
    "finite_part_abs",
    "empty",
    "predicted_empty",
    "boundary",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StabilityCsvRow {
    #[serde(rename = "M")]
    level: u64,
    q: u64,
    gcd: u64,
    support_size: usize,
    finite_part_abs: f64,
    empty: bool,
    predicted_empty: bool,
    boundary: bool,
}

pub fn stability_csv(report: &StabilityReport) -> Result<String> {
    let rows: Vec<StabilityCsvRow> = report
        .rows
        .iter()
        .map(|r| StabilityCsvRow {
            level: r.level,
            q: r.q,
            gcd: r.gcd,
            support_size: r.support_size,
            finite_part_abs: r.finite_part_abs,
            empty: r.empty,
            predicted_empty: r.predicted_empty,
            boundary: r.boundary,
        })
        .collect();
    write_csv(&STABILITY_HEADER, &rows)
}

pub fn parse_stability_csv(text: &str) -> Result<Vec<StabilityRow>> {
    let rows: Vec<StabilityCsvRow> = read_csv(text, &STABILITY_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| StabilityRow {
            level: r.level,
            q: r.q,
            gcd: r.gcd,
            support_size: r.support_size,
            finite_part_abs: r.finite_part_abs,
            empty: r.empty,
            predicted_empty: r.predicted_empty,
            boundary: r.boundary,
        })
        .collect())
}

/// Any serializable row type, with the header taken from the caller.
pub fn rows_csv<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    write_csv(header, rows)
}

/// Writes to `path`, or to standard output when it is None.
pub fn emit(content: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
