//! Series CSV, structure dumps and JSON distance reports.
//!
//! Series files have a header `d0,d1,…` followed by one state per line.
//! Numbers are written in shortest round-trip form, so reading back a written
//! series reproduces every double exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::congruence::CongruenceResult;
use crate::error::{Error, Result};
use crate::gen::RatioRecord;
use crate::series::{RigidTransform, TimeSeries};
use crate::structure::StructureMatrix;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_series_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    parse_series_csv(file)
}

/// Parses the series CSV format. Line numbers in errors count the header as 1.
pub fn parse_series_csv<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::parse(1, "empty input")),
        Some(r) => r.map_err(|e| csv_err(e, 1))?,
    };
    let dim = header.len();
    if dim == 0 || header.iter().all(str::is_empty) {
        return Err(Error::parse(1, "empty header"));
    }
    let mut data = Vec::new();
    let mut line = 1;
    for rec in records {
        let rec = rec.map_err(|e| csv_err(e, line + 1))?;
        line = rec.position().map_or(line + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != dim {
            return Err(Error::parse(
                line,
                format!("row has {} fields, header has {dim}", rec.len()),
            ));
        }
        for cell in rec.iter() {
            let x: f64 = cell
                .parse()
                .map_err(|_| Error::parse(line, format!("non-numeric cell {cell:?}")))?;
            if !x.is_finite() {
                return Err(Error::parse(line, format!("non-finite cell {cell:?}")));
            }
            data.push(x);
        }
    }
    if data.is_empty() {
        return Err(Error::parse(line, "no data rows"));
    }
    TimeSeries::from_flat(dim, data)
}

fn csv_err(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

fn join(values: impl Iterator<Item = f64>) -> String {
    values
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_series<W: Write>(t: &TimeSeries, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (0..t.dim()).map(|c| format!("d{c}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for s in t.states() {
        writeln!(out, "{}", join(s.iter().copied()))?;
    }
    out.flush()
}

pub fn write_series_csv(t: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_series(t, BufWriter::new(file)).map_err(io_err(path))
}

/// One line per row `i < n − 1`, entries by increasing lag.
pub fn write_structure<W: Write>(m: &StructureMatrix, mut out: W) -> std::io::Result<()> {
    for row in m.rows() {
        writeln!(out, "{}", join(row.into_iter()))?;
    }
    out.flush()
}

/// Ratio experiment rows; undefined ratios are left empty.
pub fn write_ratio_records<W: Write>(records: &[RatioRecord], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "series_id,d1,delta_m,reduced_delta_m,e_delta,e_reduced"
    )?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:?}"));
    for r in records {
        writeln!(
            out,
            "{},{:?},{:?},{:?},{},{}",
            r.series_id,
            r.d1,
            r.delta_m,
            r.reduced_delta_m,
            opt(r.e_delta),
            opt(r.e_reduced)
        )?;
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Series,
    Delta,
    ReducedDelta,
    CongruenceUpper,
    CongruenceBoolean,
    #[serde(rename = "congruence-grid2")]
    CongruenceGrid2,
    CongruenceSignedPerm,
}

impl Measure {
    pub fn is_congruence(self) -> bool {
        matches!(
            self,
            Measure::CongruenceUpper
                | Measure::CongruenceBoolean
                | Measure::CongruenceGrid2
                | Measure::CongruenceSignedPerm
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Row-major orthogonal matrix.
    pub matrix: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl From<&RigidTransform> for Witness {
    fn from(tr: &RigidTransform) -> Self {
        Witness {
            matrix: tr.matrix_rows(),
            translation: tr.translation().iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub measure: Measure,
    pub value: f64,
    /// Window offset into the longer series; only set when lengths differ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    pub params: serde_json::Value,
}

impl DistanceReport {
    /// Report for a non-congruence measure. Values are exact up to rounding.
    pub fn plain(
        measure: Measure,
        value: f64,
        offset: Option<usize>,
        params: serde_json::Value,
    ) -> Self {
        debug_assert!(!measure.is_congruence());
        DistanceReport {
            measure,
            value,
            offset,
            witness: None,
            certified: true,
            converged: None,
            error_bound: None,
            params,
        }
    }

    pub fn congruence(measure: Measure, r: &CongruenceResult, params: serde_json::Value) -> Self {
        debug_assert!(measure.is_congruence());
        DistanceReport {
            measure,
            value: r.value,
            offset: None,
            witness: Some(Witness::from(&r.transform)),
            certified: r.is_certified_exact,
            converged: Some(r.converged),
            error_bound: r.error_bound,
            params,
        }
    }
}

pub fn write_report<W: Write>(r: &DistanceReport, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, r)?;
    writeln!(out)?;
    out.flush()
}

pub fn write_report_json(r: &DistanceReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_report(r, BufWriter::new(file)).map_err(io_err(path))
}
