//! CSV and JSON serialization.
//!
//! CSV: comma separated, LF line endings, `.` decimal separator, at most one
//! header row. JSON results use a fixed key order and print every float with
//! 17 significant digits so output bytes are reproducible.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{ClusteringResult, DataMatrix, Diagnostics};

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| Error::io(path, e))?;
    Ok(s)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Parses numeric CSV text into rows. `origin` is used only in error messages.
pub fn parse_csv_rows(text: &str, has_header: bool, origin: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            column: None,
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map_or(rows.len() + 1, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line,
                column: None,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        path: origin.to_path_buf(),
                        line,
                        column: Some(c + 1),
                        message: format!("'{cell}' is not a finite number"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads an `n × p` data matrix.
pub fn read_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let path = path.as_ref();
    let rows = parse_csv_rows(&read_to_string(path)?, has_header, path)?;
    DataMatrix::from_rows(&rows)
}

/// Same as [`read_csv`] but treats the first line as a header if it is not numeric.
pub fn read_csv_auto(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    let header = first.split(',').any(|c| c.trim().parse::<f64>().is_err());
    DataMatrix::from_rows(&parse_csv_rows(&text, header, path)?)
}

pub fn matrix_to_csv(values: &ArrayView2<'_, f64>, header: Option<&[String]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes a matrix with `{:?}` float formatting (shortest round-trip representation).
pub fn write_csv(
    path: impl AsRef<Path>,
    values: &ArrayView2<'_, f64>,
    header: Option<&[String]>,
) -> Result<()> {
    write_bytes(path.as_ref(), matrix_to_csv(values, header).as_bytes())
}

/// Writes one label per line under a `label` header.
pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = String::from("label\n");
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_bytes(path.as_ref(), out.as_bytes())
}

/// Reads integer labels from the first column; a non-numeric first line is a header.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let cell = line.split(',').next().unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<i64>() {
            Ok(v) => labels.push(v),
            Err(_) if idx == 0 => {}
            Err(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    column: Some(1),
                    message: format!("'{cell}' is not an integer label"),
                })
            }
        }
    }
    Ok(labels)
}

/// JSON formatter that prints floats as `{:.16e}` (17 significant digits).
struct SigDigitsFormatter;

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

#[derive(Serialize, Deserialize)]
struct ResultDocument {
    labels: Vec<usize>,
    k: usize,
    centroids: Vec<Vec<f64>>,
    fused_edges: Vec<(usize, usize)>,
    diagnostics: DiagnosticsDocument,
}

#[derive(Serialize, Deserialize)]
struct DiagnosticsDocument {
    iterations: usize,
    final_w_change: Option<f64>,
    objective_trace: Vec<Option<f64>>,
    converged: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Serializes a result as JSON with keys `labels, k, centroids, fused_edges, diagnostics`.
pub fn result_to_json(result: &ClusteringResult) -> Result<Vec<u8>> {
    let doc = ResultDocument {
        labels: result.labels.clone(),
        k: result.k,
        centroids: result
            .centroids
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
        fused_edges: result.fused_edges.clone(),
        diagnostics: DiagnosticsDocument {
            iterations: result.diagnostics.iterations,
            final_w_change: finite(result.diagnostics.final_w_change),
            objective_trace: result
                .diagnostics
                .objective_trace
                .iter()
                .map(|&v| finite(v))
                .collect(),
            converged: result.diagnostics.converged,
        },
    };
    to_json_bytes(&doc)
}

pub fn write_result(result: &ClusteringResult, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &result_to_json(result)?)
}

pub fn read_result(path: impl AsRef<Path>) -> Result<ClusteringResult> {
    let path = path.as_ref();
    let doc: ResultDocument = serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    let n = doc.centroids.len();
    let p = doc.centroids.first().map_or(0, Vec::len);
    let centroids = Array2::from_shape_vec((n, p), doc.centroids.into_iter().flatten().collect())
        .map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(ClusteringResult {
        centroids,
        labels: doc.labels,
        fused_edges: doc.fused_edges,
        k: doc.k,
        diagnostics: Diagnostics {
            iterations: doc.diagnostics.iterations,
            final_w_change: doc.diagnostics.final_w_change.unwrap_or(f64::NAN),
            objective_trace: doc
                .diagnostics
                .objective_trace
                .into_iter()
                .map(|v| v.unwrap_or(f64::NAN))
                .collect(),
            converged: doc.diagnostics.converged,
        },
    })
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub scenario: String,
    pub method: String,
    pub mean_ari: f64,
    pub se_ari: f64,
}

/// Mean and standard error (`sample sd / √reps`) of replicate scores.
///
/// A single replicate has standard error 0.
pub fn mean_and_se(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "cannot summarize an empty replication list".into(),
        ));
    }
    let reps = values.len() as f64;
    let mean = values.iter().sum::<f64>() / reps;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1.0);
    Ok((mean, (var / reps).sqrt()))
}

impl BenchmarkRow {
    pub fn from_replications(
        scenario: impl Into<String>,
        method: impl Into<String>,
        aris: &[f64],
    ) -> Result<Self> {
        let (mean_ari, se_ari) = mean_and_se(aris)?;
        Ok(BenchmarkRow {
            scenario: scenario.into(),
            method: method.into(),
            mean_ari,
            se_ari,
        })
    }
}

pub fn benchmark_table_csv(rows: &[BenchmarkRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["scenario", "method", "mean_ari", "se_ari"])
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn write_benchmark_table(rows: &[BenchmarkRow], path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), benchmark_table_csv(rows)?.as_bytes())
}

/// CSV with columns `lambda,k,objective,iterations,converged`, one row per λ.
pub fn path_table_csv(points: &[crate::experiment::PathPoint]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["lambda", "k", "objective", "iterations", "converged"])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for p in points {
        w.write_record([
            format!("{:?}", p.lambda),
            p.k.to_string(),
            format!("{:?}", p.objective),
            p.iterations.to_string(),
            p.converged.to_string(),
        ])
        .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn write_path_table(
    points: &[crate::experiment::PathPoint],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_bytes(path.as_ref(), path_table_csv(points)?.as_bytes())
}
