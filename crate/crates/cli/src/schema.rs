//! Column layouts of every emitted CSV, with a reader that checks them.

use std::path::Path;

use spm_core::fmt::fmt_f64;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Real,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    Steps,
    LinearSteps,
    Projection1d,
    Projection2d,
    Summary,
    Timing,
}

use Kind::*;

const STEPS: &[(&str, Kind)] = &[
    ("step", Int),
    ("t", Real),
    ("z", Real),
    ("mean_weight", Real),
    ("stored_cells", Int),
    ("update_cells", Int),
    ("mean_jumps", Real),
    ("imbalance", Real),
    ("error_p", Real),
    ("error_m", Real),
    ("sign_coherence", Real),
];

const LINEAR_STEPS: &[(&str, Kind)] = &[
    ("step", Int),
    ("t", Real),
    ("o1", Real),
    ("o2", Real),
    ("o1_exact", Real),
    ("mean_jumps", Real),
];

const PROJECTION_1D: &[(&str, Kind)] = &[("x", Real), ("numeric", Real), ("reference", Real)];

const PROJECTION_2D: &[(&str, Kind)] = &[("x1", Real), ("x2", Real), ("numeric", Real), ("reference", Real)];

const SUMMARY: &[(&str, Kind)] = &[
    ("experiment", Text),
    ("strategy", Text),
    ("N", Int),
    ("d", Int),
    ("h", Real),
    ("tau", Real),
    ("T", Real),
    ("seed", Int),
    ("workers", Int),
    ("error_u", Real),
    ("error_p", Real),
    ("error_m", Real),
    ("sign_coherence", Real),
    ("o1", Real),
    ("o1_exact", Real),
    ("o1_rel_error", Real),
    ("o2", Real),
    ("marginal_error", Real),
    ("mass", Real),
    ("occupancy", Real),
    ("stored_cells_peak", Int),
];

const TIMING: &[(&str, Kind)] = &[("phase", Text), ("wall_seconds", Real)];

impl FileKind {
    pub fn file_name(self) -> &'static str {
        match self {
            FileKind::Steps | FileKind::LinearSteps => "steps.csv",
            FileKind::Projection1d => "projection_1d.csv",
            FileKind::Projection2d => "projection_2d.csv",
            FileKind::Summary => "summary.csv",
            FileKind::Timing => "timing.csv",
        }
    }

    pub fn columns(self) -> &'static [(&'static str, Kind)] {
        match self {
            FileKind::Steps => STEPS,
            FileKind::LinearSteps => LINEAR_STEPS,
            FileKind::Projection1d => PROJECTION_1D,
            FileKind::Projection2d => PROJECTION_2D,
            FileKind::Summary => SUMMARY,
            FileKind::Timing => TIMING,
        }
    }

    pub fn header(self) -> Vec<&'static str> {
        self.columns().iter().map(|c| c.0).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(u64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) => fmt_f64(*v),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    /// Equality with NaN equal to itself.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
            _ => self == other,
        }
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{file}: header {found:?} does not match {expected:?}")]
    Header { file: String, found: Vec<String>, expected: Vec<&'static str> },
    #[error("{file} row {row}, column `{column}`: cannot parse `{value}`")]
    Field { file: String, row: usize, column: &'static str, value: String },
    #[error("{file} row {row}: expected {expected} fields, found {found}")]
    Width { file: String, row: usize, expected: usize, found: usize },
    #[error("{file} row {row}: value kinds do not match the schema")]
    Kind { file: String, row: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub kind: FileKind,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(kind: FileKind) -> Self {
        Table { kind, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let k = self.kind.columns().iter().position(|c| c.0 == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn reals(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.into_iter().map(Value::as_f64).collect()
    }

    /// Serialized bytes; fixed `\n` terminators.
    pub fn to_bytes(&self) -> Result<Vec<u8>, SchemaError> {
        let cols = self.kind.columns();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.kind.header())?;
        for (i, row) in self.rows.iter().enumerate() {
            let ok = row.len() == cols.len()
                && row.iter().zip(cols).all(|(v, c)| {
                    matches!((v, c.1), (Value::Int(_), Int) | (Value::Real(_), Real) | (Value::Text(_), Text))
                });
            if !ok {
                return Err(SchemaError::Kind {
                    file: self.kind.file_name().into(),
                    row: i + 1,
                });
            }
            w.write_record(row.iter().map(Value::render))?;
        }
        w.into_inner().map_err(|e| SchemaError::Io(e.into_error()))
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<u8>, SchemaError> {
        let bytes = self.to_bytes()?;
        std::fs::write(dir.join(self.kind.file_name()), &bytes)?;
        Ok(bytes)
    }

    pub fn parse(kind: FileKind, bytes: &[u8]) -> Result<Self, SchemaError> {
        let file = kind.file_name().to_string();
        let cols = kind.columns();
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if found != kind.header() {
            return Err(SchemaError::Header {
                file,
                found,
                expected: kind.header(),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != cols.len() {
                return Err(SchemaError::Width {
                    file,
                    row: i + 1,
                    expected: cols.len(),
                    found: rec.len(),
                });
            }
            let mut row = Vec::with_capacity(cols.len());
            for (field, &(column, k)) in rec.iter().zip(cols) {
                let bad = || SchemaError::Field {
                    file: file.clone(),
                    row: i + 1,
                    column,
                    value: field.into(),
                };
                row.push(match k {
                    Int => Value::Int(field.parse().map_err(|_| bad())?),
                    Real => Value::Real(field.parse().map_err(|_| bad())?),
                    Text => Value::Text(field.into()),
                });
            }
            rows.push(row);
        }
        Ok(Table { kind, rows })
    }

    pub fn read(kind: FileKind, dir: &Path) -> Result<Self, SchemaError> {
        Self::parse(kind, &std::fs::read(dir.join(kind.file_name()))?)
    }

    pub fn same(&self, other: &Table) -> bool {
        self.kind == other.kind
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same(y)))
    }
}
