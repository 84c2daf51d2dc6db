//! JSON file formats.
//!
//! * matrix: `{"n": 2, "data": [[re, im], ...]}`, row-major, `n^2` entries
//! * vector: `{"values": [...]}`
//! * sequence spec: `{"prefix": [...], "tail": {...}}`
//! * truncation metadata: `{"depth", "covered", "residual_bound", "permutation", "continuation"}`

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::carpenter::{Continuation, SequenceSpec, TruncatedProjection};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::Complex64;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    n: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorFile {
    values: Vec<f64>,
}

/// Metadata stored next to a truncated projection's matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationMeta {
    pub depth: usize,
    pub covered: Vec<u64>,
    pub residual_bound: Option<f64>,
    /// Sequence index carried by each diagonal slot.
    pub permutation: Vec<Option<u64>>,
    pub continuation: Continuation,
}

impl From<&TruncatedProjection> for TruncationMeta {
    fn from(p: &TruncatedProjection) -> Self {
        TruncationMeta {
            depth: p.depth,
            covered: p.covered(),
            residual_bound: p.residual_bound,
            permutation: p.positions.clone(),
            continuation: p.continuation,
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    let file = MatrixFile {
        n: m.dim(),
        data: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_value(file).expect("matrix serialises")
}

pub fn matrix_from_json(value: Value) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let data = file.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    ComplexMatrix::new(file.n, data)
}

pub fn vector_from_json(value: Value) -> Result<Vec<f64>> {
    let file: VectorFile = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    if let Some(index) = file.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(file.values)
}

pub fn vector_to_json(v: &[f64]) -> Value {
    serde_json::to_value(VectorFile { values: v.to_vec() }).expect("vector serialises")
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    matrix_from_json(read_json(path)?)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_json(path, &matrix_to_json(m))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    vector_from_json(read_json(path)?)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_json(path, &vector_to_json(v))
}

pub fn read_spec(path: &Path) -> Result<SequenceSpec> {
    SequenceSpec::from_json(read_json(path)?)
}

pub fn write_spec(path: &Path, spec: &SequenceSpec) -> Result<()> {
    write_json(path, &spec.to_json())
}

/// Writes the matrix to `matrix_path` and its metadata to `meta_path`.
pub fn write_truncated(matrix_path: &Path, meta_path: &Path, p: &TruncatedProjection) -> Result<()> {
    write_matrix(matrix_path, &p.matrix)?;
    write_json(meta_path, &TruncationMeta::from(p))
}

pub fn read_truncation_meta(path: &Path) -> Result<TruncationMeta> {
    serde_json::from_value(read_json(path)?).map_err(|e| Error::Format(e.to_string()))
}

/// A diagonal given either as a finite vector or as a sequence spec.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagonalInput {
    Finite(Vec<f64>),
    Spec(SequenceSpec),
}

/// Reads a vector file or a spec file, told apart by their keys.
pub fn read_diagonal_input(path: &Path) -> Result<DiagonalInput> {
    let value = read_json(path)?;
    match &value {
        Value::Object(map) if map.contains_key("values") => Ok(DiagonalInput::Finite(vector_from_json(value)?)),
        Value::Object(map) if map.contains_key("tail") => Ok(DiagonalInput::Spec(SequenceSpec::from_json(value)?)),
        _ => Err(Error::Format(format!(
            "{}: expected a vector file or a sequence spec",
            path.display()
        ))),
    }
}
