//! JSON encodings of matrices and parameter sequences.
//!
//! Matrices: `{"rows": n, "cols": m, "data": [[re, im], ...]}` in row-major order.
//! Parameters: `{"d": d, "alphas": [matrix, ...], "terminal": matrix | null}`.

use std::path::Path;

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::schur::SchurParameterSequence;

/// Version stamped into every report this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix<f64>> for MatrixJson {
    fn from(m: &ComplexMatrix<f64>) -> Self {
        Self { rows: m.rows(), cols: m.cols(), data: m.data().iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix<f64> {
    type Error = Error;

    fn try_from(m: &MatrixJson) -> Result<Self> {
        let data = m.data.iter().map(|&[re, im]| Complex::new(re, im)).collect();
        let out = ComplexMatrix::from_row_major(m.rows, m.cols, data)?;
        if !out.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub d: usize,
    pub alphas: Vec<MatrixJson>,
    #[serde(default)]
    pub terminal: Option<MatrixJson>,
}

impl From<&SchurParameterSequence<f64>> for ParamsJson {
    fn from(p: &SchurParameterSequence<f64>) -> Self {
        Self {
            d: p.d(),
            alphas: p.alphas().iter().map(MatrixJson::from).collect(),
            terminal: p.terminal().map(MatrixJson::from),
        }
    }
}

impl TryFrom<&ParamsJson> for SchurParameterSequence<f64> {
    type Error = Error;

    fn try_from(p: &ParamsJson) -> Result<Self> {
        let alphas = p.alphas.iter().map(ComplexMatrix::try_from).collect::<Result<Vec<_>>>()?;
        let terminal = p.terminal.as_ref().map(ComplexMatrix::try_from).transpose()?;
        SchurParameterSequence::new(p.d, alphas, terminal)
    }
}

pub fn parse_json<D: DeserializeOwned>(text: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_json_pretty<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix<f64>> {
    ComplexMatrix::try_from(&parse_json::<MatrixJson>(text)?)
}

pub fn matrix_to_json(m: &ComplexMatrix<f64>) -> String {
    to_json_pretty(&MatrixJson::from(m))
}

pub fn params_from_json(text: &str) -> Result<SchurParameterSequence<f64>> {
    SchurParameterSequence::try_from(&parse_json::<ParamsJson>(text)?)
}

pub fn params_to_json(p: &SchurParameterSequence<f64>) -> String {
    to_json_pretty(&ParamsJson::from(p))
}

/// A vector of complex numbers as `[[re, im], ...]`.
pub fn vector_from_json(text: &str) -> Result<Vec<Complex<f64>>> {
    let raw: Vec<[f64; 2]> = parse_json(text)?;
    Ok(raw.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
}
