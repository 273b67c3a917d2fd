//! JSON forms of matrices and subspaces.
//!
//! A matrix is `{"rows": n, "cols": m, "data": [row-major entries]}`; a
//! subspace is `{"ambient": n, "span": <matrix>}` whose columns span it.
//! Subspaces are canonicalized on load, so the stored basis is orthonormal
//! whatever spanning set the file gave.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{subspace_from_span, Operator, Subspace, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceFile {
    pub ambient: usize,
    pub span: MatrixFile,
}

impl MatrixFile {
    pub fn to_operator(&self) -> Result<Operator> {
        Operator::new(self.rows, self.cols, &self.data)
    }
}

impl From<&Operator> for MatrixFile {
    fn from(op: &Operator) -> Self {
        MatrixFile {
            rows: op.rows(),
            cols: op.cols(),
            data: op.row_major(),
        }
    }
}

impl SubspaceFile {
    pub fn to_subspace(&self, tol: &Tolerance) -> Result<Subspace> {
        let span = self.span.to_operator()?;
        if span.rows() != self.ambient {
            return Err(Error::DimensionMismatch(format!(
                "span has {} rows but ambient dimension is {}",
                span.rows(),
                self.ambient
            )));
        }
        Ok(subspace_from_span(&span, tol))
    }
}

impl From<&Subspace> for SubspaceFile {
    fn from(s: &Subspace) -> Self {
        SubspaceFile {
            ambient: s.ambient_dim(),
            span: MatrixFile::from(&s.basis()),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_matrix(text: &str) -> Result<Operator> {
    parse::<MatrixFile>(text)?.to_operator()
}

pub fn parse_subspace(text: &str, tol: &Tolerance) -> Result<Subspace> {
    parse::<SubspaceFile>(text)?.to_subspace(tol)
}

/// A column vector stored as an `n × 1` matrix.
pub fn parse_vector(text: &str) -> Result<DVector<f64>> {
    let m = parse_matrix(text)?;
    if m.cols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected an n x 1 vector, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.as_matrix().column(0).into_owned())
}

pub fn matrix_json(op: &Operator) -> serde_json::Value {
    serde_json::to_value(MatrixFile::from(op)).expect("matrix serializes")
}

pub fn subspace_json(s: &Subspace) -> serde_json::Value {
    serde_json::to_value(SubspaceFile::from(s)).expect("subspace serializes")
}

pub fn vector_json(v: &DVector<f64>) -> serde_json::Value {
    matrix_json(&Operator::wrap(nalgebra::DMatrix::from_column_slice(
        v.len(),
        1,
        v.as_slice(),
    )))
}
