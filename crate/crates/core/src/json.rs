//! On-disk JSON schemas.
//!
//! * Operator / Vector: `{"dim": d, "entries": [[re, im], ...]}`, operators in
//!   column-major order.
//! * FrameSequence: `{"dim": d, "vectors": [[[re, im], ...], ...]}`.
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSequence;
use crate::opcore::{Matrix, Operator, Scalar, Vector};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntriesJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameJson {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

fn pair(z: &Scalar) -> [f64; 2] {
    [z.re, z.im]
}

fn scalar(p: &[f64; 2]) -> Scalar {
    Scalar::new(p[0], p[1])
}

pub fn vector_to_json(v: &Vector) -> EntriesJson {
    EntriesJson {
        dim: v.len(),
        entries: v.iter().map(pair).collect(),
    }
}

pub fn vector_from_json(j: &EntriesJson) -> Result<Vector> {
    if j.dim == 0 || j.entries.len() != j.dim {
        return Err(Error::InvalidParameters(format!(
            "vector declares dim {} but has {} entries",
            j.dim,
            j.entries.len()
        )));
    }
    let v = Vector::from_iterator(j.dim, j.entries.iter().map(scalar));
    if !crate::opcore::all_finite(v.iter()) {
        return Err(Error::InvalidParameters(
            "vector has non-finite entries".into(),
        ));
    }
    Ok(v)
}

pub fn operator_to_json(t: &Operator) -> EntriesJson {
    EntriesJson {
        dim: t.dim(),
        // nalgebra storage is column-major
        entries: t.matrix().iter().map(pair).collect(),
    }
}

pub fn operator_from_json(j: &EntriesJson) -> Result<Operator> {
    if j.entries.len() != j.dim * j.dim {
        return Err(Error::InvalidParameters(format!(
            "operator declares dim {} but has {} entries (expected {})",
            j.dim,
            j.entries.len(),
            j.dim * j.dim
        )));
    }
    Operator::new(Matrix::from_iterator(
        j.dim,
        j.dim,
        j.entries.iter().map(scalar),
    ))
}

pub fn frame_to_json(f: &FrameSequence) -> FrameJson {
    FrameJson {
        dim: f.dim(),
        vectors: f
            .synthesis_matrix()
            .column_iter()
            .map(|c| c.iter().map(pair).collect())
            .collect(),
    }
}

pub fn frame_from_json(j: &FrameJson) -> Result<FrameSequence> {
    let mut cols = Vec::with_capacity(j.vectors.len());
    for (i, v) in j.vectors.iter().enumerate() {
        if v.len() != j.dim {
            return Err(Error::InvalidParameters(format!(
                "frame vector {i} has {} entries, expected dim {}",
                v.len(),
                j.dim
            )));
        }
        cols.push(Vector::from_iterator(j.dim, v.iter().map(scalar)));
    }
    FrameSequence::from_vectors(&cols)
}

/// Serde adapter for vectors embedded in reports.
pub mod vector_serde {
    use super::{vector_to_json, EntriesJson, Scalar, Vector};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_json(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vector, D::Error> {
        let j = EntriesJson::deserialize(d)?;
        if j.entries.len() != j.dim {
            return Err(serde::de::Error::custom("vector length does not match dim"));
        }
        Ok(Vector::from_iterator(
            j.dim,
            j.entries.iter().map(|p| Scalar::new(p[0], p[1])),
        ))
    }
}
