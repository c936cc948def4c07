//! Finite frame sequences and their synthesis, analysis and frame operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{
    all_finite, hermitian_extremes, hermitian_part, Matrix, Operator, OperatorBounds, Tolerances,
    Vector,
};

/// Coefficient sequences share the vector representation.
pub type CoefficientSeq = Vector;

/// An ordered family `f_1, ..., f_n` in `C^d`, stored as the `d x n`
/// synthesis matrix whose `j`-th column is `f_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    synthesis: Matrix,
}

impl FrameSequence {
    pub fn new(synthesis: Matrix) -> Result<Self> {
        if synthesis.ncols() == 0 || synthesis.nrows() == 0 {
            return Err(Error::InvalidParameters(
                "a frame sequence needs dim >= 1 and at least one vector".into(),
            ));
        }
        if !all_finite(synthesis.iter()) {
            return Err(Error::InvalidParameters(
                "frame vectors must be finite".into(),
            ));
        }
        Ok(Self { synthesis })
    }

    pub fn from_vectors(vectors: &[Vector]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidParameters("empty frame sequence".into()))?;
        for v in vectors {
            if v.len() != first.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: v.len(),
                });
            }
        }
        Self::new(Matrix::from_columns(vectors))
    }

    /// The standard basis `e_1, ..., e_d`.
    pub fn standard_basis(dim: usize) -> Self {
        Self {
            synthesis: Matrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.synthesis.nrows()
    }

    pub fn count(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn synthesis_matrix(&self) -> &Matrix {
        &self.synthesis
    }

    pub fn vector(&self, j: usize) -> Vector {
        self.synthesis.column(j).into_owned()
    }

    pub fn vectors(&self) -> Vec<Vector> {
        (0..self.count()).map(|j| self.vector(j)).collect()
    }

    /// `{ U f_n }`.
    pub fn mapped(&self, u: &Operator) -> Result<Self> {
        u.check_dim(self.dim())?;
        Self::new(u.matrix() * &self.synthesis)
    }

    /// Concatenation of two families in the same space.
    pub fn appended(&self, other: &FrameSequence) -> Result<Self> {
        check(self.dim(), other.dim())?;
        let mut m = Matrix::zeros(self.dim(), self.count() + other.count());
        m.columns_mut(0, self.count()).copy_from(&self.synthesis);
        m.columns_mut(self.count(), other.count())
            .copy_from(&other.synthesis);
        Self::new(m)
    }
}

pub(crate) fn check(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `T a = sum_n a_n f_n`.
pub fn synthesis(frame: &FrameSequence, coefficients: &CoefficientSeq) -> Result<Vector> {
    check(frame.count(), coefficients.len())?;
    Ok(frame.synthesis_matrix() * coefficients)
}

/// `T* f = (<f, f_1>, ..., <f, f_n>)`.
pub fn analysis(frame: &FrameSequence, f: &Vector) -> Result<CoefficientSeq> {
    check(frame.dim(), f.len())?;
    Ok(frame.synthesis_matrix().ad_mul(f))
}

/// `S = T T*`, so that `S f = sum_n <f, f_n> f_n`.
pub fn frame_operator(frame: &FrameSequence) -> Operator {
    let t = frame.synthesis_matrix();
    Operator::from_matrix_unchecked(hermitian_part(&(t * t.adjoint())))
}

/// Outcome of the ordinary (`K = I`) frame bound computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameBounds {
    /// Optimal frame bounds `(lambda_min(S), lambda_max(S))`.
    Frame(OperatorBounds),
    /// Only the upper (Bessel) inequality holds; carries `lambda_max(S)`.
    BesselOnly { upper: f64 },
}

impl FrameBounds {
    pub fn upper(&self) -> f64 {
        match self {
            FrameBounds::Frame(b) => b.upper,
            FrameBounds::BesselOnly { upper } => *upper,
        }
    }

    pub fn is_frame(&self) -> bool {
        matches!(self, FrameBounds::Frame(_))
    }
}

pub fn frame_bounds(frame: &FrameSequence, tol: &Tolerances) -> FrameBounds {
    let (lo, hi) = hermitian_extremes(frame_operator(frame).matrix());
    let hi = hi.max(0.0);
    if lo > tol.psd_slack * hi {
        FrameBounds::Frame(OperatorBounds {
            lower: lo,
            upper: hi,
        })
    } else {
        FrameBounds::BesselOnly { upper: hi }
    }
}
