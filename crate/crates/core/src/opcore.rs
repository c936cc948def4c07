//! Dense complex operator algebra on `C^d`.
//!
//! The inner product is linear in its first argument and conjugate-linear in
//! the second: `<x, y> = sum_i x_i * conj(y_i)`. Adjoints are conjugate
//! transposes. In finite dimension every operator has closed range, so the
//! Moore-Penrose pseudo-inverse always exists.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = Complex64;
pub type Vector = DVector<Scalar>;
pub type Matrix = DMatrix<Scalar>;

/// `<x, y>`, linear in `x`.
pub fn inner(x: &Vector, y: &Vector) -> Scalar {
    y.dotc(x)
}

/// Numerical tolerances shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for equality of operators and vectors.
    pub rel_eq: f64,
    /// Slack for operator-order tests, scaled by operator norms.
    pub psd_slack: f64,
    /// Relative singular-value cut-off. `None` means `1e-12 * d`.
    pub rank_rel: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_eq: 1e-9,
            psd_slack: 1e-9,
            rank_rel: None,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rel_eq) || !ok(self.psd_slack) || !self.rank_rel.map_or(true, ok) {
            return Err(Error::InvalidParameters(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// Relative rank threshold for a matrix whose larger side is `dim`.
    pub fn rank_threshold(&self, dim: usize) -> f64 {
        self.rank_rel.unwrap_or(1e-12 * dim.max(1) as f64)
    }
}

/// Lower and upper bounds `m I <= T <= M I` with `0 < m <= M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorBounds {
    pub lower: f64,
    pub upper: f64,
}

impl OperatorBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower > 0.0 && lower <= upper) {
            return Err(Error::InvalidParameters(format!(
                "operator bounds require 0 < lower <= upper, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn condition_number(&self) -> f64 {
        self.upper / self.lower
    }
}

/// A square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(Matrix);

impl Operator {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidOperator(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidOperator(
                "operator dimension must be positive".into(),
            ));
        }
        if !all_finite(matrix.iter()) {
            return Err(Error::InvalidOperator(
                "operator has non-finite entries".into(),
            ));
        }
        Ok(Self(matrix))
    }

    pub(crate) fn from_matrix_unchecked(matrix: Matrix) -> Self {
        debug_assert!(matrix.is_square());
        Self(matrix)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Matrix::zeros(dim, dim))
    }

    /// Diagonal operator with real diagonal entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Scalar::new(x, 0.0)));
        Self(Matrix::from_diagonal(&d))
    }

    /// Operator whose `j`-th column is the image of `e_j`.
    pub fn from_columns(columns: &[Vector]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidOperator(
                "operator needs at least one column".into(),
            ));
        }
        Self::new(Matrix::from_columns(columns))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.0 * v
    }

    /// `self * other`.
    pub fn compose(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn all_finite<'a>(mut it: impl Iterator<Item = &'a Scalar>) -> bool {
    it.all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * Scalar::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

pub(crate) fn hermitian_extremes(m: &Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// `V diag(f(lambda)) V*`.
pub(crate) fn reassemble(values: &[f64], vectors: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let s = f(lambda);
        scaled.column_mut(j).scale_mut(s);
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

/// SVD with singular values in descending order: `u` is a full `rows x rows`
/// unitary, `v_t` has `min(rows, cols)` orthonormal rows.
pub(crate) struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v_t: Matrix,
}

/// Computed from the Hermitian eigenproblem of `[[0, M], [M*, 0]]`, whose
/// eigenpairs are `(+-sigma, [u; +-v] / sqrt 2)`. nalgebra's complex SVD loses
/// accuracy on rank-deficient rectangular input; its Hermitian eigensolver does not.
pub(crate) fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let n = rows + cols;
    let mut j = Matrix::zeros(n, n);
    j.view_mut((0, rows), (rows, cols)).copy_from(m);
    j.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let (values, vectors) = hermitian_eigen(&j);

    let sigma: Vec<f64> = (0..k).map(|i| values[n - 1 - i].max(0.0)).collect();
    let top = sigma.first().copied().unwrap_or(0.0);
    // below this the +sigma and -sigma eigenvectors mix and cannot be split
    let cut = f64::EPSILON * n as f64 * top;
    let sqrt2 = Scalar::new(std::f64::consts::SQRT_2, 0.0);
    let mut u_cols = Vec::new();
    let mut v_cols = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        if s <= cut {
            break;
        }
        let e = vectors.column(n - 1 - i);
        u_cols.push(e.rows(0, rows) * sqrt2);
        v_cols.push(e.rows(rows, cols) * sqrt2);
    }
    let u = complete_unitary(&u_cols, rows, rows);
    let v = complete_unitary(&v_cols, cols, k);
    Svd {
        u,
        sigma,
        v_t: v.adjoint(),
    }
}

/// `columns` (orthonormal) extended by an orthonormal basis of part of their
/// complement to `total` columns in `C^dim`.
fn complete_unitary(columns: &[Vector], dim: usize, total: usize) -> Matrix {
    let mut out = Matrix::zeros(dim, total);
    for (j, c) in columns.iter().enumerate() {
        out.set_column(j, c);
    }
    let missing = total - columns.len();
    if missing > 0 {
        let mut proj = Matrix::identity(dim, dim);
        for c in columns {
            proj -= c * c.adjoint();
        }
        // eigenvalues of the complementary projector are 0 or 1
        let (_, vecs) = hermitian_eigen(&proj);
        for j in 0..missing {
            out.set_column(columns.len() + j, &vecs.column(dim - 1 - j));
        }
    }
    out
}

/// Largest singular value of any (possibly rectangular) matrix.
pub(crate) fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    hermitian_extremes(&gram).1.max(0.0).sqrt()
}

pub(crate) fn numerical_rank(sigma: &[f64], rank_rel: f64) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sigma.iter().take_while(|&&s| s > rank_rel * max).count()
}

/// Moore-Penrose pseudo-inverse of any matrix.
pub(crate) fn pinv_matrix(m: &Matrix, tol: &Tolerances) -> Matrix {
    let (rows, cols) = m.shape();
    let dec = svd(m);
    let r = numerical_rank(&dec.sigma, tol.rank_threshold(rows.max(cols)));
    let mut out = Matrix::zeros(cols, rows);
    for k in 0..r {
        let v = dec.v_t.row(k).adjoint();
        let u = dec.u.column(k);
        out += v * u.adjoint() * Scalar::new(1.0 / dec.sigma[k], 0.0);
    }
    out
}

/// Orthonormal basis of the column space of any matrix.
pub(crate) fn range_basis_matrix(m: &Matrix, tol: &Tolerances) -> Matrix {
    let (rows, cols) = m.shape();
    let dec = svd(m);
    let r = numerical_rank(&dec.sigma, tol.rank_threshold(rows.max(cols)));
    dec.u.columns(0, r).into_owned()
}

fn hermitian_deviation(t: &Operator) -> f64 {
    (t.matrix() - t.matrix().adjoint()).norm()
}

pub fn is_hermitian(t: &Operator, tol: &Tolerances) -> bool {
    hermitian_deviation(t) <= tol.rel_eq * t.frobenius_norm().max(1.0)
}

fn require_hermitian(t: &Operator, tol: &Tolerances) -> Result<()> {
    if is_hermitian(t, tol) {
        Ok(())
    } else {
        Err(Error::NotHermitian {
            deviation: hermitian_deviation(t),
        })
    }
}

/// Certifies `T` in GL+ and returns its optimal bounds `(lambda_min, lambda_max)`.
pub fn gl_plus_check(t: &Operator, tol: &Tolerances) -> Result<OperatorBounds> {
    require_hermitian(t, tol)?;
    let (lo, hi) = hermitian_extremes(t.matrix());
    let scale = lo.abs().max(hi.abs());
    if !(lo > tol.psd_slack * scale) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(OperatorBounds {
        lower: lo,
        upper: hi,
    })
}

/// Hermitian positive semidefinite square root.
///
/// Eigenvalues in `[-psd_slack * ||T||, 0]` are clamped to zero; anything more
/// negative is reported as indefiniteness.
pub fn operator_sqrt(t: &Operator, tol: &Tolerances) -> Result<Operator> {
    require_hermitian(t, tol)?;
    let (values, vectors) = hermitian_eigen(t.matrix());
    let norm = values.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    let min = values.first().copied().unwrap_or(0.0);
    if min < -tol.psd_slack * norm {
        return Err(Error::IndefiniteOperator {
            min_eigenvalue: min,
        });
    }
    Ok(Operator::from_matrix_unchecked(reassemble(
        &values,
        &vectors,
        |x| x.max(0.0).sqrt(),
    )))
}

/// `T^{-1/2}` for `T` in GL+.
pub(crate) fn inverse_sqrt(t: &Operator, tol: &Tolerances) -> Result<Operator> {
    gl_plus_check(t, tol)?;
    let (values, vectors) = hermitian_eigen(t.matrix());
    Ok(Operator::from_matrix_unchecked(reassemble(
        &values,
        &vectors,
        |x| 1.0 / x.sqrt(),
    )))
}

/// Inverse of `T` in GL+ through its spectral decomposition.
pub(crate) fn positive_inverse(t: &Operator, tol: &Tolerances) -> Result<Operator> {
    gl_plus_check(t, tol)?;
    let (values, vectors) = hermitian_eigen(t.matrix());
    Ok(Operator::from_matrix_unchecked(reassemble(
        &values,
        &vectors,
        |x| 1.0 / x,
    )))
}

/// Moore-Penrose pseudo-inverse via SVD; singular values at or below
/// `rank_rel * sigma_max` are treated as zero.
pub fn pseudo_inverse(u: &Operator, tol: &Tolerances) -> Operator {
    Operator::from_matrix_unchecked(pinv_matrix(u.matrix(), tol))
}

/// `T1 <= T2` in the operator order, up to `psd_slack * max(1, ||T1||, ||T2||)`.
pub fn op_leq(t1: &Operator, t2: &Operator, tol: &Tolerances) -> Result<bool> {
    t2.check_dim(t1.dim())?;
    require_hermitian(t1, tol)?;
    require_hermitian(t2, tol)?;
    let (lo, _) = hermitian_extremes(&(t2.matrix() - t1.matrix()));
    let scale = 1f64.max(operator_norm(t1)).max(operator_norm(t2));
    Ok(lo >= -tol.psd_slack * scale)
}

/// Bounds of `T^{-1}` from bounds of `T`.
pub fn inverse_bounds(b: OperatorBounds) -> OperatorBounds {
    OperatorBounds {
        lower: 1.0 / b.upper,
        upper: 1.0 / b.lower,
    }
}

/// Largest singular value.
pub fn operator_norm(t: &Operator) -> f64 {
    spectral_norm(t.matrix())
}

/// Orthonormal basis (`d x r`) of the range of `U`, `r` its numerical rank.
pub fn range_basis(u: &Operator, tol: &Tolerances) -> Matrix {
    range_basis_matrix(u.matrix(), tol)
}
