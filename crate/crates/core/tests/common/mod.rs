#![allow(dead_code)]

use kframe_core::sampling::{self, SampleRng};
use kframe_core::{FrameSequence, Matrix, Operator, Scalar, Vector};
use kframe_oracle::CMat;
use rand::Rng;

pub fn to_cmat(m: &Matrix) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn cvec(v: &Vector) -> Vec<Scalar> {
    v.iter().copied().collect()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `U diag(values) U*` with a Haar unitary `U`.
pub fn with_spectrum(rng: &mut SampleRng, values: &[f64]) -> Operator {
    let u = sampling::random_unitary(rng, values.len());
    let d = Matrix::from_diagonal(&Vector::from_iterator(
        values.len(),
        values.iter().map(|&x| Scalar::new(x, 0.0)),
    ));
    let m = &u * d * u.adjoint();
    Operator::new((&m + m.adjoint()) * Scalar::new(0.5, 0.0)).unwrap()
}

/// Positive definite with eigenvalues log-uniform in `[0.1, 10]`.
pub fn random_gl_plus(rng: &mut SampleRng, d: usize) -> Operator {
    let values: Vec<f64> = (0..d)
        .map(|_| 10f64.powf(rng.random_range(-1.0..1.0)))
        .collect();
    with_spectrum(rng, &values)
}

/// Product of `d x r` and `r x d` Gaussians with `r < d`.
pub fn random_rank_deficient(rng: &mut SampleRng, d: usize) -> (Operator, usize) {
    let r = rng.random_range(0..d);
    let m = sampling::random_matrix(rng, d, r) * sampling::random_matrix(rng, r, d);
    (Operator::new(m).unwrap(), r)
}

/// Frame of `n` vectors spanning a random `m`-dimensional subspace, with the
/// basis of that subspace (`d x m`).
pub fn frame_in_subspace(
    rng: &mut SampleRng,
    d: usize,
    m: usize,
    n: usize,
) -> (FrameSequence, Matrix) {
    let u = sampling::random_unitary(rng, d);
    let basis = u.columns(0, m).into_owned();
    let coeffs = sampling::random_matrix(rng, m, n) * Scalar::new(1.0 / (n as f64).sqrt(), 0.0);
    (FrameSequence::new(&basis * coeffs).unwrap(), basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mix {
    /// `F` a frame, `K` arbitrary.
    Frame,
    /// `F` spans a proper subspace containing `R(K)`.
    Subspace,
    /// `R(K)` leaves the span of `F`.
    Leaking,
}

/// Random `(F, K)` with a known K-frame status; `d <= 16`, `n <= 64`.
pub fn mixed_instance(rng: &mut SampleRng, mix: Mix) -> (FrameSequence, Operator) {
    let d = rng.random_range(2..=16);
    match mix {
        Mix::Frame => {
            let n = rng.random_range(2 * d..=64.max(2 * d)).min(64);
            let n = n.max(d);
            let (f, _) = frame_in_subspace(rng, d, d, n);
            let r = rng.random_range(1..=d);
            let k = sampling::random_matrix(rng, d, r) * sampling::random_matrix(rng, r, d);
            (
                f,
                Operator::new(k * Scalar::new(1.0 / d as f64, 0.0)).unwrap(),
            )
        }
        Mix::Subspace | Mix::Leaking => {
            let m = rng.random_range(1..d);
            let n = rng.random_range(2 * m..=64);
            let (f, basis) = frame_in_subspace(rng, d, m, n);
            let r = rng.random_range(1..=m);
            let k = if mix == Mix::Subspace {
                &basis * sampling::random_matrix(rng, m, r) * sampling::random_matrix(rng, r, d)
            } else {
                sampling::random_matrix(rng, d, r) * sampling::random_matrix(rng, r, d)
            };
            (
                f,
                Operator::new(k * Scalar::new(1.0 / d as f64, 0.0)).unwrap(),
            )
        }
    }
}
