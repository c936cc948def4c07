//! Seeded random vectors and operators for sampling-based verification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::opcore::{Matrix, Scalar, Vector};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Scalar {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Scalar::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = random_vector(rng, dim);
        let n = v.norm();
        if n > 1e-8 {
            return v / Scalar::new(n, 0.0);
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    let qr = random_matrix(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Scalar::new(1.0, 0.0)
        };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Unit vector drawn from the span of the orthonormal columns of `basis`.
pub fn random_unit_in_span<R: Rng + ?Sized>(rng: &mut R, basis: &Matrix) -> Vector {
    let y = random_unit_vector(rng, basis.ncols());
    let v = basis * y;
    let n = v.norm();
    v / Scalar::new(n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(7);
        for d in [1, 2, 5, 9] {
            let q = random_unitary(&mut r, d);
            assert!((q.adjoint() * &q - Matrix::identity(d, d)).norm() < 1e-13);
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = random_vector(&mut rng(3), 4);
        let b = random_vector(&mut rng(3), 4);
        assert_eq!(a, b);
    }
}
