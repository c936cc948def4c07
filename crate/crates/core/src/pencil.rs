//! Optimal constant of a semidefinite pencil inequality.
//!
//! For Hermitian PSD `form` and `gram = G G*` we want the largest `t` with
//! `form - t * gram >= 0` on all of `C^d`. Splitting `C^d = R(G) + R(G)^perp`
//! with an orthonormal basis `[Q, P]`, `gram` lives only on the `Q` block and
//! the inequality reduces to
//!
//! ```text
//! Q*form Q - (Q*form P)(P*form P)^+ (P*form Q) >= t * Q*gram Q
//! ```
//!
//! so `t` is the smallest eigenvalue of the generalized Schur complement
//! against the positive definite block `Q*gram Q`.

use crate::opcore::{hermitian_eigen, hermitian_part, reassemble, Matrix, Scalar, Vector};

pub(crate) struct PencilBound {
    pub lower: f64,
    /// Unit vector attaining the bound.
    pub witness: Vector,
}

/// `basis` is a `d x d` unitary whose first `rank` columns span `R(gram)`.
/// Returns `None` when `rank == 0`.
pub(crate) fn restricted_pencil_min(
    form: &Matrix,
    gram: &Matrix,
    basis: &Matrix,
    rank: usize,
    rank_rel: f64,
) -> Option<PencilBound> {
    if rank == 0 {
        return None;
    }
    let d = basis.ncols();
    let q = basis.columns(0, rank).into_owned();
    let p = basis.columns(rank, d - rank).into_owned();

    let a11 = q.adjoint() * form * &q;
    let (schur, coupling) = if d > rank {
        let a12 = q.adjoint() * form * &p;
        let a22 = p.adjoint() * form * &p;
        let form_scale = form.norm().max(f64::MIN_POSITIVE);
        let a22_pinv = psd_pinv(&a22, rank_rel * form_scale);
        let coupling = -(&a22_pinv * a12.adjoint());
        (hermitian_part(&(&a11 + &a12 * &coupling)), Some(coupling))
    } else {
        (hermitian_part(&a11), None)
    };

    let m = q.adjoint() * gram * &q;
    let (mv, mvec) = hermitian_eigen(&m);
    let m_inv_sqrt = reassemble(&mv, &mvec, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt());

    let z = &m_inv_sqrt * &schur * &m_inv_sqrt;
    let (zv, zvec) = hermitian_eigen(&z);
    let lower = zv[0];
    let x1 = &m_inv_sqrt * zvec.column(0);
    let mut witness = &q * &x1;
    if let (Some(c), true) = (coupling, d > rank) {
        witness += &p * (c * &x1);
    }
    let n = witness.norm();
    if n > 0.0 {
        witness /= Scalar::new(n, 0.0);
    }
    Some(PencilBound { lower, witness })
}

/// Pseudo-inverse of a Hermitian PSD matrix with an absolute eigenvalue cut-off.
fn psd_pinv(a: &Matrix, cutoff: f64) -> Matrix {
    let (values, vectors) = hermitian_eigen(a);
    reassemble(
        &values,
        &vectors,
        |x| if x > cutoff { 1.0 / x } else { 0.0 },
    )
}
