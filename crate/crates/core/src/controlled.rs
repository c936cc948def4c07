//! C-controlled K-frames.
//!
//! The middle term of the controlled inequality is read as the quadratic form
//! `<L_C f, f> = <C S f, f>` of the controlled operator `L_C = C S`. It is real
//! for every `f` exactly when `C S` is Hermitian, which is enforced as a
//! precondition (`NonRealForm` otherwise).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{frame_operator, FrameSequence};
use crate::kframes::{split_range, KFrameReport};
use crate::opcore::{
    gl_plus_check, hermitian_extremes, inner, inverse_sqrt, op_leq, operator_norm, operator_sqrt,
    positive_inverse, Operator, OperatorBounds, Tolerances, Vector,
};
use crate::pencil::restricted_pencil_min;

/// A validated controller `C` in GL+ with cached roots and inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Controller {
    c: Operator,
    c_sqrt: Operator,
    c_inv: Operator,
    c_inv_sqrt: Operator,
    bounds: OperatorBounds,
}

impl Controller {
    pub fn operator(&self) -> &Operator {
        &self.c
    }

    pub fn sqrt(&self) -> &Operator {
        &self.c_sqrt
    }

    pub fn inverse(&self) -> &Operator {
        &self.c_inv
    }

    pub fn inverse_sqrt(&self) -> &Operator {
        &self.c_inv_sqrt
    }

    pub fn bounds(&self) -> OperatorBounds {
        self.bounds
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    /// `||C||`, the optimal upper bound.
    pub fn norm(&self) -> f64 {
        self.bounds.upper
    }
}

pub fn make_controller(c: &Operator, tol: &Tolerances) -> Result<Controller> {
    let bounds = gl_plus_check(c, tol)?;
    Ok(Controller {
        c: c.clone(),
        c_sqrt: operator_sqrt(c, tol)?,
        c_inv: positive_inverse(c, tol)?,
        c_inv_sqrt: inverse_sqrt(c, tol)?,
        bounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlledReport {
    pub commutes_with_k: bool,
    pub form_is_real: bool,
    pub is_controlled_kframe: bool,
    /// Optimal `A` with `A ||C^{1/2} K* f||^2 <= <CSf, f>`; `0.0` when `vacuous`.
    pub lower_opt: f64,
    /// Optimal `B = lambda_max(CS)`.
    pub upper_opt: f64,
    pub rank_k: usize,
    pub vacuous: bool,
}

fn commutator_defect(a: &Operator, b: &Operator) -> f64 {
    (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm()
}

/// `CK = KC` up to `rel_eq * ||C||_F * ||K||_F`.
pub fn commutes(ctrl: &Controller, k: &Operator, tol: &Tolerances) -> Result<bool> {
    k.check_dim(ctrl.dim())?;
    let defect = commutator_defect(&ctrl.c, k);
    Ok(defect <= tol.rel_eq * ctrl.c.frobenius_norm() * k.frobenius_norm())
}

fn require_commutes(ctrl: &Controller, k: &Operator, tol: &Tolerances) -> Result<()> {
    if commutes(ctrl, k, tol)? {
        Ok(())
    } else {
        let scale = (ctrl.c.frobenius_norm() * k.frobenius_norm()).max(f64::MIN_POSITIVE);
        Err(Error::CommutationFailure {
            defect: commutator_defect(&ctrl.c, k) / scale,
        })
    }
}

/// `L_C = C S`, so that `L_C f = sum_n <f, f_n> C f_n`.
pub fn controlled_operator(frame: &FrameSequence, ctrl: &Controller) -> Result<Operator> {
    ctrl.c.check_dim(frame.dim())?;
    Ok(ctrl.c.compose(&frame_operator(frame)))
}

/// Deviation of `CS` from self-adjointness relative to `||C|| ||S||`.
fn realness_defect(cs: &Operator, ctrl: &Controller, s: &Operator) -> (f64, f64) {
    let dev = (cs.matrix() - cs.matrix().adjoint()).norm();
    let scale = ctrl.c.frobenius_norm() * s.frobenius_norm();
    (dev, scale)
}

fn require_real_form(
    cs: &Operator,
    ctrl: &Controller,
    s: &Operator,
    tol: &Tolerances,
) -> Result<()> {
    let (dev, scale) = realness_defect(cs, ctrl, s);
    if dev <= tol.rel_eq * scale {
        Ok(())
    } else {
        Err(Error::NonRealForm {
            imaginary: dev / scale.max(f64::MIN_POSITIVE),
        })
    }
}

/// `<C S f, f>`, which must be real.
pub fn controlled_form(frame: &FrameSequence, ctrl: &Controller, f: &Vector) -> Result<f64> {
    ctrl.c.check_dim(frame.dim())?;
    crate::frames::check(frame.dim(), f.len())?;
    let s = frame_operator(frame);
    let value = inner(&ctrl.c.apply(&s.apply(f)), f);
    let scale = operator_norm(&ctrl.c) * operator_norm(&s) * f.norm_squared();
    if value.im.abs() > 1e-9 * scale {
        return Err(Error::NonRealForm {
            imaginary: value.im,
        });
    }
    Ok(value.re)
}

pub fn controlled_kframe_check(
    frame: &FrameSequence,
    k: &Operator,
    ctrl: &Controller,
    tol: &Tolerances,
) -> Result<ControlledReport> {
    k.check_dim(frame.dim())?;
    ctrl.c.check_dim(frame.dim())?;
    require_commutes(ctrl, k, tol)?;
    let s = frame_operator(frame);
    let cs = ctrl.c.compose(&s);
    require_real_form(&cs, ctrl, &s, tol)?;

    let (_, upper) = hermitian_extremes(cs.matrix());
    let upper = upper.max(0.0);
    // ||C^{1/2} K* f||^2 = <K C K* f, f>
    let kck = k.compose(&ctrl.c).compose(&k.adjoint());
    let split = split_range(k, tol);
    let base = ControlledReport {
        commutes_with_k: true,
        form_is_real: true,
        is_controlled_kframe: true,
        lower_opt: 0.0,
        upper_opt: upper,
        rank_k: split.rank,
        vacuous: true,
    };
    match restricted_pencil_min(
        cs.matrix(),
        kck.matrix(),
        &split.basis,
        split.rank,
        tol.rank_threshold(k.dim()),
    ) {
        None => Ok(base),
        Some(p) => {
            let kck_norm = operator_norm(&kck).sqrt();
            let holds = KFrameReport::verdict(p.lower, upper, kck_norm, tol);
            Ok(ControlledReport {
                is_controlled_kframe: holds,
                lower_opt: if holds { p.lower } else { 0.0 },
                vacuous: false,
                ..base
            })
        }
    }
}

fn require_hermitian_pair(a: &Operator, b: &Operator, tol: &Tolerances) -> Result<()> {
    for t in [a, b] {
        if !crate::opcore::is_hermitian(t, tol) {
            return Err(Error::NonHermitianComparison {
                deviation: (t.matrix() - t.matrix().adjoint()).norm(),
            });
        }
    }
    Ok(())
}

/// `CS >= A C K K*`.
pub fn controlled_operator_inequality(
    frame: &FrameSequence,
    k: &Operator,
    ctrl: &Controller,
    a: f64,
    tol: &Tolerances,
) -> Result<bool> {
    k.check_dim(frame.dim())?;
    ctrl.c.check_dim(frame.dim())?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "A must be positive, got {a}"
        )));
    }
    let cs = ctrl.c.compose(&frame_operator(frame));
    let ckk = ctrl.c.compose(k).compose(&k.adjoint()).scaled(a);
    require_hermitian_pair(&cs, &ckk, tol)?;
    op_leq(&ckk, &cs, tol)
}

/// `A K C K* <= L_C <= B I`.
pub fn sandwich_inequality_check(
    frame: &FrameSequence,
    k: &Operator,
    ctrl: &Controller,
    a: f64,
    b: f64,
    tol: &Tolerances,
) -> Result<bool> {
    k.check_dim(frame.dim())?;
    ctrl.c.check_dim(frame.dim())?;
    let cs = ctrl.c.compose(&frame_operator(frame));
    let kck = k.compose(&ctrl.c).compose(&k.adjoint()).scaled(a);
    require_hermitian_pair(&cs, &kck, tol)?;
    let upper = Operator::identity(frame.dim()).scaled(b);
    Ok(op_leq(&kck, &cs, tol)? && op_leq(&cs, &upper, tol)?)
}

/// Controlled bounds `(A, B)` to K-frame bounds
/// `(A ||C^{1/2}||^-2 min(1, lambda_min(C)), B ||C^{-1/2}||^2)`.
///
/// The lower constant `A ||C^{1/2}||^-2` alone is only valid when
/// `lambda_min(C) >= 1`; in general `CS >= A KCK*` gives
/// `S >= A lambda_min(C) / ||C|| KK*`, so the factor is capped there.
pub fn bounds_to_kframe(a: f64, b: f64, ctrl: &Controller) -> (f64, f64) {
    let root = operator_norm(&ctrl.c_sqrt);
    let inv_root = operator_norm(&ctrl.c_inv_sqrt);
    let lambda_min = 1.0 / (inv_root * inv_root);
    (
        a / (root * root) * lambda_min.min(1.0),
        b * inv_root * inv_root,
    )
}

/// K-frame bounds `(A', B')` to controlled bounds `(A', B' ||C||)`.
pub fn bounds_to_controlled(
    a_prime: f64,
    b_prime: f64,
    ctrl: &Controller,
    k: &Operator,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    require_commutes(ctrl, k, tol)?;
    Ok((a_prime, b_prime * operator_norm(&ctrl.c)))
}

/// `sum <f_n, f> C f_n = sum <C f_n, f> f_n`, realized as `CS = SC`.
pub fn interchange_identity_check(
    frame: &FrameSequence,
    ctrl: &Controller,
    tol: &Tolerances,
) -> Result<bool> {
    ctrl.c.check_dim(frame.dim())?;
    let s = frame_operator(frame);
    let cs = ctrl.c.compose(&s);
    require_real_form(&cs, ctrl, &s, tol)?;
    let sc = s.compose(&ctrl.c);
    let bound = tol.rel_eq * ctrl.c.frobenius_norm() * s.frobenius_norm();
    Ok((cs.matrix() - sc.matrix()).norm() <= bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kframes::{counterexample_k, kframe_check, kframe_operator_inequality};
    use crate::opcore::{Matrix, Scalar};
    use approx::assert_relative_eq;

    fn c3_frame() -> FrameSequence {
        FrameSequence::standard_basis(3)
            .mapped(&counterexample_k())
            .unwrap()
    }

    #[test]
    fn controller_validation() {
        let tol = Tolerances::default();
        let id = make_controller(&Operator::identity(3), &tol).unwrap();
        assert_eq!((id.bounds().lower, id.bounds().upper), (1.0, 1.0));
        let d = make_controller(&Operator::from_real_diagonal(&[1.0, 2.0, 3.0]), &tol).unwrap();
        assert_relative_eq!(d.bounds().lower, 1.0, epsilon = 1e-14);
        assert_relative_eq!(d.bounds().upper, 3.0, epsilon = 1e-14);
        assert!((d.sqrt().matrix() * d.sqrt().matrix() - d.operator().matrix()).norm() < 1e-13);
        assert!(
            (d.operator().matrix() * d.inverse().matrix() - Matrix::identity(3, 3)).norm() < 1e-13
        );
        assert!(matches!(
            make_controller(&Operator::from_real_diagonal(&[1.0, -1.0]), &tol),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn commutation_examples() {
        let tol = Tolerances::default();
        let scalar = make_controller(&Operator::identity(2).scaled(3.0), &tol).unwrap();
        let nil = Operator::new(Matrix::from_row_slice(
            2,
            2,
            &[
                Scalar::new(0.0, 0.0),
                Scalar::new(1.0, 0.0),
                Scalar::new(0.0, 0.0),
                Scalar::new(0.0, 0.0),
            ],
        ))
        .unwrap();
        assert!(commutes(&scalar, &nil, &tol).unwrap());
        let diag = make_controller(&Operator::from_real_diagonal(&[1.0, 2.0]), &tol).unwrap();
        assert!(!commutes(&diag, &nil, &tol).unwrap());
        let f = FrameSequence::standard_basis(2);
        assert!(matches!(
            controlled_kframe_check(&f, &nil, &diag, &tol),
            Err(Error::CommutationFailure { .. })
        ));
    }

    #[test]
    fn controlled_operator_examples() {
        let tol = Tolerances::default();
        let f = c3_frame();
        let id = make_controller(&Operator::identity(3), &tol).unwrap();
        assert_eq!(controlled_operator(&f, &id).unwrap(), frame_operator(&f));
        let two = make_controller(&Operator::identity(3).scaled(2.0), &tol).unwrap();
        let l = controlled_operator(&FrameSequence::standard_basis(3), &two).unwrap();
        assert!((l.matrix() - Matrix::identity(3, 3) * Scalar::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn controlled_form_examples() {
        let tol = Tolerances::default();
        let two = make_controller(&Operator::identity(2).scaled(2.0), &tol).unwrap();
        let mut x = Vector::zeros(2);
        x[0] = Scalar::new(0.6, 0.0);
        x[1] = Scalar::new(0.0, 0.8);
        let v = controlled_form(&FrameSequence::standard_basis(2), &two, &x).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);

        // C not commuting with S
        let f = FrameSequence::from_vectors(&[
            Vector::from_vec(vec![Scalar::new(1.0, 0.0), Scalar::new(1.0, 0.0)]),
            Vector::from_vec(vec![Scalar::new(0.0, 0.0), Scalar::new(1.0, 0.0)]),
        ])
        .unwrap();
        let c = make_controller(&Operator::from_real_diagonal(&[1.0, 5.0]), &tol).unwrap();
        let y = Vector::from_vec(vec![Scalar::new(1.0, 0.0), Scalar::new(0.0, 1.0)]);
        assert!(matches!(
            controlled_form(&f, &c, &y),
            Err(Error::NonRealForm { .. })
        ));
        assert!(matches!(
            interchange_identity_check(&f, &c, &tol),
            Err(Error::NonRealForm { .. })
        ));
    }

    #[test]
    fn identity_controller_reduces_to_kframe() {
        let tol = Tolerances::default();
        let f = c3_frame();
        let k = counterexample_k();
        let id = make_controller(&Operator::identity(3), &tol).unwrap();
        let r = controlled_kframe_check(&f, &k, &id, &tol).unwrap();
        let plain = kframe_check(&f, &k, &tol).unwrap();
        assert_eq!(r.is_controlled_kframe, plain.is_kframe);
        assert_relative_eq!(r.lower_opt, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.upper_opt, 2.0, epsilon = 1e-12);
        assert!(controlled_operator_inequality(&f, &k, &id, 1.0, &tol).unwrap());
        assert!(!controlled_operator_inequality(&f, &k, &id, 1.01, &tol).unwrap());
    }

    #[test]
    fn sandwich_and_transfers_scalar_cases() {
        let tol = Tolerances::default();
        let onb = FrameSequence::standard_basis(2);
        let id = make_controller(&Operator::identity(2), &tol).unwrap();
        let k = Operator::identity(2);
        assert!(sandwich_inequality_check(&onb, &k, &id, 1.0, 1.0, &tol).unwrap());
        assert!(!sandwich_inequality_check(&onb, &k, &id, 1.0, 0.5, &tol).unwrap());

        assert_eq!(bounds_to_kframe(2.0, 5.0, &id), (2.0, 5.0));
        let four = make_controller(&Operator::identity(2).scaled(4.0), &tol).unwrap();
        let (a, b) = bounds_to_kframe(2.0, 5.0, &four);
        assert_relative_eq!(a, 0.5, epsilon = 1e-14);
        assert_relative_eq!(b, 1.25, epsilon = 1e-14);

        // lambda_min(C) < 1: A / ||C|| = 2 would overshoot S = I >= 1 KK*
        let half = make_controller(&Operator::identity(1).scaled(0.5), &tol).unwrap();
        let e = FrameSequence::standard_basis(1);
        let k1 = Operator::identity(1);
        let r = controlled_kframe_check(&e, &k1, &half, &tol).unwrap();
        let (a, _) = bounds_to_kframe(r.lower_opt, r.upper_opt, &half);
        assert_relative_eq!(a, 1.0, epsilon = 1e-14);
        assert!(kframe_operator_inequality(&e, &k1, a, &tol).unwrap());

        assert_eq!(
            bounds_to_controlled(2.0, 5.0, &id, &k, &tol).unwrap(),
            (2.0, 5.0)
        );
        let three = make_controller(&Operator::identity(2).scaled(3.0), &tol).unwrap();
        let (a, b) = bounds_to_controlled(2.0, 5.0, &three, &k, &tol).unwrap();
        assert_eq!(a, 2.0);
        assert_relative_eq!(b, 15.0, epsilon = 1e-13);
    }

    #[test]
    fn scalar_controller_always_interchanges() {
        let tol = Tolerances::default();
        let c = make_controller(&Operator::identity(3).scaled(0.7), &tol).unwrap();
        assert!(interchange_identity_check(&c3_frame(), &c, &tol).unwrap());
    }
}
