//! K-frames: verification with optimal bounds, atomic systems, Bessel duals,
//! the interchange dual on `R(K)`, and K-frame constructions.
//!
//! `{f_n}` is a K-frame when `A ||K* f||^2 <= sum |<f, f_n>|^2 <= B ||f||^2`
//! for all `f`, which is the operator inequality `A K K* <= S <= B I`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{check, frame_operator, FrameSequence};
use crate::opcore::{
    hermitian_extremes, inner, numerical_rank, op_leq, operator_norm, pinv_matrix, spectral_norm,
    svd, Matrix, Operator, Scalar, Tolerances, Vector,
};
use crate::pencil::restricted_pencil_min;
use crate::sampling;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFrameReport {
    /// Always true for a finite family in finite dimension.
    pub is_bessel: bool,
    pub is_kframe: bool,
    /// Optimal lower constant; `0.0` when `vacuous`.
    pub lower_opt: f64,
    /// Optimal upper constant `lambda_max(S)`.
    pub upper_opt: f64,
    pub rank_k: usize,
    /// `K = 0`: the lower inequality holds for every constant.
    pub vacuous: bool,
    /// Unit vector minimizing `<Sf, f> / ||K* f||^2`.
    #[serde(with = "crate::json::vector_serde")]
    pub worst_rayleigh_witness: Vector,
}

impl KFrameReport {
    /// Scale used to decide positivity of `lower_opt`.
    pub(crate) fn verdict(lower: f64, upper: f64, k_norm: f64, tol: &Tolerances) -> bool {
        lower > tol.psd_slack * upper / (k_norm * k_norm)
    }
}

pub(crate) struct KSplit {
    pub basis: Matrix,
    pub rank: usize,
    pub sigma: Vec<f64>,
}

/// Unitary basis whose leading `rank` columns span `R(K)`.
pub(crate) fn split_range(k: &Operator, tol: &Tolerances) -> KSplit {
    let dec = svd(k.matrix());
    let rank = numerical_rank(&dec.sigma, tol.rank_threshold(k.dim()));
    KSplit {
        basis: dec.u,
        rank,
        sigma: dec.sigma,
    }
}

pub fn kframe_check(frame: &FrameSequence, k: &Operator, tol: &Tolerances) -> Result<KFrameReport> {
    k.check_dim(frame.dim())?;
    let s = frame_operator(frame);
    let (_, upper) = hermitian_extremes(s.matrix());
    let upper = upper.max(0.0);
    let split = split_range(k, tol);
    let kk = k.matrix() * k.matrix().adjoint();
    match restricted_pencil_min(
        s.matrix(),
        &kk,
        &split.basis,
        split.rank,
        tol.rank_threshold(k.dim()),
    ) {
        None => Ok(KFrameReport {
            is_bessel: true,
            is_kframe: true,
            lower_opt: 0.0,
            upper_opt: upper,
            rank_k: 0,
            vacuous: true,
            worst_rayleigh_witness: Vector::zeros(k.dim()),
        }),
        Some(p) => {
            let is_kframe = KFrameReport::verdict(p.lower, upper, split.sigma[0], tol);
            // below the resolution floor the pencil value is rounding noise
            let lower = if is_kframe { p.lower } else { 0.0 };
            Ok(KFrameReport {
                is_bessel: true,
                is_kframe,
                lower_opt: lower,
                upper_opt: upper,
                rank_k: split.rank,
                vacuous: false,
                worst_rayleigh_witness: p.witness,
            })
        }
    }
}

/// Smallest sampled `<Sf, f> / ||K* f||^2` over random `f` with `K* f != 0`.
/// Returns `None` when no sample had `K* f != 0`.
pub fn rayleigh_sample_min(
    frame: &FrameSequence,
    k: &Operator,
    samples: usize,
    seed: u64,
) -> Result<Option<f64>> {
    k.check_dim(frame.dim())?;
    let s = frame_operator(frame);
    let kstar = k.adjoint();
    let knorm = operator_norm(k);
    let mut rng = sampling::rng(seed);
    let mut best: Option<f64> = None;
    for _ in 0..samples {
        let f = sampling::random_unit_vector(&mut rng, frame.dim());
        let kf = kstar.apply(&f).norm_squared();
        if kf <= 1e-24 * knorm * knorm {
            continue;
        }
        let ratio = inner(&s.apply(&f), &f).re / kf;
        best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
    }
    Ok(best)
}

/// `S >= A K K*`.
pub fn kframe_operator_inequality(
    frame: &FrameSequence,
    k: &Operator,
    a: f64,
    tol: &Tolerances,
) -> Result<bool> {
    k.check_dim(frame.dim())?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "A must be positive, got {a}"
        )));
    }
    let kk = k.compose(&k.adjoint()).scaled(a);
    op_leq(&kk, &frame_operator(frame), tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicReport {
    /// `||T^+ K||`, the smallest constant for the minimal-norm coefficients.
    pub constant: f64,
    /// Hilbert-Schmidt norm of the coefficient map `T^+ K`.
    pub coefficient_map_norm: f64,
    /// Bessel bound of the family.
    pub bessel_bound: f64,
}

/// Minimal-norm coefficient map `x -> T^+ K x` (an `n x d` matrix).
pub fn atomic_coefficient_map(frame: &FrameSequence, k: &Operator, tol: &Tolerances) -> Matrix {
    pinv_matrix(frame.synthesis_matrix(), tol) * k.matrix()
}

pub fn atomic_system_constant(
    frame: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
) -> Result<AtomicReport> {
    k.check_dim(frame.dim())?;
    let t = frame.synthesis_matrix();
    let map = atomic_coefficient_map(frame, k, tol);
    let defect = t * &map - k.matrix();
    let dec = svd(&defect);
    let residual = dec.sigma.first().copied().unwrap_or(0.0);
    if residual > tol.rel_eq * operator_norm(k).max(1.0) {
        return Err(Error::RangeDeficiency {
            residual,
            witness: dec.v_t.row(0).adjoint(),
        });
    }
    let (_, upper) = hermitian_extremes(frame_operator(frame).matrix());
    Ok(AtomicReport {
        constant: spectral_norm(&map),
        coefficient_map_norm: map.norm(),
        bessel_bound: upper.max(0.0),
    })
}

fn require_same_shape(f: &FrameSequence, g: &FrameSequence, k: &Operator) -> Result<()> {
    check(f.dim(), g.dim())?;
    check(f.count(), g.count())?;
    k.check_dim(f.dim())
}

fn dual_defect(f: &FrameSequence, g: &FrameSequence, k: &Operator) -> Matrix {
    k.matrix() - f.synthesis_matrix() * g.synthesis_matrix().adjoint()
}

/// `K f = sum_n <f, g_n> f_n` for all `f`, i.e. `K = F G*`.
pub fn bessel_dual_check(
    f: &FrameSequence,
    g: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
) -> Result<bool> {
    require_same_shape(f, g, k)?;
    Ok(dual_defect(f, g, k).norm() <= tol.rel_eq * k.frobenius_norm().max(1.0))
}

/// The family `f_n = K S_G^+ g_n`, which satisfies `F G* = K` whenever `G` is a
/// frame. For a Parseval `G` this is `{K g_n}`.
pub fn associated_frame(
    g: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
) -> Result<FrameSequence> {
    k.check_dim(g.dim())?;
    let sg_pinv = pinv_matrix(frame_operator(g).matrix(), tol);
    FrameSequence::new(k.matrix() * sg_pinv * g.synthesis_matrix())
}

/// `h_n = (K^+)* g_n`; on `R(K)` both `sum <f, h_n> f_n` and
/// `sum <f, f_n> h_n` reproduce `f`.
pub fn interchange_dual(
    f: &FrameSequence,
    g: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
) -> Result<FrameSequence> {
    require_same_shape(f, g, k)?;
    let defect = dual_defect(f, g, k);
    if defect.norm() > tol.rel_eq * k.frobenius_norm().max(1.0) {
        let dec = svd(&defect);
        return Err(Error::PreconditionFailed {
            reason: format!("K f = sum <f, g_n> f_n fails (defect {:.3e})", dec.sigma[0]),
            witness: Some(dec.v_t.row(0).adjoint()),
        });
    }
    let k_pinv = pinv_matrix(k.matrix(), tol);
    FrameSequence::new(k_pinv.adjoint() * g.synthesis_matrix())
}

/// `{K f_n}` for an ordinary frame `{f_n}`.
pub fn construct_from_frame(
    source: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
) -> Result<FrameSequence> {
    k.check_dim(source.dim())?;
    if !crate::frames::frame_bounds(source, tol).is_frame() {
        return Err(Error::PreconditionFailed {
            reason: "source family is not a frame".into(),
            witness: None,
        });
    }
    source.mapped(k)
}

/// `{K e_n}` for an orthonormal basis `{e_n}`.
pub fn construct_from_orthonormal(
    basis: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
) -> Result<FrameSequence> {
    k.check_dim(basis.dim())?;
    check(basis.dim(), basis.count())?;
    let e = basis.synthesis_matrix();
    let deviation = (e.adjoint() * e - Matrix::identity(e.ncols(), e.ncols())).norm();
    if deviation > tol.rel_eq * (basis.count() as f64).sqrt().max(1.0) {
        return Err(Error::NotOrthonormal { deviation });
    }
    basis.mapped(k)
}

/// `{T f_n}`, a `TK`-frame whenever `{f_n}` is a K-frame.
pub fn construct_image(source: &FrameSequence, t: &Operator) -> Result<FrameSequence> {
    source.mapped(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedReport {
    pub holds: bool,
    pub samples: usize,
    /// `||K^+||`.
    pub k_pinv_norm: f64,
    /// Largest violation of any inequality, relative to its scale. Non-positive when all hold.
    pub worst_violation: f64,
}

/// Samples the norm inequalities of `S` restricted to `R(K)` and of its
/// inverse on `S(R(K))`, using the optimal K-frame bounds.
pub fn restricted_operator_inequalities(
    frame: &FrameSequence,
    k: &Operator,
    tol: &Tolerances,
    samples: usize,
    seed: u64,
) -> Result<RestrictedReport> {
    let report = kframe_check(frame, k, tol)?;
    if !report.is_kframe || report.vacuous {
        return Err(Error::PreconditionFailed {
            reason: "family is not a K-frame with nontrivial K".into(),
            witness: Some(report.worst_rayleigh_witness),
        });
    }
    let (a, b) = (report.lower_opt, report.upper_opt);
    let split = split_range(k, tol);
    let q = split.basis.columns(0, split.rank).into_owned();
    let k_pinv_norm = 1.0 / split.sigma[split.rank - 1];
    let kp2 = k_pinv_norm * k_pinv_norm;
    let s = frame_operator(frame);
    let kstar = k.adjoint();
    // inverse of S: R(K) -> S(R(K))
    let sq = s.matrix() * &q;
    let sq_pinv = pinv_matrix(&sq, tol);
    let eps = 1e-9;

    let mut rng = sampling::rng(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut record = |lhs: f64, rhs: f64, scale: f64| {
        worst = worst.max((lhs - rhs) / scale.max(f64::MIN_POSITIVE));
    };
    for _ in 0..samples {
        let f = sampling::random_unit_in_span(&mut rng, &q);
        let sf = s.apply(&f);
        let sf_norm = sf.norm();
        // A ||K^+||^-2 ||f|| <= ||Sf|| <= B ||f||
        record(a / kp2, sf_norm, b);
        record(sf_norm, b, b);
        // ||K* f||^2 >= ||K^+||^-2 ||f||^2
        record(1.0 / kp2, kstar.apply(&f).norm_squared(), 1.0 / kp2);
        // B^-1 ||g|| <= ||S^-1 g|| <= A^-1 ||K^+||^2 ||g|| on g in S(R(K))
        let g = sf;
        let g_norm = g.norm();
        let back = &q * (&sq_pinv * &g);
        let back_norm = back.norm();
        let upper = kp2 / a * g_norm;
        record(g_norm / b, back_norm, upper);
        record(back_norm, upper, upper);
    }
    Ok(RestrictedReport {
        holds: worst <= eps,
        samples,
        k_pinv_norm,
        worst_violation: worst,
    })
}

/// `K` with `K e_1 = e_1, K e_2 = e_1, K e_3 = e_2` on `C^3`.
pub fn counterexample_k() -> Operator {
    let e = |i: usize| {
        let mut v = Vector::zeros(3);
        v[i] = Scalar::new(1.0, 0.0);
        v
    };
    Operator::from_columns(&[e(0), e(0), e(1)]).expect("fixed 3x3 operator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e(dim: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(dim);
        v[i] = Scalar::new(1.0, 0.0);
        v
    }

    fn c3() -> (FrameSequence, FrameSequence, Operator) {
        let k = counterexample_k();
        let g = FrameSequence::standard_basis(3);
        let f = g.mapped(&k).unwrap();
        (f, g, k)
    }

    #[test]
    fn orthonormal_basis_is_identity_frame() {
        let tol = Tolerances::default();
        let r = kframe_check(
            &FrameSequence::standard_basis(3),
            &Operator::identity(3),
            &tol,
        )
        .unwrap();
        assert!(r.is_kframe);
        assert_relative_eq!(r.lower_opt, 1.0, epsilon = 1e-13);
        assert_relative_eq!(r.upper_opt, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn counterexample_bounds() {
        let tol = Tolerances::default();
        let (f, _, k) = c3();
        assert_eq!(f.vectors(), vec![e(3, 0), e(3, 0), e(3, 1)]);
        let r = kframe_check(&f, &k, &tol).unwrap();
        assert!(r.is_kframe);
        assert_eq!(r.rank_k, 2);
        assert_relative_eq!(r.lower_opt, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.upper_opt, 2.0, epsilon = 1e-12);
        assert!(kframe_operator_inequality(&f, &k, 1.0, &tol).unwrap());
        assert!(!kframe_operator_inequality(&f, &k, 1.01, &tol).unwrap());
    }

    #[test]
    fn deficient_family_is_not_identity_frame() {
        let tol = Tolerances::default();
        let f = FrameSequence::from_vectors(&[e(2, 0)]).unwrap();
        let r = kframe_check(&f, &Operator::identity(2), &tol).unwrap();
        assert!(!r.is_kframe);
        assert!(r.lower_opt.abs() < 1e-15);
        // the minimizer lives on span{e2}
        assert_relative_eq!(r.worst_rayleigh_witness[1].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_k_is_vacuous() {
        let r = kframe_check(
            &FrameSequence::standard_basis(2),
            &Operator::zeros(2),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(r.vacuous && r.is_kframe);
        assert_eq!(r.rank_k, 0);
    }

    #[test]
    fn dimension_mismatch() {
        let tol = Tolerances::default();
        let f = FrameSequence::standard_basis(2);
        assert!(matches!(
            kframe_check(&f, &Operator::identity(3), &tol),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(kframe_operator_inequality(&f, &Operator::identity(2), 0.0, &tol).is_err());
    }

    #[test]
    fn dual_is_one_sided() {
        let tol = Tolerances::default();
        let (f, g, k) = c3();
        assert!(bessel_dual_check(&f, &g, &k, &tol).unwrap());
        assert!(!bessel_dual_check(&g, &f, &k, &tol).unwrap());
        // K e3 = e2 but sum <e3, f_n> g_n = 0
        let swapped = g.synthesis_matrix() * f.synthesis_matrix().adjoint() * e(3, 2);
        assert_eq!(swapped.norm(), 0.0);
        assert_eq!(k.apply(&e(3, 2)), e(3, 1));
        let onb = FrameSequence::standard_basis(3);
        assert!(bessel_dual_check(&onb, &onb, &Operator::identity(3), &tol).unwrap());
    }

    #[test]
    fn atomic_examples() {
        let tol = Tolerances::default();
        let r = atomic_system_constant(
            &FrameSequence::standard_basis(3),
            &Operator::identity(3),
            &tol,
        )
        .unwrap();
        assert_relative_eq!(r.constant, 1.0, epsilon = 1e-13);

        let (f, _, k) = c3();
        let r = atomic_system_constant(&f, &k, &tol).unwrap();
        // T^+ = [[.5,0,0],[.5,0,0],[0,1,0]], T^+ K = [[.5,.5,0],[.5,.5,0],[0,0,1]]
        assert_relative_eq!(r.constant, 1.0, epsilon = 1e-12);

        let deficient = FrameSequence::from_vectors(&[e(2, 0)]).unwrap();
        match atomic_system_constant(&deficient, &Operator::identity(2), &tol) {
            Err(Error::RangeDeficiency { witness, residual }) => {
                assert_relative_eq!(residual, 1.0, epsilon = 1e-12);
                assert_relative_eq!(witness[1].norm(), 1.0, epsilon = 1e-12);
            }
            other => panic!("expected RangeDeficiency, got {other:?}"),
        }
    }

    #[test]
    fn interchange_dual_on_counterexample() {
        let tol = Tolerances::default();
        let (f, g, k) = c3();
        let h = interchange_dual(&f, &g, &k, &tol).unwrap();
        for x in [e(3, 0), e(3, 1)] {
            let a = f.synthesis_matrix() * h.synthesis_matrix().adjoint() * &x;
            let b = h.synthesis_matrix() * f.synthesis_matrix().adjoint() * &x;
            assert!((a - &x).norm() < 1e-12);
            assert!((b - &x).norm() < 1e-12);
        }
        // identity K with the canonical dual returns G itself
        let g2 = FrameSequence::standard_basis(2)
            .appended(&FrameSequence::from_vectors(&[e(2, 0)]).unwrap())
            .unwrap();
        let f2 = associated_frame(&g2, &Operator::identity(2), &tol).unwrap();
        let h2 = interchange_dual(&f2, &g2, &Operator::identity(2), &tol).unwrap();
        assert!((h2.synthesis_matrix() - g2.synthesis_matrix()).norm() < 1e-12);
    }

    #[test]
    fn interchange_dual_rejects_non_dual() {
        let tol = Tolerances::default();
        let (f, g, k) = c3();
        assert!(matches!(
            interchange_dual(&g, &f, &k, &tol),
            Err(Error::PreconditionFailed {
                witness: Some(_),
                ..
            })
        ));
    }

    #[test]
    fn constructions() {
        let tol = Tolerances::default();
        let onb = FrameSequence::standard_basis(3);
        let same = construct_from_orthonormal(&onb, &Operator::identity(3), &tol).unwrap();
        assert_eq!(same, onb);
        let built = construct_from_orthonormal(&onb, &counterexample_k(), &tol).unwrap();
        assert_eq!(built.vectors(), vec![e(3, 0), e(3, 0), e(3, 1)]);
        let not_onb = FrameSequence::from_vectors(&[e(2, 0), e(2, 0)]).unwrap();
        assert!(matches!(
            construct_from_orthonormal(&not_onb, &Operator::identity(2), &tol),
            Err(Error::NotOrthonormal { .. })
        ));
        assert!(construct_from_frame(&not_onb, &Operator::identity(2), &tol).is_err());
    }

    #[test]
    fn restricted_inequalities_on_counterexample_and_tight_frame() {
        let tol = Tolerances::default();
        let (f, _, k) = c3();
        let r = restricted_operator_inequalities(&f, &k, &tol, 200, 1).unwrap();
        assert!(r.holds, "{r:?}");
        let t = FrameSequence::standard_basis(3)
            .appended(&FrameSequence::standard_basis(3))
            .unwrap();
        let r = restricted_operator_inequalities(&t, &Operator::identity(3), &tol, 50, 2).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.k_pinv_norm, 1.0, epsilon = 1e-13);
        // tight frame, K = I: every inequality is an equality
        assert!(r.worst_violation.abs() < 1e-12);
        let bad = FrameSequence::from_vectors(&[e(2, 0)]).unwrap();
        assert!(
            restricted_operator_inequalities(&bad, &Operator::identity(2), &tol, 5, 0).is_err()
        );
    }
}
