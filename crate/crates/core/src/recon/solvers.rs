use serde::{Deserialize, Serialize};

use crate::controlled::{controlled_kframe_check, Controller};
use crate::error::{Error, Result};
use crate::frames::{frame_operator, FrameSequence};
use crate::opcore::{
    gl_plus_check, hermitian_extremes, inner, is_hermitian, Operator, OperatorBounds, Scalar,
    Tolerances, Vector,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    /// `2 / (A + B)` from the certified bounds.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub relaxation: Relaxation,
    /// Relative residual target `||g - S f|| / ||g||`.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            relaxation: Relaxation::Auto,
            residual_tol: 1e-8,
            max_iter: 100_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) || self.max_iter == 0 {
            return Err(Error::InvalidParameters(
                "residual_tol must be positive and max_iter at least 1".into(),
            ));
        }
        if let Relaxation::Fixed(l) = self.relaxation {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "relaxation must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }

    fn relaxation_for(&self, bounds: OperatorBounds) -> f64 {
        match self.relaxation {
            Relaxation::Auto => 2.0 / (bounds.lower + bounds.upper),
            Relaxation::Fixed(l) => l,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub iterations: usize,
    /// Relative residual of the original system after each iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Geometric-mean residual contraction over the final (at most) 10 iterations.
    pub empirical_rate: f64,
    /// Step size used by Richardson; `None` for conjugate gradients.
    pub relaxation: Option<f64>,
}

/// A solution together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solve {
    #[serde(with = "crate::json::vector_serde")]
    pub solution: Vector,
    pub trace: ConvergenceTrace,
}

fn empirical_rate(residuals: &[f64]) -> f64 {
    // residual before the first iteration is 1
    let k = residuals.len();
    if k == 0 {
        return 0.0;
    }
    let m = k.min(10);
    let last = residuals[k - 1];
    let first = if k > m { residuals[k - 1 - m] } else { 1.0 };
    if last == 0.0 || first == 0.0 {
        return 0.0;
    }
    (last / first).powf(1.0 / m as f64)
}

fn finish(
    solution: Vector,
    residuals: Vec<f64>,
    converged: bool,
    relaxation: Option<f64>,
) -> Result<Solve> {
    let trace = ConvergenceTrace {
        iterations: residuals.len(),
        empirical_rate: empirical_rate(&residuals),
        residuals,
        converged,
        relaxation,
    };
    let solve = Solve { solution, trace };
    if converged {
        Ok(solve)
    } else {
        Err(Error::NotConverged(Box::new(solve)))
    }
}

/// Preconditioned Richardson sweep for `S f = g`:
/// `f <- f + lambda * P (g - S f)`, stopping on the residual of `S f = g`.
fn richardson_loop(
    s: &Operator,
    precondition: Option<&Operator>,
    g: &Vector,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Solve> {
    let g_norm = g.norm();
    let mut f = Vector::zeros(g.len());
    let mut residuals = Vec::new();
    if g_norm == 0.0 {
        return finish(f, residuals, true, Some(lambda));
    }
    let step = Scalar::new(lambda, 0.0);
    let mut r = g.clone();
    for _ in 0..cfg.max_iter {
        match precondition {
            Some(p) => f += p.apply(&r) * step,
            None => f += &r * step,
        }
        r = g - s.apply(&f);
        let rel = r.norm() / g_norm;
        residuals.push(rel);
        if rel <= cfg.residual_tol {
            return finish(f, residuals, true, Some(lambda));
        }
        if !rel.is_finite() {
            break;
        }
    }
    finish(f, residuals, false, Some(lambda))
}

fn require_positive(op: &Operator, tol: &Tolerances) -> Result<()> {
    if !is_hermitian(op, tol) {
        return Err(Error::NotHermitian {
            deviation: (op.matrix() - op.matrix().adjoint()).norm(),
        });
    }
    let (lo, _) = hermitian_extremes(op.matrix());
    if lo <= 0.0 {
        return Err(Error::IndefiniteOperator { min_eigenvalue: lo });
    }
    Ok(())
}

/// Richardson iteration `f_{k+1} = f_k + lambda (g - Op f_k)` from `f_0 = 0`.
pub fn richardson_solve(
    op: &Operator,
    g: &Vector,
    bounds: OperatorBounds,
    cfg: &SolverConfig,
) -> Result<Solve> {
    cfg.validate()?;
    crate::frames::check(op.dim(), g.len())?;
    require_positive(op, &Tolerances::default())?;
    richardson_loop(op, None, g, cfg.relaxation_for(bounds), cfg)
}

/// Solves `S f = g` by Richardson on `L_C = C S` with right-hand side `C g`.
/// Residuals are those of the original system `S f = g`.
pub fn controlled_richardson_solve(
    frame: &FrameSequence,
    ctrl: &Controller,
    k: &Operator,
    g: &Vector,
    cfg: &SolverConfig,
) -> Result<Solve> {
    cfg.validate()?;
    crate::frames::check(frame.dim(), g.len())?;
    let tol = Tolerances::default();
    controlled_kframe_check(frame, k, ctrl, &tol)?;
    let s = frame_operator(frame);
    let cs = Operator::from_matrix_unchecked(crate::opcore::hermitian_part(
        ctrl.operator().compose(&s).matrix(),
    ));
    let bounds = match gl_plus_check(&cs, &tol) {
        Ok(b) => b,
        Err(Error::NotPositiveDefinite { min_eigenvalue }) => {
            return Err(Error::IndefiniteOperator { min_eigenvalue })
        }
        Err(e) => return Err(e),
    };
    richardson_loop(
        &s,
        Some(ctrl.operator()),
        g,
        cfg.relaxation_for(bounds),
        cfg,
    )
}

/// Conjugate gradients for Hermitian positive definite `Op`.
pub fn cg_solve(op: &Operator, g: &Vector, cfg: &SolverConfig) -> Result<Solve> {
    cfg.validate()?;
    crate::frames::check(op.dim(), g.len())?;
    let tol = Tolerances::default();
    if !is_hermitian(op, &tol) {
        return Err(Error::NotHermitian {
            deviation: (op.matrix() - op.matrix().adjoint()).norm(),
        });
    }
    let g_norm = g.norm();
    let mut x = Vector::zeros(g.len());
    let mut residuals = Vec::new();
    if g_norm == 0.0 {
        return finish(x, residuals, true, None);
    }
    let mut r = g.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    for _ in 0..cfg.max_iter {
        let ap = op.apply(&p);
        let pap = inner(&ap, &p).re;
        if pap <= 0.0 {
            return Err(Error::IndefiniteOperator {
                min_eigenvalue: pap / p.norm_squared(),
            });
        }
        let alpha = Scalar::new(rr / pap, 0.0);
        x += &p * alpha;
        r -= &ap * alpha;
        let rr_next = r.norm_squared();
        // true residual keeps the trace honest when recurrences drift
        let rel = (g - op.apply(&x)).norm() / g_norm;
        residuals.push(rel);
        if rel <= cfg.residual_tol {
            return finish(x, residuals, true, None);
        }
        let beta = Scalar::new(rr_next / rr, 0.0);
        p = &r + &p * beta;
        rr = rr_next;
    }
    finish(x, residuals, false, None)
}
