use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::controlled::{make_controller, Controller};
use crate::error::{Error, Result};
use crate::frames::{frame_operator, FrameSequence};
use crate::kframes::counterexample_k;
use crate::opcore::{hermitian_eigen, reassemble, Matrix, Operator, Scalar, Tolerances};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    /// Gaussian frame, Gaussian `K`, `C = I`.
    RandomFrame,
    /// Prescribed geometric singular spectrum, `K = I`, diagonal controller.
    IllConditioned,
    /// `C` and `K` spectral functions of `S`; `K` is rank deficient when `d > 1`.
    CommutingFamily,
    /// `F = {e1, e1, e2}` in C^3 with `Ke1 = Ke2 = e1`, `Ke3 = e2`, `C = I`.
    PaperC3,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] = [
        InstanceKind::RandomFrame,
        InstanceKind::IllConditioned,
        InstanceKind::CommutingFamily,
        InstanceKind::PaperC3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::RandomFrame => "random-frame",
            InstanceKind::IllConditioned => "ill-conditioned",
            InstanceKind::CommutingFamily => "commuting-family",
            InstanceKind::PaperC3 => "paper-c3",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown instance kind '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub frame: FrameSequence,
    pub k: Operator,
    pub controller: Controller,
}

/// Which controller the benchmark pairs with an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerChoice {
    /// Whatever `generate_instance` produced for the kind.
    Instance,
    Identity,
    /// `C = S^-1`.
    ExactInverse,
    /// See [`diagonal_controller`].
    Diagonal,
}

impl FromStr for ControllerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "instance" => Ok(ControllerChoice::Instance),
            "identity" => Ok(ControllerChoice::Identity),
            "exact-inverse" => Ok(ControllerChoice::ExactInverse),
            "diagonal" => Ok(ControllerChoice::Diagonal),
            _ => Err(Error::InvalidParameters(format!(
                "unknown controller '{s}'"
            ))),
        }
    }
}

/// Diagonal approximation of `S^-1` in the eigenbasis of `S`: each eigenvalue
/// `s` is inverted only up to its octave, `2^-round(log2 s)`.
///
/// Unlike a Jacobi diagonal in the standard basis this commutes with `S`, so
/// `C S` stays Hermitian and the instance remains a valid controlled one.
/// The preconditioned spectrum lies in `[2^-1/2, 2^1/2]`, hence `cond(C S) <= 2`.
pub fn diagonal_controller(frame: &FrameSequence, tol: &Tolerances) -> Result<Controller> {
    let s = frame_operator(frame);
    let (values, vectors) = hermitian_eigen(s.matrix());
    if values[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: values[0],
        });
    }
    let c = reassemble(&values, &vectors, |x| (-x.log2().round()).exp2());
    make_controller(&Operator::from_matrix_unchecked(c), tol)
}

pub fn exact_inverse_controller(frame: &FrameSequence, tol: &Tolerances) -> Result<Controller> {
    let s = frame_operator(frame);
    let (values, vectors) = hermitian_eigen(s.matrix());
    if values[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: values[0],
        });
    }
    let c = reassemble(&values, &vectors, |x| 1.0 / x);
    make_controller(&Operator::from_matrix_unchecked(c), tol)
}

pub fn choose_controller(
    instance: &Instance,
    choice: ControllerChoice,
    tol: &Tolerances,
) -> Result<Controller> {
    match choice {
        ControllerChoice::Instance => Ok(instance.controller.clone()),
        ControllerChoice::Identity => {
            make_controller(&Operator::identity(instance.frame.dim()), tol)
        }
        ControllerChoice::ExactInverse => exact_inverse_controller(&instance.frame, tol),
        ControllerChoice::Diagonal => diagonal_controller(&instance.frame, tol),
    }
}

/// Synthesis matrix `U [diag(sigma) | 0] V*`.
fn frame_with_spectrum<R: Rng + ?Sized>(rng: &mut R, sigma: &[f64], n: usize) -> Matrix {
    let d = sigma.len();
    let u = sampling::random_unitary(rng, d);
    let v = sampling::random_unitary(rng, n);
    let mut t = Matrix::zeros(d, n);
    for (i, &s) in sigma.iter().enumerate() {
        t[(i, i)] = Scalar::new(s, 0.0);
    }
    u * t * v.adjoint()
}

pub fn generate_instance(
    kind: InstanceKind,
    dim: usize,
    n: usize,
    cond_target: f64,
    seed: u64,
) -> Result<Instance> {
    let tol = Tolerances::default();
    let identity = || make_controller(&Operator::identity(dim), &tol);
    if kind == InstanceKind::PaperC3 {
        let e = |i: usize| {
            crate::opcore::Vector::from_fn(3, |r, _| Scalar::new((r == i) as u8 as f64, 0.0))
        };
        let frame = FrameSequence::from_vectors(&[e(0), e(0), e(1)])?;
        return Ok(Instance {
            frame,
            k: counterexample_k(),
            controller: make_controller(&Operator::identity(3), &tol)?,
        });
    }
    if dim == 0 || n < dim {
        return Err(Error::InvalidParameters(format!(
            "need dim >= 1 and n >= dim, got dim {dim}, n {n}"
        )));
    }
    if !(cond_target >= 1.0 && cond_target.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "cond_target must be a finite number >= 1, got {cond_target}"
        )));
    }
    let mut rng = sampling::rng(seed);
    match kind {
        InstanceKind::RandomFrame => {
            let scale = Scalar::new(1.0 / (n as f64).sqrt(), 0.0);
            let frame = FrameSequence::new(sampling::random_matrix(&mut rng, dim, n) * scale)?;
            let k = Operator::new(sampling::random_matrix(&mut rng, dim, dim))?;
            Ok(Instance {
                frame,
                k,
                controller: identity()?,
            })
        }
        InstanceKind::IllConditioned => {
            // singular values 1 .. cond^-1/2, so eigenvalues of S span 1 .. 1/cond
            let sigma: Vec<f64> = (0..dim)
                .map(|i| {
                    if dim == 1 {
                        1.0
                    } else {
                        cond_target.powf(-0.5 * i as f64 / (dim - 1) as f64)
                    }
                })
                .collect();
            let frame = FrameSequence::new(frame_with_spectrum(&mut rng, &sigma, n))?;
            let controller = diagonal_controller(&frame, &tol)?;
            Ok(Instance {
                frame,
                k: Operator::identity(dim),
                controller,
            })
        }
        InstanceKind::CommutingFamily => {
            let scale = Scalar::new(1.0 / (n as f64).sqrt(), 0.0);
            let frame = FrameSequence::new(sampling::random_matrix(&mut rng, dim, n) * scale)?;
            let s = frame_operator(&frame);
            let (_, v) = hermitian_eigen(s.matrix());
            let c_spec: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..4.0)).collect();
            // smallest eigenvalue of S is always zeroed in K; others with probability 1/4
            let k_spec: Vec<Scalar> = (0..dim)
                .map(|i| {
                    if dim > 1 && (i == 0 || rng.random_bool(0.25)) {
                        Scalar::new(0.0, 0.0)
                    } else {
                        let z = sampling::complex_gaussian(&mut rng);
                        z / Scalar::new(z.norm(), 0.0) * rng.random_range(0.5..2.0)
                    }
                })
                .collect();
            let k_spec = if k_spec.iter().all(|z| z.norm() == 0.0) {
                let mut k = k_spec;
                k[dim - 1] = Scalar::new(1.0, 0.0);
                k
            } else {
                k_spec
            };
            let c = reassemble(&(0..dim).map(|i| i as f64).collect::<Vec<_>>(), &v, |x| {
                c_spec[x as usize]
            });
            let k =
                &v * Matrix::from_diagonal(&crate::opcore::Vector::from_vec(k_spec)) * v.adjoint();
            Ok(Instance {
                frame,
                k: Operator::new(k)?,
                controller: make_controller(&Operator::from_matrix_unchecked(c), &tol)?,
            })
        }
        InstanceKind::PaperC3 => unreachable!(),
    }
}
