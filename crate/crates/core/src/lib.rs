//! Finite-dimensional K-frames and C-controlled K-frames on `C^d`.
//!
//! Inner products are linear in the first argument, `<x, y> = y* x`.

pub mod controlled;
pub mod error;
pub mod frames;
pub mod json;
pub mod kframes;
pub mod opcore;
mod pencil;
pub mod recon;
pub mod sampling;

pub use error::{Error, Result};
pub use frames::{FrameBounds, FrameSequence};
pub use opcore::{Matrix, Operator, OperatorBounds, Scalar, Tolerances, Vector};
