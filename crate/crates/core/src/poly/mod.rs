//! Complex polynomial algebra: homogeneous trivariate polynomials, the
//! telescoping Hefer decomposition, univariate restriction and root finding.

mod hefer;
mod homog;
mod json;
mod roots;
mod univariate;

pub use hefer::{BiPoly, CenteredHefer, HeferTriple};
pub use homog::HomogPoly3;
pub use json::{PolyJson, TermJson};
pub use roots::{univariate_roots, Root, RootOptions};
pub use univariate::UniPoly;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("exponent {exp:?} does not sum to degree {degree}")]
    ExponentMismatch { exp: [u32; 3], degree: u32 },
    #[error(
        "line restriction dropped degree from {expected} to {actual:?}: the line's point at infinity lies on the curve"
    )]
    DegreeDrop { expected: usize, actual: Option<usize> },
    #[error("line direction is proportional to the base point")]
    ProportionalDirection,
    #[error("root finding needs degree >= 1, got {0:?}")]
    ConstantPolynomial(Option<usize>),
    #[error("root iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
}
