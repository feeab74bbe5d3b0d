//! Numerical reconstruction of holomorphic functions on domains of plane
//! projective curves from integrals over a boundary tube.
//!
//! The algebra layer ([`poly`], [`kernel`], [`linalg`]) is generic over the
//! real [`Scalar`]; geometry, quadrature and the scenario pipeline run in
//! `f64`. The `f64` aliases below are what the pipeline uses.

pub mod curve;
pub mod kernel;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod recovery;
pub mod scalar;
pub mod scenario;
pub mod tube;

pub use scalar::{Scalar, Triple};

pub type C64 = num_complex::Complex<f64>;
pub type Poly = poly::HomogPoly3<f64>;
pub type Hefer = poly::HeferTriple<f64>;
pub type Uni = poly::UniPoly<f64>;
