//! Quadrature over the 3-cycle `Γ^ε = {|P(ζ)| = ε, ϱ(ζ) = 0} ⊂ S⁵`, its
//! `ε → 0` extrapolation, and the one-dimensional contour check.

mod extrapolate;
mod grid;
mod integrate;
mod residue;
mod solve;

pub use extrapolate::{extrapolate, Extrapolated, ExtrapolationError, NON_MONOTONE_INFLATION};
pub use grid::{EpsSchedule, GridPolicy, GridSize};
pub use integrate::{integrate, pairwise_sum, quadrature_weight, Diagnostics, TubeIntegrals};
pub use residue::{residue_line_check, residue_nodes};
pub use solve::{
    build_tube_grid, solve_tube_point, solve_y, LatticeNode, TubeGrid, TubeOptions, TubePoint, NORM_TOL, P_TOL, RHO_TOL,
};

use thiserror::Error;

use crate::curve::GeomError;
use crate::kernel::KernelError;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TubeError {
    #[error("Newton diverged at x = {x}, θ = {theta:.6} after {iterations} iterations")]
    NewtonDiverged { x: C64, theta: f64, iterations: usize },
    #[error("Jacobian step-halving disagreement {relative:e} at t = {t:.6}, θ = {theta:.6}")]
    JacobianDisagreement { t: f64, theta: f64, relative: f64 },
    #[error("θ-continuation did not close at t = {t:.6}: gap {gap:e}")]
    ClosureFailed { t: f64, gap: f64 },
    #[error("tube point at t = {t:.6} seeded from branch {branch} landed nearer branch {landed_near}")]
    SheetJump { t: f64, branch: usize, landed_near: usize },
    #[error(
        "node invariant violated at t = {t:.6}, θ = {theta:.6}: ||P|−ε| = {p_residual:e}, |ϱ| = {rho_residual:e}, |‖ζ‖−1| = {norm_residual:e}"
    )]
    Invariant {
        t: f64,
        theta: f64,
        p_residual: f64,
        rho_residual: f64,
        norm_residual: f64,
    },
    #[error("boundary trace has {got} nodes but the grid needs {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("kernel at t = {t:.6}, θ = {theta:.6}, φ = {phi:.6} (branch {branch}, center {center}): {source}")]
    Kernel {
        t: f64,
        theta: f64,
        phi: f64,
        branch: usize,
        center: usize,
        source: KernelError,
    },
    #[error(transparent)]
    Geom(#[from] GeomError),
}
