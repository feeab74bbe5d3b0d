use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::{GridSize, TubeError};
use crate::curve::{monodromy_cycles, BoundaryBranch, Curve, DomainSpec};
use crate::scalar::{det3_columns, norm3, Triple};
use crate::C64;

#[derive(Clone, Copy, Debug)]
pub struct TubeOptions {
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Largest finite-difference step for the Jacobian; `h/2` and `h/4` follow.
    pub fd_step: f64,
    /// Allowed relative disagreement between the two Richardson levels.
    pub fd_agreement: f64,
    /// Tolerance for the `θ = 2π` closure of each continuation loop.
    pub closure_tol: f64,
}

impl Default for TubeOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-15,
            newton_max: 50,
            fd_step: 1e-3,
            fd_agreement: 1e-6,
            closure_tol: 1e-9,
        }
    }
}

/// A solved point of `Γ^ε` with its pullback Jacobian.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TubePoint {
    pub y: C64,
    pub zeta: Triple<f64>,
    pub jacobian: C64,
    pub newton_iterations: usize,
    pub jacobian_disagreement: f64,
}

/// `p(x, y) = ε e^{iθ} ‖(1,x,y)‖^d` for `y`, as a real 2D Newton iteration.
///
/// `g = p − ε e^{iθ} n^d` depends on `y` and `ȳ`, so each step solves
/// `A δ + B δ̄ = −g`.
pub fn solve_y(
    curve: &Curve,
    x: C64,
    eps: f64,
    theta: f64,
    seed: C64,
    opts: &TubeOptions,
) -> Result<(C64, usize), TubeError> {
    let d = curve.degree() as f64;
    let target = C64::from_polar(eps, theta);
    let mut y = seed;
    for it in 1..=opts.newton_max {
        let n2 = 1.0 + x.norm_sqr() + y.norm_sqr();
        let nd = n2.powf(d / 2.0);
        let nd2 = n2.powf(d / 2.0 - 1.0);
        let g = curve.affine(x, y) - target * nd;
        let (_, py) = curve.affine_gradient(x, y);
        let a = py - target * (d / 2.0) * nd2 * y.conj();
        let b = -target * (d / 2.0) * nd2 * y;
        let den = a.norm_sqr() - b.norm_sqr();
        if den.abs() <= f64::MIN_POSITIVE || !den.is_finite() {
            return Err(TubeError::NewtonDiverged {
                x,
                theta,
                iterations: it,
            });
        }
        let delta = (-g * a.conj() + b * g.conj()) / den;
        y += delta;
        if !y.re.is_finite() || !y.im.is_finite() {
            return Err(TubeError::NewtonDiverged {
                x,
                theta,
                iterations: it,
            });
        }
        if delta.norm() <= opts.newton_tol * (1.0 + y.norm()) {
            return Ok((y, it));
        }
    }
    // Accept a stalled iteration only if the residual is at rounding level.
    let n2 = 1.0 + x.norm_sqr() + y.norm_sqr();
    let g = curve.affine(x, y) - target * n2.powf(d / 2.0);
    if g.norm() <= 1e-13 * n2.powf(d / 2.0) {
        Ok((y, opts.newton_max))
    } else {
        Err(TubeError::NewtonDiverged {
            x,
            theta,
            iterations: opts.newton_max,
        })
    }
}

fn unit_point(x: C64, y: C64) -> Triple<f64> {
    let n = (1.0 + x.norm_sqr() + y.norm_sqr()).sqrt();
    [C64::new(1.0 / n, 0.0), x / n, y / n]
}

fn sub3(a: &Triple<f64>, b: &Triple<f64>, s: f64) -> Triple<f64> {
    [(a[0] - b[0]) * s, (a[1] - b[1]) * s, (a[2] - b[2]) * s]
}

fn richardson(d_h: &Triple<f64>, d_h2: &Triple<f64>) -> Triple<f64> {
    [
        (d_h2[0] * 4.0 - d_h[0]) / 3.0,
        (d_h2[1] * 4.0 - d_h[1]) / 3.0,
        (d_h2[2] * 4.0 - d_h[2]) / 3.0,
    ]
}

/// `u(t, θ) = (1, x, y)/‖·‖` at `φ = 0` and `J0 = det[∂t u, ∂θ u, i u]`.
///
/// Central differences at `h, h/2, h/4` give two Richardson levels; their
/// determinants must agree to `fd_agreement`.
#[allow(clippy::too_many_arguments)]
fn jacobian_at(
    curve: &Curve,
    r: f64,
    eps: f64,
    t: f64,
    theta: f64,
    y: C64,
    opts: &TubeOptions,
) -> Result<(Triple<f64>, C64, f64), TubeError> {
    let u = unit_point(C64::from_polar(r, t), y);
    let at = |tt: f64, th: f64| -> Result<Triple<f64>, TubeError> {
        let x = C64::from_polar(r, tt);
        let (yy, _) = solve_y(curve, x, eps, th, y, opts)?;
        Ok(unit_point(x, yy))
    };
    let central = |h: f64, axis: usize| -> Result<Triple<f64>, TubeError> {
        let (plus, minus) = if axis == 0 {
            (at(t + h, theta)?, at(t - h, theta)?)
        } else {
            (at(t, theta + h)?, at(t, theta - h)?)
        };
        Ok(sub3(&plus, &minus, 0.5 / h))
    };
    let h = opts.fd_step;
    let mut levels = [[[C64::new(0.0, 0.0); 3]; 2]; 2];
    for (axis, level) in levels.iter_mut().enumerate() {
        let d1 = central(h, axis)?;
        let d2 = central(h / 2.0, axis)?;
        let d4 = central(h / 4.0, axis)?;
        *level = [richardson(&d1, &d2), richardson(&d2, &d4)];
    }
    let iu = [u[0] * C64::i(), u[1] * C64::i(), u[2] * C64::i()];
    let coarse = det3_columns(&levels[0][0], &levels[1][0], &iu);
    let fine = det3_columns(&levels[0][1], &levels[1][1], &iu);
    let disagreement = (coarse - fine).norm() / fine.norm().max(f64::MIN_POSITIVE);
    if disagreement > opts.fd_agreement {
        return Err(TubeError::JacobianDisagreement {
            t,
            theta,
            relative: disagreement,
        });
    }
    Ok((u, fine, disagreement))
}

/// Solves one node of `Γ^ε`. `seed` is the boundary-branch value `y(t)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_tube_point(
    curve: &Curve,
    domain: &DomainSpec,
    seed: C64,
    t: f64,
    theta: f64,
    phi: f64,
    eps: f64,
    opts: &TubeOptions,
) -> Result<TubePoint, TubeError> {
    let x = C64::from_polar(domain.radius, t);
    let start = first_order_seed(curve, x, seed, eps, theta);
    let (y, iterations) = solve_y(curve, x, eps, theta, start, opts)?;
    let (u, j0, dis) = jacobian_at(curve, domain.radius, eps, t, theta, y, opts)?;
    let phase = C64::from_polar(1.0, phi);
    Ok(TubePoint {
        y,
        zeta: [u[0] * phase, u[1] * phase, u[2] * phase],
        jacobian: j0 * phase.powu(3),
        newton_iterations: iterations,
        jacobian_disagreement: dis,
    })
}

/// `y_b + ε e^{iθ} n^d / p_y`: one linearised step off the curve.
fn first_order_seed(curve: &Curve, x: C64, y_b: C64, eps: f64, theta: f64) -> C64 {
    let (_, py) = curve.affine_gradient(x, y_b);
    let n2 = 1.0 + x.norm_sqr() + y_b.norm_sqr();
    let shift = C64::from_polar(eps, theta) * n2.powf(curve.degree() as f64 / 2.0) / py;
    if shift.re.is_finite() && shift.im.is_finite() {
        y_b + shift
    } else {
        y_b
    }
}

/// One `(t, θ)` lattice node; the `φ` direction is recovered from
/// `ζ(φ) = e^{iφ}u` and `J(φ) = e^{3iφ}J0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LatticeNode {
    pub branch: usize,
    pub t_index: usize,
    pub theta_index: usize,
    pub y: C64,
    pub u: Triple<f64>,
    pub j0: C64,
}

/// Discretised `Γ^ε` with its residual diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct TubeGrid {
    pub eps: f64,
    pub size: GridSize,
    pub radius: f64,
    /// Branch indices of each monodromy cycle, in traversal order.
    pub cycles: Vec<Vec<usize>>,
    pub nodes: Vec<LatticeNode>,
    pub max_newton_iterations: usize,
    pub max_jacobian_disagreement: f64,
    pub max_p_residual: f64,
    pub max_rho_residual: f64,
    pub max_norm_residual: f64,
}

impl TubeGrid {
    pub fn t(&self, j: usize) -> f64 {
        TAU * j as f64 / self.size.n_t as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        TAU * i as f64 / self.size.n_theta as f64
    }

    pub fn phi(&self, m: usize) -> f64 {
        TAU * m as f64 / self.size.n_phi as f64
    }

    /// Number of evaluation points including the `φ` direction.
    pub fn point_count(&self) -> usize {
        self.nodes.len() * self.size.n_phi
    }
}

pub const P_TOL: f64 = 1e-10;
pub const RHO_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// Nodes of one `t` column with its worst Newton count and FD disagreement.
type SolvedColumn = (Vec<LatticeNode>, usize, f64);

/// Solves the `(t, θ)` lattice over every boundary branch.
///
/// `branches` must be traced with `size.n_t` nodes.
pub fn build_tube_grid(
    curve: &Curve,
    domain: &DomainSpec,
    branches: &[BoundaryBranch],
    eps: f64,
    size: GridSize,
    opts: &TubeOptions,
) -> Result<TubeGrid, TubeError> {
    if branches.iter().any(|b| b.n_t() != size.n_t) {
        return Err(TubeError::GridMismatch {
            expected: size.n_t,
            got: branches.first().map_or(0, |b| b.n_t()),
        });
    }
    let cycles = monodromy_cycles(branches);
    let columns: Vec<(usize, usize)> = cycles
        .iter()
        .flat_map(|c| c.iter().flat_map(|&b| (0..size.n_t).map(move |j| (b, j))))
        .collect();

    let solved: Vec<Result<SolvedColumn, TubeError>> = columns
        .par_iter()
        .map(|&(b, j)| solve_column(curve, domain, branches, b, j, eps, size, opts))
        .collect();

    let mut nodes = Vec::with_capacity(columns.len() * size.n_theta);
    let mut max_newton = 0;
    let mut max_dis = 0.0f64;
    for col in solved {
        let (n, it, dis) = col?;
        max_newton = max_newton.max(it);
        max_dis = max_dis.max(dis);
        nodes.extend(n);
    }

    let mut grid = TubeGrid {
        eps,
        size,
        radius: domain.radius,
        cycles,
        nodes,
        max_newton_iterations: max_newton,
        max_jacobian_disagreement: max_dis,
        max_p_residual: 0.0,
        max_rho_residual: 0.0,
        max_norm_residual: 0.0,
    };
    for node in &grid.nodes {
        let p_res = (curve.eval(&node.u).norm() - eps).abs();
        let rho_res = domain.rho(&node.u).abs();
        let norm_res = (norm3(&node.u) - 1.0).abs();
        grid.max_p_residual = grid.max_p_residual.max(p_res);
        grid.max_rho_residual = grid.max_rho_residual.max(rho_res);
        grid.max_norm_residual = grid.max_norm_residual.max(norm_res);
        if p_res > P_TOL || rho_res > RHO_TOL || norm_res > NORM_TOL {
            return Err(TubeError::Invariant {
                t: grid.t(node.t_index),
                theta: grid.theta(node.theta_index),
                p_residual: p_res,
                rho_residual: rho_res,
                norm_residual: norm_res,
            });
        }
    }
    Ok(grid)
}

/// θ-continuation at one boundary node, closure-checked at `θ = 2π`.
#[allow(clippy::too_many_arguments)]
fn solve_column(
    curve: &Curve,
    domain: &DomainSpec,
    branches: &[BoundaryBranch],
    b: usize,
    j: usize,
    eps: f64,
    size: GridSize,
    opts: &TubeOptions,
) -> Result<SolvedColumn, TubeError> {
    let r = domain.radius;
    let t = TAU * j as f64 / size.n_t as f64;
    let x = C64::from_polar(r, t);
    let y_b = branches[b].values[j];
    let mut out = Vec::with_capacity(size.n_theta);
    let mut max_it = 0;
    let mut max_dis = 0.0f64;
    let mut seed = first_order_seed(curve, x, y_b, eps, 0.0);
    let mut y_first = C64::new(0.0, 0.0);
    for i in 0..size.n_theta {
        let theta = TAU * i as f64 / size.n_theta as f64;
        let (y, it) = solve_y(curve, x, eps, theta, seed, opts)?;
        if i == 0 {
            check_sheet(branches, b, j, y, t)?;
            y_first = y;
        }
        let (u, j0, dis) = jacobian_at(curve, r, eps, t, theta, y, opts)?;
        max_it = max_it.max(it);
        max_dis = max_dis.max(dis);
        out.push(LatticeNode {
            branch: b,
            t_index: j,
            theta_index: i,
            y,
            u,
            j0,
        });
        seed = y;
    }
    let (y_closed, _) = solve_y(curve, x, eps, TAU, seed, opts)?;
    let gap = (y_closed - y_first).norm();
    if gap > opts.closure_tol * (1.0 + y_first.norm()) {
        return Err(TubeError::ClosureFailed { t, gap });
    }
    Ok((out, max_it, max_dis))
}

/// The tube point at `θ = 0` must stay nearest its own branch.
fn check_sheet(branches: &[BoundaryBranch], b: usize, j: usize, y: C64, t: f64) -> Result<(), TubeError> {
    let own = (y - branches[b].values[j]).norm();
    for other in branches {
        if other.index != b && (y - other.values[j]).norm() <= own {
            return Err(TubeError::SheetJump {
                t,
                branch: b,
                landed_near: other.index,
            });
        }
    }
    Ok(())
}
