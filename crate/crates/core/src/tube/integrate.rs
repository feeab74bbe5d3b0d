use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{TubeError, TubeGrid};
use crate::kernel::{FunctionSpec, KernelContext};
use crate::scalar::Triple;
use crate::C64;

/// Node-level extremes over every evaluated point of the cycle.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub min_abs_f: f64,
    pub min_abs_b: f64,
    pub min_abs_p: f64,
    /// `min |P| − P floor`: headroom above the singularity floor.
    pub min_p_slack: f64,
    pub max_p_residual: f64,
    pub max_rho_residual: f64,
    pub max_newton_iterations: usize,
    pub max_jacobian_disagreement: f64,
    /// `|Σ terms| / Σ |terms|` per `[center][k]`; near zero means the sum is
    /// pure cancellation.
    pub cancellation: Vec<Vec<f64>>,
    pub points: usize,
}

/// Per-center tube integrals `values[j][k]` at one ε.
#[derive(Clone, Debug, Serialize)]
pub struct TubeIntegrals {
    pub eps: f64,
    pub values: Vec<Vec<C64>>,
    pub diagnostics: Diagnostics,
}

impl TubeIntegrals {
    /// `G_k`: the sum over all centers.
    pub fn g(&self, k: usize) -> C64 {
        self.values.iter().map(|row| row[k]).sum()
    }

    pub fn g_all(&self) -> Vec<C64> {
        (0..self.values.first().map_or(0, Vec::len))
            .map(|k| self.g(k))
            .collect()
    }

    pub fn single_center(&self, center: usize, k: usize) -> C64 {
        self.values[center][k]
    }
}

/// `2/(2πi)³ · (2π)³/(N_t N_θ N_φ)`
pub fn quadrature_weight(grid: &TubeGrid) -> C64 {
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let cell = (2.0 * PI).powi(3) / (grid.size.n_t * grid.size.n_theta * grid.size.n_phi) as f64;
    C64::new(2.0 * cell, 0.0) / two_pi_i.powu(3)
}

/// Sum in a fixed binary tree so the result does not depend on scheduling.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    match v.len() {
        0 => C64::new(0.0, 0.0),
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn pairwise_sum_real(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum_real(a) + pairwise_sum_real(b)
        }
    }
}

struct NodeSums {
    sums: Vec<C64>,
    abs: Vec<f64>,
    min_f: f64,
    min_b: f64,
    min_p: f64,
}

/// Integrates `f·(ζ1/ζ0)^k·det[...]` against the pulled-back 3-form for every
/// center in `contexts` and every `k < k_count`.
///
/// `orientation` (±1) multiplies the result.
pub fn integrate(
    grid: &TubeGrid,
    contexts: &[KernelContext<f64>],
    curve: &crate::Poly,
    f: &FunctionSpec<f64>,
    k_count: usize,
    orientation: f64,
) -> Result<TubeIntegrals, TubeError> {
    let nc = contexts.len();
    let width = nc * k_count;
    let phases: Vec<C64> = (0..grid.size.n_phi)
        .map(|m| C64::from_polar(1.0, grid.phi(m)))
        .collect();

    let per_node: Vec<Result<NodeSums, TubeError>> = grid
        .nodes
        .par_iter()
        .map(|node| {
            let mut acc = NodeSums {
                sums: vec![C64::new(0.0, 0.0); width],
                abs: vec![0.0; width],
                min_f: f64::INFINITY,
                min_b: f64::INFINITY,
                min_p: f64::INFINITY,
            };
            for (m, &ph) in phases.iter().enumerate() {
                let zeta: Triple<f64> = [node.u[0] * ph, node.u[1] * ph, node.u[2] * ph];
                let jac = node.j0 * ph * ph * ph;
                let p = curve.eval(&zeta);
                let fz = f.eval(&zeta);
                let ratio = zeta[1] / zeta[0];
                for (c, ctx) in contexts.iter().enumerate() {
                    let kv = ctx.kernel_with_p(&zeta, p).map_err(|source| TubeError::Kernel {
                        t: grid.t(node.t_index),
                        theta: grid.theta(node.theta_index),
                        phi: grid.phi(m),
                        branch: node.branch,
                        center: c,
                        source,
                    })?;
                    acc.min_f = acc.min_f.min(kv.abs_f);
                    acc.min_b = acc.min_b.min(kv.abs_b);
                    acc.min_p = acc.min_p.min(kv.abs_p);
                    let mut term = fz * kv.det * jac;
                    for k in 0..k_count {
                        acc.sums[c * k_count + k] += term;
                        acc.abs[c * k_count + k] += term.norm();
                        term *= ratio;
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut nodes = Vec::with_capacity(per_node.len());
    for r in per_node {
        nodes.push(r?);
    }
    let weight = quadrature_weight(grid) * orientation;
    let mut values = vec![vec![C64::new(0.0, 0.0); k_count]; nc];
    let mut cancellation = vec![vec![0.0; k_count]; nc];
    for idx in 0..width {
        let col: Vec<C64> = nodes.iter().map(|n| n.sums[idx]).collect();
        let abs: Vec<f64> = nodes.iter().map(|n| n.abs[idx]).collect();
        let s = pairwise_sum(&col);
        let a = pairwise_sum_real(&abs);
        values[idx / k_count][idx % k_count] = s * weight;
        cancellation[idx / k_count][idx % k_count] = if a > 0.0 { s.norm() / a } else { 0.0 };
    }
    let fold = |sel: fn(&NodeSums) -> f64| nodes.iter().map(sel).fold(f64::INFINITY, f64::min);
    let min_abs_p = fold(|n| n.min_p);
    let p_floor = contexts.first().map_or(0.0, |c| c.floors().p);
    Ok(TubeIntegrals {
        eps: grid.eps,
        values,
        diagnostics: Diagnostics {
            min_abs_f: fold(|n| n.min_f),
            min_abs_b: fold(|n| n.min_b),
            min_abs_p,
            min_p_slack: min_abs_p - p_floor,
            max_p_residual: grid.max_p_residual,
            max_rho_residual: grid.max_rho_residual,
            max_newton_iterations: grid.max_newton_iterations,
            max_jacobian_disagreement: grid.max_jacobian_disagreement,
            cancellation,
            points: grid.point_count(),
        },
    })
}
