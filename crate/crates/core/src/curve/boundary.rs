use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{Curve, DomainSpec, GeomError};
use crate::poly::{univariate_roots, RootOptions};
use crate::C64;

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    /// Smallest admissible `|∂p/∂y|` on the boundary.
    pub degeneracy_floor: f64,
    /// Roots closer than this (relative to `max(1, |y|)`) collide.
    pub separation: f64,
    /// Continuation values must match a freshly solved root to this tolerance.
    pub match_tol: f64,
    pub max_halvings: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            degeneracy_floor: 1e-8,
            separation: 1e-8,
            match_tol: 1e-8,
            max_halvings: 30,
        }
    }
}

/// One y-branch over the boundary circle `x(t) = r e^{it}`.
///
/// `values[j]` is `y(2πj/N_t)`. Continuing past `t = 2π` lands on the start of
/// branch `closes_to` (itself unless there is monodromy).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBranch {
    pub index: usize,
    pub radius: f64,
    pub values: Vec<C64>,
    pub closes_to: usize,
}

impl BoundaryBranch {
    pub fn n_t(&self) -> usize {
        self.values.len()
    }

    pub fn t(&self, j: usize) -> f64 {
        TAU * j as f64 / self.values.len() as f64
    }

    pub fn x(&self, j: usize) -> C64 {
        C64::from_polar(self.radius, self.t(j))
    }
}

/// Branches grouped into closed loops under `closes_to`.
pub fn monodromy_cycles(branches: &[BoundaryBranch]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; branches.len()];
    let mut cycles = Vec::new();
    for start in 0..branches.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut b = start;
        while !seen[b] {
            seen[b] = true;
            cycle.push(b);
            b = branches[b].closes_to;
        }
        cycles.push(cycle);
    }
    cycles
}

fn node_roots(curve: &Curve, x: C64, t: f64, opts: &TraceOptions) -> Result<Vec<C64>, GeomError> {
    let q = curve.y_polynomial(x);
    let scale = q.max_abs_coeff();
    match q.degree() {
        Some(n) if n == curve.degree_y() as usize => {}
        _ => return Err(GeomError::BranchAtInfinity { t }),
    }
    if q.leading().unwrap().norm() <= 1e-12 * scale {
        return Err(GeomError::BranchAtInfinity { t });
    }
    let roots: Vec<C64> = univariate_roots(&q, &RootOptions::default())?
        .into_iter()
        .map(|r| r.value)
        .collect();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if d <= opts.separation * roots[i].norm().max(1.0) {
                return Err(GeomError::BranchCollision {
                    t,
                    a: roots[i],
                    b: roots[j],
                    distance: d,
                });
            }
        }
    }
    for &y in &roots {
        let (_, py) = curve.affine_gradient(x, y);
        if py.norm() < opts.degeneracy_floor {
            return Err(GeomError::DegenerateBranch { t, y, dpdy: py.norm() });
        }
    }
    Ok(roots)
}

/// Newton on `y ↦ p(x, y)` from `y0`; `None` unless it converges fast.
fn newton_y(curve: &Curve, x: C64, y0: C64, max_iter: usize) -> Option<C64> {
    let mut y = y0;
    for _ in 0..max_iter {
        let p = curve.affine(x, y);
        let (_, py) = curve.affine_gradient(x, y);
        if py.norm() == 0.0 {
            return None;
        }
        let step = p / py;
        y -= step;
        if step.norm() <= 1e-15 * (1.0 + y.norm()) {
            return Some(y);
        }
    }
    let p = curve.affine(x, y);
    (p.norm() <= 1e-13 * (1.0 + y.norm())).then_some(y)
}

/// Predictor–corrector continuation of one root from `t0` to `t1`.
///
/// `spacing` bounds how far a single substep may move the root.
fn continue_root(
    curve: &Curve,
    r: f64,
    t0: f64,
    t1: f64,
    y0: C64,
    spacing: f64,
    opts: &TraceOptions,
) -> Result<C64, GeomError> {
    let mut t = t0;
    let mut y = y0;
    let mut h = t1 - t0;
    let mut halvings = 0;
    while t < t1 - 1e-15 {
        let step = h.min(t1 - t);
        let x0 = C64::from_polar(r, t);
        let x1 = C64::from_polar(r, t + step);
        let (px, py) = curve.affine_gradient(x0, y);
        // dy/dt = −p_x·(dx/dt)/p_y with dx/dt = i x
        let dydt = -px * C64::new(0.0, 1.0) * x0 / py;
        let predicted = y + dydt * step;
        let corrected = newton_y(curve, x1, predicted, 8);
        let ok =
            corrected.is_some_and(|yc| (yc - predicted).norm() <= 0.1 * spacing && (yc - y).norm() <= 0.5 * spacing);
        if ok {
            y = corrected.unwrap();
            t += step;
        } else {
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(GeomError::ContinuationFailed { t0, t1, halvings });
            }
            h = step / 2.0;
        }
    }
    Ok(y)
}

fn min_spacing(roots: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            m = m.min((roots[i] - roots[j]).norm());
        }
    }
    if m.is_finite() {
        m
    } else {
        // A single branch: bound the step by the root's own scale.
        roots.first().map_or(1.0, |y| y.norm().max(1.0))
    }
}

/// Traces every y-branch of `p(r e^{it}, y) = 0` over `N_t` equispaced nodes.
pub fn trace_boundary(
    curve: &Curve,
    domain: &DomainSpec,
    n_t: usize,
    opts: &TraceOptions,
) -> Result<Vec<BoundaryBranch>, GeomError> {
    if curve.degree_y() == 0 {
        return Err(GeomError::NoBranches);
    }
    assert!(n_t >= 4, "need at least 4 boundary nodes");
    let r = domain.radius;
    let start = node_roots(curve, C64::new(r, 0.0), 0.0, opts)?;
    let nb = start.len();
    let mut tables: Vec<Vec<C64>> = start.iter().map(|&y| vec![y]).collect();
    let mut current = start.clone();

    for j in 0..n_t {
        let t0 = TAU * j as f64 / n_t as f64;
        let t1 = TAU * (j + 1) as f64 / n_t as f64;
        let spacing = min_spacing(&current);
        let mut next = Vec::with_capacity(nb);
        for &y in &current {
            next.push(continue_root(curve, r, t0, t1, y, spacing, opts)?);
        }
        let target = if j + 1 < n_t {
            node_roots(curve, C64::from_polar(r, t1), t1, opts)?
        } else {
            start.clone()
        };
        let matched = match_roots(&next, &target, opts.match_tol, t1)?;
        if j + 1 < n_t {
            for (b, &ti) in matched.iter().enumerate() {
                tables[b].push(target[ti]);
            }
            current = matched.iter().map(|&ti| target[ti]).collect();
        } else {
            return Ok(tables
                .into_iter()
                .enumerate()
                .map(|(b, values)| BoundaryBranch {
                    index: b,
                    radius: r,
                    values,
                    closes_to: matched[b],
                })
                .collect());
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Assigns each continued value to a distinct freshly solved root.
fn match_roots(continued: &[C64], target: &[C64], tol: f64, t: f64) -> Result<Vec<usize>, GeomError> {
    let mut used = vec![false; target.len()];
    let mut out = Vec::with_capacity(continued.len());
    for &y in continued {
        let best = target
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - y).norm().partial_cmp(&(b.1 - y).norm()).unwrap());
        match best {
            Some((i, &yt)) if (yt - y).norm() <= tol * yt.norm().max(1.0) => {
                used[i] = true;
                out.push(i);
            }
            _ => {
                return Err(GeomError::ContinuationFailed {
                    t0: t,
                    t1: t,
                    halvings: 0,
                })
            }
        }
    }
    Ok(out)
}
