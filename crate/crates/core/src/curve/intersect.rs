use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Curve, CurvePoint, DomainSpec, GeomError, ON_CURVE_TOL};
use crate::poly::{univariate_roots, PolyError, RootOptions};
use crate::scalar::{normalize3, Triple};
use crate::C64;

/// `S(w)`: the center first, then the other points of the line through `w`
/// and the base point `c`, in the order the root finder returns them.
#[derive(Clone, Debug, Serialize)]
pub struct IntersectionSet {
    pub base_point: Triple<f64>,
    pub points: Vec<CurvePoint>,
    /// Line parameters `μ` with `ζ = w + μ c` (`0` for the center).
    pub mu: Vec<C64>,
}

impl IntersectionSet {
    pub fn center(&self) -> &CurvePoint {
        &self.points[0]
    }

    /// Number of points besides the center.
    pub fn p(&self) -> usize {
        self.points.len() - 1
    }

    pub fn ratios(&self) -> Vec<C64> {
        self.points.iter().map(CurvePoint::ratio).collect()
    }

    pub fn lifts(&self) -> Vec<Triple<f64>> {
        self.points.iter().map(|p| p.lift).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BaseOptions {
    /// Smallest admissible `|P(c)|` for unit `c`.
    pub p_floor: f64,
    /// Smallest admissible `|ζ0|` of the unit lift of each point.
    pub min_z0: f64,
    /// Smallest chordal distance from each point to `|x| = r`.
    pub boundary_margin: f64,
    pub min_ratio_separation: f64,
    pub max_attempts: usize,
}

impl Default for BaseOptions {
    fn default() -> Self {
        Self {
            p_floor: 1e-8,
            min_z0: 0.1,
            boundary_margin: 0.05,
            min_ratio_separation: 1e-6,
            max_attempts: 64,
        }
    }
}

/// Intersects the line `w + μ c` with the curve.
///
/// Requires `w` on the curve, `P(c) ≠ 0` and a transversal line.
pub fn intersect_line(
    curve: &Curve,
    w: &CurvePoint,
    c: &Triple<f64>,
    min_ratio_separation: f64,
) -> Result<IntersectionSet, GeomError> {
    let residual = w.residual(curve);
    if residual > ON_CURVE_TOL {
        return Err(GeomError::OffCurve { residual });
    }
    let q = curve.poly().restrict_to_line(&w.lift, c).map_err(|e| match e {
        PolyError::DegreeDrop { .. } => GeomError::BaseOnCurve {
            value: curve.eval(&normalize3(c)).norm(),
        },
        other => other.into(),
    })?;
    // q(0) = P(w) is rounding noise; drop it and divide by μ.
    let coeffs = q.coeffs();
    let reduced = crate::Uni::new(coeffs[1..].to_vec());
    let mut mu = vec![C64::new(0.0, 0.0)];
    if reduced.degree().unwrap_or(0) > 0 {
        for root in univariate_roots(&reduced, &RootOptions::default())? {
            if !root.is_simple() {
                return Err(GeomError::NotTransversal { mu: root.value });
            }
            mu.push(root.value);
        }
    }
    let scale = mu.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    for &m in &mu[1..] {
        if m.norm() <= 1e-8 * scale {
            return Err(GeomError::NotTransversal { mu: m });
        }
    }
    let mut points = Vec::with_capacity(mu.len());
    points.push(*w);
    for &m in &mu[1..] {
        let zeta = [w.lift[0] + m * c[0], w.lift[1] + m * c[1], w.lift[2] + m * c[2]];
        let norm = crate::scalar::norm3(&zeta);
        if zeta[0].norm() <= 1e-12 * norm {
            return Err(GeomError::AtInfinity);
        }
        points.push(CurvePoint::from_homogeneous(&zeta).ok_or(GeomError::AtInfinity)?);
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let separation = (points[i].x - points[j].x).norm();
            if separation < min_ratio_separation {
                return Err(GeomError::RatioCollision { i, j, separation });
            }
        }
    }
    Ok(IntersectionSet {
        base_point: *c,
        points,
        mu,
    })
}

/// Full admissibility check for a base point.
pub fn check_base_point(
    curve: &Curve,
    domain: &DomainSpec,
    w: &CurvePoint,
    c: &Triple<f64>,
    opts: &BaseOptions,
) -> Result<IntersectionSet, GeomError> {
    let value = curve.eval(&normalize3(c)).norm();
    if value < opts.p_floor {
        return Err(GeomError::BaseOnCurve { value });
    }
    let set = intersect_line(curve, w, c, opts.min_ratio_separation)?;
    for (index, pt) in set.points.iter().enumerate() {
        let z0 = pt.lift[0].norm();
        if z0 < opts.min_z0 {
            return Err(GeomError::NearInfinity {
                index,
                z0,
                min: opts.min_z0,
            });
        }
        let distance = domain.chordal_distance_to_boundary(pt.x);
        if distance < opts.boundary_margin {
            return Err(GeomError::NearBoundary {
                index,
                distance,
                margin: opts.boundary_margin,
            });
        }
    }
    Ok(set)
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseChoice {
    pub seed: u64,
    pub attempts: usize,
    pub set: IntersectionSet,
    /// Reasons for each rejected draw, in order.
    pub rejections: Vec<String>,
}

/// Draws base points from a seeded stream until one is admissible.
pub fn pick_base_point(
    curve: &Curve,
    domain: &DomainSpec,
    w: &CurvePoint,
    seed: u64,
    opts: &BaseOptions,
) -> Result<BaseChoice, GeomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejections = Vec::new();
    for attempt in 1..=opts.max_attempts {
        let mut c = [C64::new(0.0, 0.0); 3];
        for z in &mut c {
            *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        match check_base_point(curve, domain, w, &c, opts) {
            Ok(set) => {
                return Ok(BaseChoice {
                    seed,
                    attempts: attempt,
                    set,
                    rejections,
                })
            }
            Err(e) => rejections.push(e.to_string()),
        }
    }
    Err(GeomError::BasePointExhausted {
        attempts: opts.max_attempts,
        last: rejections.pop().unwrap_or_default(),
    })
}
