//! Geometry of the curve `V ⊂ CP²` in the chart `ζ0 = 1`: sphere lifts, the
//! boundary circle `|x| = r` with its branches, and line intersections.

mod boundary;
mod cache;
mod intersect;

pub use boundary::{monodromy_cycles, trace_boundary, BoundaryBranch, TraceOptions};
pub use cache::BoundaryCache;
pub use intersect::{check_base_point, intersect_line, pick_base_point, BaseChoice, BaseOptions, IntersectionSet};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::poly::{HomogPoly3, PolyError, PolyJson};
use crate::scalar::{normalize3, Triple};
use crate::{Hefer, Poly, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("curve must have degree >= 1 and at least one term")]
    DegenerateCurve,
    #[error("curve has no y-dependence in the chart ζ0 = 1; its boundary cannot be parametrised by x")]
    NoBranches,
    #[error("branch collision at t = {t:.6}: roots {a} and {b} are {distance:e} apart")]
    BranchCollision { t: f64, a: C64, b: C64, distance: f64 },
    #[error("degenerate branch at t = {t:.6}: |∂p/∂y| = {dpdy:e} at y = {y}")]
    DegenerateBranch { t: f64, y: C64, dpdy: f64 },
    #[error("leading y-coefficient vanishes at t = {t:.6}: a branch escapes to infinity")]
    BranchAtInfinity { t: f64 },
    #[error("continuation failed between t = {t0:.6} and t = {t1:.6} after {halvings} step halvings")]
    ContinuationFailed { t0: f64, t1: f64, halvings: usize },
    #[error("singular point of the curve near x = {x}, y = {y}: |∇P| = {grad:e}")]
    Singular { x: C64, y: C64, grad: f64 },
    #[error("point is off the curve: |P| = {residual:e}")]
    OffCurve { residual: f64 },
    #[error("base point lies on the curve: |P(c)| = {value:e}")]
    BaseOnCurve { value: f64 },
    #[error("line restriction multiple root near μ = {mu}: the line is not transversal")]
    NotTransversal { mu: C64 },
    #[error("intersection point at infinity (ζ0 = 0)")]
    AtInfinity,
    #[error("points {i} and {j} of S(w) share the ratio ζ1/ζ0 (separation {separation:e})")]
    RatioCollision { i: usize, j: usize, separation: f64 },
    #[error("point {index} of S(w) has |ζ0| = {z0:.4} on the sphere, below {min}")]
    NearInfinity { index: usize, z0: f64, min: f64 },
    #[error("point {index} of S(w) is {distance:.4} from the boundary circle, below the margin {margin}")]
    NearBoundary { index: usize, distance: f64, margin: f64 },
    #[error("no admissible base point after {attempts} draws; last rejection: {last}")]
    BasePointExhausted { attempts: usize, last: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("cache I/O: {0}")]
    Cache(String),
}

/// Tolerance for "lies on the curve".
pub const ON_CURVE_TOL: f64 = 1e-10;

/// Defining polynomial with its derived data.
#[derive(Clone, Debug)]
pub struct Curve {
    poly: Poly,
    gradient: [Poly; 3],
    hefer: Hefer,
    degree_y: u32,
    digest: String,
}

impl Curve {
    pub fn new(poly: Poly) -> Result<Self, GeomError> {
        if poly.degree() == 0 || poly.is_zero() {
            return Err(GeomError::DegenerateCurve);
        }
        let degree_y = poly.terms().map(|(e, _)| e[2]).max().unwrap_or(0);
        let json = serde_json::to_string(&PolyJson::from(&poly)).expect("polynomial serialises");
        let digest = hex::encode(Sha256::digest(json.as_bytes()));
        Ok(Self {
            gradient: poly.gradient(),
            hefer: Hefer::decompose(&poly),
            poly,
            degree_y,
            digest,
        })
    }

    /// `ζ2`
    pub fn line() -> Self {
        Self::new(HomogPoly3::from_real(1, &[([0, 0, 1], 1.0)]).unwrap()).unwrap()
    }

    /// `ζ0ζ2 − ζ1²`, i.e. `y = x²`.
    pub fn conic() -> Self {
        Self::new(HomogPoly3::from_real(2, &[([1, 0, 1], 1.0), ([0, 2, 0], -1.0)]).unwrap()).unwrap()
    }

    /// `ζ0³ + ζ1³ + ζ2³`
    pub fn fermat_cubic() -> Self {
        Self::new(HomogPoly3::from_real(3, &[([3, 0, 0], 1.0), ([0, 3, 0], 1.0), ([0, 0, 3], 1.0)]).unwrap()).unwrap()
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn hefer(&self) -> &Hefer {
        &self.hefer
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    /// Number of y-branches over a generic x.
    pub fn degree_y(&self) -> u32 {
        self.degree_y
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn eval(&self, zeta: &Triple<f64>) -> C64 {
        self.poly.eval(zeta)
    }

    /// `p(x, y) = P(1, x, y)`
    pub fn affine(&self, x: C64, y: C64) -> C64 {
        self.poly.eval(&affine_triple(x, y))
    }

    /// `(∂p/∂x, ∂p/∂y)` at `(x, y)`.
    pub fn affine_gradient(&self, x: C64, y: C64) -> (C64, C64) {
        let z = affine_triple(x, y);
        (self.gradient[1].eval(&z), self.gradient[2].eval(&z))
    }

    pub fn grad_norm(&self, zeta: &Triple<f64>) -> f64 {
        self.gradient
            .iter()
            .map(|g| g.eval(zeta).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `y ↦ p(x, y)` as a univariate polynomial.
    pub fn y_polynomial(&self, x: C64) -> crate::Uni {
        self.poly.affine_in_y(x)
    }
}

pub(crate) fn affine_triple(x: C64, y: C64) -> Triple<f64> {
    [Complex::new(1.0, 0.0), x, y]
}

/// `ϱ(ζ) = |ζ1|² − r²|ζ0|²`; the domain is the part of the curve over `|x| < r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub radius: f64,
}

impl DomainSpec {
    pub fn new(radius: f64) -> Self {
        assert!(radius > 0.0, "domain radius must be positive");
        Self { radius }
    }

    pub fn rho(&self, zeta: &Triple<f64>) -> f64 {
        zeta[1].norm_sqr() - self.radius * self.radius * zeta[0].norm_sqr()
    }

    /// Chordal distance on the x-sphere from `x` to the circle `|x| = r`.
    pub fn chordal_distance_to_boundary(&self, x: C64) -> f64 {
        let a = x.norm();
        let r = self.radius;
        2.0 * (a - r).abs() / ((1.0 + a * a) * (1.0 + r * r)).sqrt()
    }
}

/// A point `(1, x, y)` in the chart with its unit-sphere representative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: C64,
    pub y: C64,
    pub lift: Triple<f64>,
}

/// `(1, x, y) / ‖(1, x, y)‖`.
pub fn lift_to_sphere(x: C64, y: C64) -> CurvePoint {
    CurvePoint {
        x,
        y,
        lift: normalize3(&affine_triple(x, y)),
    }
}

impl CurvePoint {
    /// From any homogeneous representative with `ζ0 ≠ 0`.
    pub fn from_homogeneous(zeta: &Triple<f64>) -> Option<Self> {
        if zeta[0].norm() == 0.0 {
            return None;
        }
        Some(lift_to_sphere(zeta[1] / zeta[0], zeta[2] / zeta[0]))
    }

    /// `ζ1/ζ0`
    pub fn ratio(&self) -> C64 {
        self.x
    }

    pub fn residual(&self, curve: &Curve) -> f64 {
        curve.eval(&self.lift).norm()
    }
}

/// Samples the curve over `|x| ≤ (1 + margin)·r` and returns the smallest
/// `|∇P|` at unit lifts; fails at the first point below `floor`.
pub fn check_smooth(curve: &Curve, domain: &DomainSpec, margin: f64, floor: f64) -> Result<f64, GeomError> {
    const RADII: usize = 12;
    const ANGLES: usize = 48;
    let mut min_grad = f64::INFINITY;
    for ri in 0..=RADII {
        let rad = domain.radius * (1.0 + margin) * ri as f64 / RADII as f64;
        let angles = if ri == 0 { 1 } else { ANGLES };
        for ai in 0..angles {
            let x = C64::from_polar(rad, std::f64::consts::TAU * ai as f64 / ANGLES as f64);
            let q = curve.y_polynomial(x);
            if q.degree().unwrap_or(0) == 0 {
                continue;
            }
            let roots = crate::poly::univariate_roots(&q, &crate::poly::RootOptions::default())?;
            for root in roots {
                let lift = lift_to_sphere(x, root.value).lift;
                let g = curve.grad_norm(&lift);
                min_grad = min_grad.min(g);
                if g < floor {
                    return Err(GeomError::Singular {
                        x,
                        y: root.value,
                        grad: g,
                    });
                }
            }
        }
    }
    Ok(min_grad)
}
