//! Scalar kernel evaluation: the Bochner–Martinelli denominator `B`, the line
//! barrier `F`, the 3×3 determinant kernel, and the `f` family.

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{CenteredHefer, HeferTriple, HomogPoly3};
use crate::scalar::{conj3, cross3, det3_columns, dot3, norm3, scale3, AsScalar, Scalar, Triple};

/// `f(ζ) = N(ζ) / ζ0^s`, homogeneous of degree `deg N − s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FunctionSpec<T> {
    pub numerator: HomogPoly3<T>,
    pub z0_power: u32,
}

impl<T: Scalar> FunctionSpec<T> {
    pub fn new(numerator: HomogPoly3<T>, z0_power: u32) -> Self {
        Self { numerator, z0_power }
    }

    /// `1/ζ0`
    pub fn inv_z0() -> Self {
        Self::new(HomogPoly3::from_real(0, &[([0, 0, 0], 1.0)]).unwrap(), 1)
    }

    /// `ζ1/ζ0²`
    pub fn z1_over_z0_squared() -> Self {
        Self::new(HomogPoly3::from_real(1, &[([0, 1, 0], 1.0)]).unwrap(), 2)
    }

    pub fn homogeneity(&self) -> i64 {
        self.numerator.degree() as i64 - self.z0_power as i64
    }

    pub fn eval(&self, zeta: &Triple<T>) -> Complex<T> {
        self.numerator.eval(zeta) / zeta[0].powu(self.z0_power)
    }

    /// Multiply by `ζ0^{−ℓ−1}` so the result has homogeneity −1.
    ///
    /// Returns the reduced spec and the exponent `ℓ + 1` by which recovered
    /// values must be multiplied back (`f = f_reduced · ζ0^{ℓ+1}`).
    pub fn reduce_to_minus_one(&self) -> (Self, i64) {
        let l = self.homogeneity();
        let s = self.numerator.degree() as i64 + 1;
        (Self::new(self.numerator.clone(), s as u32), l + 1)
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self::new(self.numerator.scaled(s), self.z0_power)
    }
}

/// `B(ζ, z) = Σ_j conj(ζ_j)(ζ_j − z_j)`.
pub fn bm_denominator<T: Scalar>(zeta: &Triple<T>, z: &Triple<T>) -> Complex<T> {
    (0..3).fold(Complex::zero(), |acc, j| acc + zeta[j].conj() * (zeta[j] - z[j]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Denominator {
    P,
    F,
    B,
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Denominator::P => "P",
            Denominator::F => "F",
            Denominator::B => "B",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("|{which}| = {magnitude:e} is below the floor {floor:e}")]
    SingularDenominator {
        which: Denominator,
        magnitude: f64,
        floor: f64,
    },
    #[error("barrier vector R = w × c vanishes (base point proportional to the center)")]
    ZeroBarrier,
    #[error("ζ0 vanishes at the evaluation point")]
    ZeroZ0,
}

/// Smallest admissible `|P|`, `|F|`, `|B|` at an evaluation point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct DenominatorFloors {
    pub p: f64,
    pub f: f64,
    pub b: f64,
}

impl Default for DenominatorFloors {
    fn default() -> Self {
        Self {
            p: 1e-13,
            f: 1e-10,
            b: 1e-10,
        }
    }
}

/// Kernel evaluation with the denominator moduli it saw.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue<T> {
    pub det: Complex<T>,
    pub abs_p: T,
    pub abs_f: T,
    pub abs_b: T,
}

/// Everything needed to evaluate the kernel columns for one center `w^(j)`.
#[derive(Clone, Debug)]
pub struct KernelContext<T> {
    curve: HomogPoly3<T>,
    q: CenteredHefer<T>,
    center: Triple<T>,
    barrier: Triple<T>,
    floors: DenominatorFloors,
}

impl<T: Scalar> KernelContext<T> {
    /// Barrier `R = center × base_point`, so `R·center = 0` and `F(ζ) = R·ζ`
    /// vanishes exactly on the projective line through the two points.
    pub fn new(
        curve: &HomogPoly3<T>,
        hefer: &HeferTriple<T>,
        center: Triple<T>,
        base_point: &Triple<T>,
    ) -> Result<Self, KernelError> {
        let barrier = cross3(&center, base_point);
        let tiny: T = 1e-14.as_t();
        if norm3(&barrier) <= tiny * norm3(&center) * norm3(base_point) {
            return Err(KernelError::ZeroBarrier);
        }
        Ok(Self {
            curve: curve.clone(),
            q: hefer.at_center(&center),
            center,
            barrier,
            floors: DenominatorFloors::default(),
        })
    }

    pub fn with_floors(mut self, floors: DenominatorFloors) -> Self {
        self.floors = floors;
        self
    }

    pub fn floors(&self) -> &DenominatorFloors {
        &self.floors
    }

    pub fn center(&self) -> &Triple<T> {
        &self.center
    }

    pub fn barrier_vector(&self) -> &Triple<T> {
        &self.barrier
    }

    pub fn hefer_column(&self, zeta: &Triple<T>) -> Triple<T> {
        self.q.eval(zeta)
    }

    /// `F(w, ζ) = R·(ζ − w) = R·ζ`.
    pub fn barrier(&self, zeta: &Triple<T>) -> Complex<T> {
        dot3(&self.barrier, zeta)
    }

    /// The three kernel columns `Q(ζ,w)/P(ζ)`, `R/F(w,ζ)`, `conj(ζ)/B(ζ,w)`.
    pub fn columns(&self, zeta: &Triple<T>) -> Result<[Triple<T>; 3], KernelError> {
        let p = self.curve.eval(zeta);
        self.columns_given_p(zeta, p).map(|(cols, _)| cols)
    }

    fn columns_given_p(&self, zeta: &Triple<T>, p: Complex<T>) -> Result<([Triple<T>; 3], [T; 3]), KernelError> {
        let f = self.barrier(zeta);
        let b = bm_denominator(zeta, &self.center);
        let mags = [p.norm(), f.norm(), b.norm()];
        let checks = [
            (Denominator::P, mags[0], self.floors.p),
            (Denominator::F, mags[1], self.floors.f),
            (Denominator::B, mags[2], self.floors.b),
        ];
        for (which, m, floor) in checks {
            let m64 = m.to_f64().unwrap();
            if m64.is_nan() || m64 < floor {
                return Err(KernelError::SingularDenominator {
                    which,
                    magnitude: m64,
                    floor,
                });
            }
        }
        let one = Complex::new(T::one(), T::zero());
        let cols = [
            scale3(one / p, &self.q.eval(zeta)),
            scale3(one / f, &self.barrier),
            scale3(one / b, &conj3(zeta)),
        ];
        Ok((cols, mags))
    }

    pub fn kernel_det(&self, zeta: &Triple<T>) -> Result<Complex<T>, KernelError> {
        let p = self.curve.eval(zeta);
        self.kernel_with_p(zeta, p).map(|v| v.det)
    }

    /// Kernel determinant with a precomputed `P(ζ)` (shared across centers).
    pub fn kernel_with_p(&self, zeta: &Triple<T>, p: Complex<T>) -> Result<KernelValue<T>, KernelError> {
        let (cols, mags) = self.columns_given_p(zeta, p)?;
        Ok(KernelValue {
            det: det3_columns(&cols[0], &cols[1], &cols[2]),
            abs_p: mags[0],
            abs_f: mags[1],
            abs_b: mags[2],
        })
    }

    /// `f(ζ)·(ζ1/ζ0)^k·det[...]`: the scalar paired with `dζ0∧dζ1∧dζ2`.
    pub fn g_integrand(&self, f: &FunctionSpec<T>, k: u32, zeta: &Triple<T>) -> Result<Complex<T>, KernelError> {
        if zeta[0].is_zero() {
            return Err(KernelError::ZeroZ0);
        }
        let det = self.kernel_det(zeta)?;
        Ok(f.eval(zeta) * (zeta[1] / zeta[0]).powu(k) * det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::normalize3;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn conic() -> HomogPoly3<f64> {
        HomogPoly3::from_real(2, &[([1, 0, 1], 1.0), ([0, 2, 0], -1.0)]).unwrap()
    }

    fn ctx(center: Triple<f64>, base: Triple<f64>) -> KernelContext<f64> {
        let p = conic();
        KernelContext::new(&p, &HeferTriple::decompose(&p), center, &base).unwrap()
    }

    #[test]
    fn b_examples() {
        let z = normalize3(&[c(0.3, 0.2), c(-0.5, 0.1), c(0.7, 0.0)]);
        assert!(bm_denominator(&z, &z).norm() < 1e-16);
        let zero = [C::zero(); 3];
        assert!((bm_denominator(&z, &zero) - c(1.0, 0.0)).norm() < 1e-15);
        let e0 = [c(1.0, 0.0), C::zero(), C::zero()];
        let e1 = [C::zero(), c(1.0, 0.0), C::zero()];
        assert_eq!(bm_denominator(&e0, &e1), c(1.0, 0.0));
    }

    #[test]
    fn barrier_vanishes_on_its_line() {
        let w = [c(1.0, 0.0), C::zero(), C::zero()];
        let base = [C::zero(), c(1.0, 0.0), c(1.0, 0.0)];
        let k = ctx(w, base);
        assert_eq!(k.barrier(&w), C::zero());
        assert_eq!(k.barrier(&base), C::zero());
        let other = normalize3(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(k.barrier(&other).norm() < 1e-15);
    }

    #[test]
    fn proportional_base_point_is_rejected() {
        let p = conic();
        let w = [c(1.0, 0.0), C::zero(), C::zero()];
        let err =
            KernelContext::new(&p, &HeferTriple::decompose(&p), w, &[c(2.0, 0.0), C::zero(), C::zero()]).unwrap_err();
        assert_eq!(err, KernelError::ZeroBarrier);
    }

    #[test]
    fn singular_denominator_reports_which() {
        let w = [c(1.0, 0.0), C::zero(), C::zero()];
        let k = ctx(w, [C::zero(), c(1.0, 0.0), c(1.0, 0.0)]);
        // ζ on the conic: P = 0.
        let on_curve = normalize3(&[c(1.0, 0.0), c(0.5, 0.0), c(0.25, 0.0)]);
        match k.kernel_det(&on_curve).unwrap_err() {
            KernelError::SingularDenominator { which, .. } => assert_eq!(which, Denominator::P),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn integrand_vanishes_for_k1_when_zeta1_is_zero() {
        let w = normalize3(&[c(1.0, 0.0), c(0.1, 0.0), c(0.01, 0.0)]);
        let k = ctx(w, [c(0.2, 0.1), c(1.0, 0.0), c(1.0, -0.5)]);
        let zeta = normalize3(&[c(1.0, 0.0), C::zero(), c(0.3, 0.2)]);
        let g = k.g_integrand(&FunctionSpec::inv_z0(), 1, &zeta).unwrap();
        assert_eq!(g, C::zero());
        let g0 = k.g_integrand(&FunctionSpec::inv_z0(), 0, &zeta).unwrap();
        let want = k.kernel_det(&zeta).unwrap() / zeta[0];
        assert!((g0 - want).norm() < 1e-15 * want.norm());
    }

    #[test]
    fn function_spec_homogeneity_and_reduction() {
        assert_eq!(FunctionSpec::<f64>::inv_z0().homogeneity(), -1);
        assert_eq!(FunctionSpec::<f64>::z1_over_z0_squared().homogeneity(), -1);
        let f = FunctionSpec::new(HomogPoly3::<f64>::from_real(2, &[([0, 2, 0], 1.0)]).unwrap(), 1);
        let (g, back) = f.reduce_to_minus_one();
        assert_eq!(g.homogeneity(), -1);
        assert_eq!(back, 2);
        let z = [c(0.8, 0.1), c(0.3, -0.2), c(0.1, 0.4)];
        let restored = g.eval(&z) * z[0].powi(back as i32);
        assert!((restored - f.eval(&z)).norm() < 1e-14);
    }

    #[test]
    fn function_spec_json_shape() {
        let f = FunctionSpec::<f64>::inv_z0();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["z0_power"], 1);
        assert_eq!(v["numerator"]["degree"], 0);
        let back: FunctionSpec<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }
}
