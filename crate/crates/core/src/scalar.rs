use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type underlying the complex arithmetic of the algebra layer.
///
/// Implemented for `f32` and `f64`. Geometry and quadrature are written for
/// `f64` only; their tolerances assume double precision.
pub trait Scalar:
    'static + Float + FloatConst + FromPrimitive + NumAssign + Default + Send + Sync + Debug + Display + LowerExp
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convenience conversion of primitive constants into a [`Scalar`].
pub trait AsScalar<T> {
    fn as_t(&self) -> T;
}

impl<T: Scalar> AsScalar<T> for f64 {
    #[inline]
    fn as_t(&self) -> T {
        T::from_f64(*self).unwrap()
    }
}

impl<T: Scalar> AsScalar<T> for usize {
    #[inline]
    fn as_t(&self) -> T {
        T::from_usize(*self).unwrap()
    }
}

impl<T: Scalar> AsScalar<T> for u32 {
    #[inline]
    fn as_t(&self) -> T {
        T::from_u32(*self).unwrap()
    }
}

/// A point of C³ in homogeneous coordinates.
pub type Triple<T> = [Complex<T>; 3];

/// Hermitian norm of a triple.
pub fn norm3<T: Scalar>(v: &Triple<T>) -> T {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}

/// Bilinear (non-conjugating) dot product.
#[inline]
pub fn dot3<T: Scalar>(a: &Triple<T>, b: &Triple<T>) -> Complex<T> {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Complex cross product `a × b`; satisfies `dot3(a × b, a) = 0`.
pub fn cross3<T: Scalar>(a: &Triple<T>, b: &Triple<T>) -> Triple<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Determinant of the 3×3 matrix whose columns are `a`, `b`, `c`.
#[inline]
pub fn det3_columns<T: Scalar>(a: &Triple<T>, b: &Triple<T>, c: &Triple<T>) -> Complex<T> {
    dot3(a, &cross3(b, c))
}

pub fn scale3<T: Scalar>(s: Complex<T>, v: &Triple<T>) -> Triple<T> {
    [s * v[0], s * v[1], s * v[2]]
}

pub fn conj3<T: Scalar>(v: &Triple<T>) -> Triple<T> {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

/// `v / ‖v‖`.
pub fn normalize3<T: Scalar>(v: &Triple<T>) -> Triple<T> {
    let n = norm3(v);
    let inv = Complex::new(T::one() / n, T::zero());
    scale3(inv, v)
}
