use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{PolyError, UniPoly};
use crate::scalar::{cross3, norm3, AsScalar, Scalar, Triple};

/// Sparse homogeneous polynomial in `(ζ0, ζ1, ζ2)`.
///
/// Every stored exponent triple sums to `degree` and no stored coefficient is
/// zero, so structural equality is polynomial equality.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogPoly3<T> {
    degree: u32,
    terms: BTreeMap<[u32; 3], Complex<T>>,
}

impl<T: Scalar> HomogPoly3<T> {
    pub fn zero(degree: u32) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Collects terms, merging repeated exponents and dropping zero sums.
    pub fn from_terms<I>(degree: u32, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = ([u32; 3], Complex<T>)>,
    {
        let mut map: BTreeMap<[u32; 3], Complex<T>> = BTreeMap::new();
        for (exp, coef) in terms {
            if exp.iter().sum::<u32>() != degree {
                return Err(PolyError::ExponentMismatch { exp, degree });
            }
            *map.entry(exp).or_insert_with(Complex::zero) += coef;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Self { degree, terms: map })
    }

    /// Shorthand for real-coefficient polynomials: `[(exp, coef), ..]`.
    pub fn from_real(degree: u32, terms: &[([u32; 3], f64)]) -> Result<Self, PolyError> {
        Self::from_terms(
            degree,
            terms.iter().map(|&(e, c)| (e, Complex::new(c.as_t(), T::zero()))),
        )
    }

    pub fn monomial(exp: [u32; 3], coef: Complex<T>) -> Self {
        let degree = exp.iter().sum();
        Self::from_terms(degree, [(exp, coef)]).expect("monomial exponent sums to its degree")
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: [u32; 3]) -> Complex<T> {
        self.terms.get(&exp).copied().unwrap_or_else(Complex::zero)
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> T {
        self.terms.values().fold(T::zero(), |s, c| s + c.norm())
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self::from_terms(self.degree, self.terms.iter().map(|(&e, &c)| (e, c * s)))
            .expect("scaling preserves exponents")
    }

    pub fn eval(&self, pt: &Triple<T>) -> Complex<T> {
        let pows = power_table(pt, self.degree as usize);
        self.terms
            .iter()
            .map(|(e, &c)| c * pows[0][e[0] as usize] * pows[1][e[1] as usize] * pows[2][e[2] as usize])
            .fold(Complex::zero(), |a, b| a + b)
    }

    /// `∂/∂ζ_axis`; a degree-0 input yields the zero polynomial.
    pub fn partial(&self, axis: usize) -> Self {
        assert!(axis < 3, "axis must be 0, 1 or 2");
        if self.degree == 0 {
            return Self::zero(0);
        }
        Self::from_terms(
            self.degree - 1,
            self.terms.iter().filter(|(e, _)| e[axis] > 0).map(|(e, &c)| {
                let mut e2 = *e;
                e2[axis] -= 1;
                (e2, c * T::from_u32(e[axis]).unwrap())
            }),
        )
        .expect("derivative of a homogeneous polynomial is homogeneous")
    }

    pub fn gradient(&self) -> [Self; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    /// Coefficients of `μ ↦ P(base + μ·dir)`, assembled term by term.
    ///
    /// Fails with [`PolyError::DegreeDrop`] when `P(dir)` vanishes (relative to
    /// the coefficient scale), i.e. the line meets the curve at infinity.
    pub fn restrict_to_line(&self, base: &Triple<T>, dir: &Triple<T>) -> Result<UniPoly<T>, PolyError> {
        let par = norm3(&cross3(base, dir));
        let tiny: T = 1e-12.as_t();
        if par <= tiny * norm3(base) * norm3(dir) {
            return Err(PolyError::ProportionalDirection);
        }
        let q = self.expand_along(base, dir);
        let d = self.degree as usize;
        let lead = self.eval(dir);
        let scale = self.l1_norm() * norm3(dir).powi(self.degree as i32);
        if lead.norm() <= tiny * scale {
            let scale_all = self.l1_norm() * (norm3(base) + norm3(dir)).powi(self.degree as i32);
            let truncated = q.truncate_below(tiny * scale_all);
            return Err(PolyError::DegreeDrop {
                expected: d,
                actual: truncated.degree(),
            });
        }
        Ok(q)
    }

    /// `y ↦ P(1, x, y)` for fixed `x`, with no degree bookkeeping.
    pub fn affine_in_y(&self, x: Complex<T>) -> UniPoly<T> {
        let one = Complex::one();
        let zero = Complex::zero();
        self.expand_along(&[one, x, zero], &[zero, zero, one])
    }

    fn expand_along(&self, base: &Triple<T>, dir: &Triple<T>) -> UniPoly<T> {
        let d = self.degree;
        let lines: Vec<UniPoly<T>> = (0..3).map(|i| UniPoly::linear(base[i], dir[i])).collect();
        // Powers of each linear factor up to the degree, shared by all terms.
        let pow_tables: Vec<Vec<UniPoly<T>>> = lines
            .iter()
            .map(|l| {
                let mut v = vec![UniPoly::constant(Complex::one())];
                for k in 1..=d as usize {
                    let next = v[k - 1].mul(l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = UniPoly::zero();
        for (e, &c) in &self.terms {
            let term = pow_tables[0][e[0] as usize]
                .mul(&pow_tables[1][e[1] as usize])
                .mul(&pow_tables[2][e[2] as usize])
                .scale(c);
            out = out.add(&term);
        }
        out
    }
}

pub(crate) fn power_table<T: Scalar>(pt: &Triple<T>, degree: usize) -> [Vec<Complex<T>>; 3] {
    let row = |z: Complex<T>| {
        let mut v = Vec::with_capacity(degree + 1);
        v.push(Complex::one());
        for k in 1..=degree {
            let next = v[k - 1] * z;
            v.push(next);
        }
        v
    };
    [row(pt[0]), row(pt[1]), row(pt[2])]
}
