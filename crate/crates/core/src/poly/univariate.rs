use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Scalar;

/// Dense univariate complex polynomial, coefficients lowest degree first.
///
/// Trailing exact zeros are trimmed, so the stored leading coefficient is
/// nonzero; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> UniPoly<T> {
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(vec![c])
    }

    /// `a + b·μ`
    pub fn linear(a: Complex<T>, b: Complex<T>) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<Complex<T>> {
        self.coeffs.last().copied()
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, mu: Complex<T>) -> Complex<T> {
        self.coeffs.iter().rev().fold(Complex::zero(), |acc, &c| acc * mu + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * T::from_usize(i).unwrap())
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Complex<T>], i: usize| v.get(i).copied().unwrap_or_else(Complex::zero);
        Self::new((0..n).map(|i| get(&self.coeffs, i) + get(&other.coeffs, i)).collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn powu(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(Complex::new(T::one(), T::zero())), |acc, _| {
            acc.mul(self)
        })
    }

    /// Quotient by `(μ − root)`, discarding the remainder.
    pub fn deflate(&self, root: Complex<T>) -> Self {
        let n = match self.degree() {
            None | Some(0) => return Self::zero(),
            Some(n) => n,
        };
        let mut q = vec![Complex::zero(); n];
        let mut carry = Complex::zero();
        for i in (0..n).rev() {
            carry = self.coeffs[i + 1] + carry * root;
            q[i] = carry;
        }
        Self::new(q)
    }

    /// Drop leading coefficients whose modulus is at most `tol`.
    pub fn truncate_below(&self, tol: T) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= tol) {
            coeffs.pop();
        }
        Self { coeffs }
    }
}
