use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use super::homog::power_table;
use super::HomogPoly3;
use crate::scalar::{Scalar, Triple};

/// Sparse polynomial in the six variables `(ζ0, ζ1, ζ2, z0, z1, z2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T> {
    terms: BTreeMap<[u32; 6], Complex<T>>,
}

impl<T: Scalar> BiPoly<T> {
    fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    fn add_term(&mut self, exp: [u32; 6], coef: Complex<T>) {
        let slot = self.terms.entry(exp).or_insert_with(Complex::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 6], &Complex<T>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, zeta: &Triple<T>, z: &Triple<T>) -> Complex<T> {
        let d = self.max_total_degree() as usize;
        let pz = power_table(zeta, d);
        let pw = power_table(z, d);
        self.terms
            .iter()
            .map(|(e, &c)| {
                c * pz[0][e[0] as usize]
                    * pz[1][e[1] as usize]
                    * pz[2][e[2] as usize]
                    * pw[0][e[3] as usize]
                    * pw[1][e[4] as usize]
                    * pw[2][e[5] as usize]
            })
            .fold(Complex::zero(), |a, b| a + b)
    }
}

/// Coefficients `Q^i(ζ, z)` with `P(ζ) − P(z) = Σ_i Q^i(ζ, z)(ζ_i − z_i)`.
///
/// Built by telescoping in the order ζ0, ζ1, ζ2:
///
/// ```text
/// Q^0 = [P(ζ0,ζ1,ζ2) − P(z0,ζ1,ζ2)] / (ζ0 − z0)
/// Q^1 = [P(z0,ζ1,ζ2) − P(z0,z1,ζ2)] / (ζ1 − z1)
/// Q^2 = [P(z0,z1,ζ2) − P(z0,z1,z2)] / (ζ2 − z2)
/// ```
///
/// Each quotient is taken monomial by monomial with
/// `(a^k − b^k)/(a − b) = Σ_{i<k} a^i b^{k−1−i}`, so every `Q^i` is
/// bihomogeneous of total degree `d − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeferTriple<T> {
    degree: u32,
    q: [BiPoly<T>; 3],
}

impl<T: Scalar> HeferTriple<T> {
    pub fn decompose(p: &HomogPoly3<T>) -> Self {
        let mut q = [BiPoly::new(), BiPoly::new(), BiPoly::new()];
        for (e, &c) in p.terms() {
            let [a, b, cc] = *e;
            for i in 0..a {
                q[0].add_term([i, b, cc, a - 1 - i, 0, 0], c);
            }
            for i in 0..b {
                q[1].add_term([0, i, cc, a, b - 1 - i, 0], c);
            }
            for i in 0..cc {
                q[2].add_term([0, 0, i, a, b, cc - 1 - i], c);
            }
        }
        Self {
            degree: p.degree().saturating_sub(1),
            q,
        }
    }

    /// Total degree `d − 1` of each component.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[BiPoly<T>; 3] {
        &self.q
    }

    pub fn eval(&self, zeta: &Triple<T>, z: &Triple<T>) -> Triple<T> {
        [
            self.q[0].eval(zeta, z),
            self.q[1].eval(zeta, z),
            self.q[2].eval(zeta, z),
        ]
    }

    /// Freezes the second argument, giving `ζ ↦ Q(ζ, center)`.
    pub fn at_center(&self, center: &Triple<T>) -> CenteredHefer<T> {
        let d = self.degree as usize;
        let pw = power_table(center, d);
        let comps = std::array::from_fn(|i| {
            let mut merged: BTreeMap<[u32; 3], Complex<T>> = BTreeMap::new();
            for (e, &c) in self.q[i].terms() {
                let w = c * pw[0][e[3] as usize] * pw[1][e[4] as usize] * pw[2][e[5] as usize];
                *merged.entry([e[0], e[1], e[2]]).or_insert_with(Complex::zero) += w;
            }
            merged.into_iter().filter(|(_, c)| !c.is_zero()).collect()
        });
        CenteredHefer { degree: d, comps }
    }
}

/// `Q(·, w)` for a fixed center `w`: three (inhomogeneous) polynomials in ζ.
#[derive(Clone, Debug)]
pub struct CenteredHefer<T> {
    degree: usize,
    comps: [Vec<([u32; 3], Complex<T>)>; 3],
}

impl<T: Scalar> CenteredHefer<T> {
    pub fn eval(&self, zeta: &Triple<T>) -> Triple<T> {
        let pz = power_table(zeta, self.degree);
        std::array::from_fn(|i| {
            self.comps[i].iter().fold(Complex::zero(), |acc, (e, c)| {
                acc + *c * pz[0][e[0] as usize] * pz[1][e[1] as usize] * pz[2][e[2] as usize]
            })
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }
}
