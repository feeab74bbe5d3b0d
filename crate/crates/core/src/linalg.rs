//! Small dense complex matrices: two independent determinant routes.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Complex<T>>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).fold(Complex::zero(), |s, j| s + self[(i, j)] * v[j]))
            .collect()
    }

    /// Copy with column `k` replaced by `col`.
    pub fn with_column(&self, k: usize, col: &[Complex<T>]) -> Self {
        let mut m = self.clone();
        for (i, &c) in col.iter().enumerate() {
            m[(i, k)] = c;
        }
        m
    }

    /// Product of column Euclidean norms: Hadamard bound on `|det|`.
    pub fn hadamard_bound(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).fold(T::zero(), |s, i| s + self[(i, j)].norm_sqr()).sqrt())
            .fold(T::one(), |a, b| a * b)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det_elimination(&self) -> Complex<T> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Complex::<T>::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .norm()
                        .partial_cmp(&a[j * n + col].norm())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot * n + col].is_zero() {
                return Complex::zero();
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for i in col + 1..n {
                let factor = a[i * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[i * n + j] -= factor * v;
                }
            }
        }
        det
    }

    /// Determinant by Laplace expansion along the first row.
    ///
    /// Factorial cost; intended as a cross-check for `n ≤ 5`.
    pub fn det_cofactor(&self) -> Complex<T> {
        let idx: Vec<usize> = (0..self.n).collect();
        self.laplace(&idx, 0)
    }

    fn laplace(&self, cols: &[usize], row: usize) -> Complex<T> {
        match cols.len() {
            0 => Complex::one(),
            1 => self[(row, cols[0])],
            _ => {
                let mut acc = Complex::zero();
                for (pos, &c) in cols.iter().enumerate() {
                    let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = self[(row, c)] * self.laplace(&rest, row + 1);
                    if pos % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                acc
            }
        }
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}
