use num_complex::Complex;
use num_traits::Zero;

use super::{PolyError, UniPoly};
use crate::scalar::{AsScalar, Scalar};

#[derive(Clone, Copy, Debug)]
pub struct RootOptions<T> {
    pub max_iterations: usize,
    /// Relative step size at which the simultaneous iteration stops.
    pub step_tol: T,
    /// Roots closer than `separation · max(1, |root|)` are flagged as a cluster.
    pub separation: T,
}

impl<T: Scalar> Default for RootOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_tol: 1e-15.as_t(),
            separation: 1e-8.as_t(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root<T> {
    pub value: Complex<T>,
    /// Number of computed roots (including this one) inside its separation disc.
    pub multiplicity: usize,
}

impl<T> Root<T> {
    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1
    }
}

/// All `deg q` roots of `q` by Aberth–Ehrlich iteration followed by Newton polish.
pub fn univariate_roots<T: Scalar>(q: &UniPoly<T>, opts: &RootOptions<T>) -> Result<Vec<Root<T>>, PolyError> {
    let n = match q.degree() {
        Some(n) if n >= 1 => n,
        other => return Err(PolyError::ConstantPolynomial(other)),
    };
    let lead = q.leading().unwrap();
    let monic = q.scale(Complex::new(T::one(), T::zero()) / lead);
    let dq = monic.derivative();

    let mut z = initial_guesses(&monic, n);
    if n > 1 {
        let mut converged = false;
        for _ in 0..opts.max_iterations {
            let mut max_rel = T::zero();
            let mut all_backward_stable = true;
            for i in 0..n {
                let p = monic.eval(z[i]);
                if p.norm() <= backward_bound(&monic, z[i]) {
                    continue;
                }
                all_backward_stable = false;
                let ratio = p / dq.eval(z[i]);
                let repulsion = (0..n)
                    .filter(|&j| j != i)
                    .fold(Complex::zero(), |s, j| s + (z[i] - z[j]).inv());
                let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
                if !step.re.is_finite() || !step.im.is_finite() {
                    continue;
                }
                z[i] -= step;
                max_rel = max_rel.max(step.norm() / (T::one() + z[i].norm()));
            }
            if max_rel <= opts.step_tol || all_backward_stable {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(PolyError::NonConvergence {
                iterations: opts.max_iterations,
            });
        }
    } else {
        z[0] = -monic.coeffs()[0];
    }

    // Newton polish on the original coefficients; harmless for clustered roots
    // because a step is only accepted when it lowers the residual.
    let dq_raw = q.derivative();
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let p = q.eval(*zi);
            let d = dq_raw.eval(*zi);
            if d.is_zero() {
                break;
            }
            let cand = *zi - p / d;
            if q.eval(cand).norm() < p.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }

    // Computed copies of an m-fold root sit ~u^(1/m) apart, usually wider
    // than `separation`; a vanishing derivative widens the cluster disc.
    let wide: T = 1e-4.as_t();
    let roots = z
        .iter()
        .map(|&zi| {
            let scale = T::one().max(zi.norm());
            let mut radius = opts.separation * scale;
            if derivative_is_degenerate(&dq_raw, zi) {
                radius = radius.max(wide * scale);
            }
            let multiplicity = z.iter().filter(|&&zj| (zj - zi).norm() <= radius).count();
            Root {
                value: zi,
                multiplicity,
            }
        })
        .collect();
    Ok(roots)
}

/// Rounding-level residual bound `8n·u·Σ|a_k||z|^k` at `z`.
fn backward_bound<T: Scalar>(q: &UniPoly<T>, z: Complex<T>) -> T {
    let r = z.norm();
    let mag = q.coeffs().iter().rev().fold(T::zero(), |acc, c| acc * r + c.norm());
    let n = T::from_usize(q.coeffs().len()).unwrap();
    AsScalar::<T>::as_t(&8.0) * n * T::epsilon() * mag
}

fn derivative_is_degenerate<T: Scalar>(dq: &UniPoly<T>, z: Complex<T>) -> bool {
    let r = z.norm();
    let mag = dq.coeffs().iter().rev().fold(T::zero(), |acc, c| acc * r + c.norm());
    dq.eval(z).norm() <= T::epsilon().sqrt() * mag
}

fn initial_guesses<T: Scalar>(monic: &UniPoly<T>, n: usize) -> Vec<Complex<T>> {
    // Fujiwara-style bound on root moduli, then points on a circle with an
    // irrational phase offset so symmetric configurations are not hit exactly.
    let coeffs = monic.coeffs();
    let mut bound = T::zero();
    for (i, c) in coeffs.iter().take(n).enumerate() {
        let k = T::from_usize(n - i).unwrap();
        bound = bound.max(c.norm().powf(T::one() / k));
    }
    let radius = if bound > T::zero() { bound } else { T::one() };
    let offset: T = 0.4.as_t();
    (0..n)
        .map(|k| {
            let angle = T::TAU() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap() + offset;
            Complex::from_polar(radius, angle)
        })
        .collect()
}
