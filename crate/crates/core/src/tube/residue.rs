use std::f64::consts::TAU;

use crate::kernel::FunctionSpec;
use crate::scalar::Triple;
use crate::C64;

/// Trapezoid node count: the rule converges like `(1−δ)^N`.
pub fn residue_nodes(delta: f64) -> usize {
    ((40.0 / delta).ceil() as usize).max(64)
}

/// `(1/2πi)∮_{|μ|=1} f(μ·pt) d(μ·pt0) / (μ·pt0 − (1−δ)·pt0)` by the periodic
/// trapezoid rule in `arg μ`.
///
/// Panics unless `0 < δ < 0.5`.
pub fn residue_line_check(f: &FunctionSpec<f64>, pt: &Triple<f64>, delta: f64) -> C64 {
    assert!(delta > 0.0 && delta < 0.5, "δ must lie in (0, 0.5)");
    let n = residue_nodes(delta);
    let a = pt[0] * (1.0 - delta);
    let terms: Vec<C64> = (0..n)
        .map(|m| {
            let mu = C64::from_polar(1.0, TAU * m as f64 / n as f64);
            let z = [pt[0] * mu, pt[1] * mu, pt[2] * mu];
            // d(μ pt0) = pt0 · iμ dα; the 1/(2πi) and 2π/N leave iμ·pt0/(iN)
            f.eval(&z) * mu * pt[0] / (mu * pt[0] - a)
        })
        .collect();
    super::pairwise_sum(&terms) / n as f64
}
