use serde::Serialize;

use crate::kernel::FunctionSpec;
use crate::scalar::Triple;
use crate::C64;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultiFormulaCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub rel_gap: f64,
}

/// `2 f(w) + Σ_{j≥1} f(w^(j))` at the unit lifts; `lifts[0]` is `w`.
pub fn multiformula_lhs(f: &FunctionSpec<f64>, lifts: &[Triple<f64>]) -> C64 {
    let mut sum = f.eval(&lifts[0]) * 2.0;
    for z in &lifts[1..] {
        sum += f.eval(z);
    }
    sum
}

/// Compares the lhs against `rhs`, the single-center `k = 0` tube integral.
pub fn multiformula_check(f: &FunctionSpec<f64>, lifts: &[Triple<f64>], rhs: C64) -> MultiFormulaCheck {
    let lhs = multiformula_lhs(f, lifts);
    MultiFormulaCheck {
        lhs,
        rhs,
        rel_gap: (rhs - lhs).norm() / lhs.norm(),
    }
}
