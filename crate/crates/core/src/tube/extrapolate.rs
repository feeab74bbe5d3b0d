use serde::Serialize;

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: C64,
    pub error_estimate: f64,
    /// Successive differences did not shrink; `value` is the last raw entry.
    pub non_monotone: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExtrapolationError {
    #[error("need at least two (ε, G) pairs, got {0}")]
    TooFew(usize),
    #[error("ε values must be strictly decreasing")]
    NotDecreasing,
}

/// Factor applied to the error estimate when the sequence is not converging.
pub const NON_MONOTONE_INFLATION: f64 = 10.0;

/// Richardson extrapolation to `ε = 0` assuming an expansion in powers of ε
/// (Neville's scheme on the polynomial through all points).
pub fn extrapolate(values: &[(f64, C64)]) -> Result<Extrapolated, ExtrapolationError> {
    let n = values.len();
    if n < 2 {
        return Err(ExtrapolationError::TooFew(n));
    }
    if values.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(ExtrapolationError::NotDecreasing);
    }
    let last = values[n - 1].1;
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    let monotone = diffs.windows(2).all(|d| d[1] <= d[0]);
    if !monotone {
        let spread = diffs.iter().cloned().fold(0.0, f64::max);
        return Ok(Extrapolated {
            value: last,
            error_estimate: NON_MONOTONE_INFLATION * spread,
            non_monotone: true,
        });
    }
    let eps: Vec<f64> = values.iter().map(|v| v.0).collect();
    let mut table: Vec<C64> = values.iter().map(|v| v.1).collect();
    for level in 1..n {
        for i in 0..n - level {
            let (ei, ej) = (eps[i], eps[i + level]);
            table[i] = (table[i + 1] * ei - table[i] * ej) / (ei - ej);
        }
    }
    let value = table[0];
    Ok(Extrapolated {
        value,
        error_estimate: (last - value).norm(),
        non_monotone: false,
    })
}
