use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Node counts in `(t, θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSize {
    pub n_t: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl GridSize {
    pub fn new(n_t: usize, n_theta: usize, n_phi: usize) -> Self {
        Self { n_t, n_theta, n_phi }
    }

    /// The same grid with one dimension doubled (`0` = t, `1` = θ, `2` = φ).
    pub fn doubled(self, axis: usize) -> Self {
        let mut g = self;
        match axis {
            0 => g.n_t *= 2,
            1 => g.n_theta *= 2,
            2 => g.n_phi *= 2,
            _ => panic!("axis must be 0, 1 or 2"),
        }
        g
    }
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n_t, self.n_theta, self.n_phi)
    }
}

impl FromStr for GridSize {
    type Err = String;

    /// `"64x16x64"`
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split('x').collect();
        if parts.len() != 3 {
            return Err(format!("grid must look like 64x16x64, got {s:?}"));
        }
        let mut n = [0usize; 3];
        for (slot, part) in n.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| format!("bad grid dimension {part:?}"))?;
            if *slot < 4 {
                return Err(format!("grid dimensions must be at least 4, got {slot}"));
            }
        }
        Ok(Self::new(n[0], n[1], n[2]))
    }
}

/// `N_t, N_θ ∝ ε^{-1/2}` from a reference grid at `reference_eps`, capped;
/// `N_φ` stays fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    pub reference_eps: f64,
    pub base: GridSize,
    pub cap: usize,
    /// Ignore ε and always use `base`.
    #[serde(default)]
    pub fixed: bool,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            reference_eps: 0.05,
            base: GridSize::new(64, 16, 64),
            cap: 512,
            fixed: false,
        }
    }
}

impl GridPolicy {
    pub fn fixed(size: GridSize) -> Self {
        Self {
            base: size,
            fixed: true,
            ..Self::default()
        }
    }

    pub fn grid_for(&self, eps: f64) -> GridSize {
        if self.fixed {
            return self.base;
        }
        let scale = (self.reference_eps / eps).sqrt();
        let grow = |n: usize| (((n as f64) * scale - 1e-9).ceil() as usize).clamp(4, self.cap.max(4));
        GridSize::new(grow(self.base.n_t), grow(self.base.n_theta), self.base.n_phi)
    }
}

/// Strictly decreasing positive ε values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EpsSchedule(Vec<f64>);

impl EpsSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self, String> {
        if values.is_empty() {
            return Err("ε schedule is empty".into());
        }
        if values.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err("ε values must be positive and finite".into());
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err("ε schedule must be strictly decreasing".into());
        }
        Ok(Self(values))
    }

    /// `ε0, ε0/2, …` with `n` entries.
    pub fn halving(eps0: f64, n: usize) -> Result<Self, String> {
        Self::new((0..n).map(|i| eps0 / f64::from(1u32 << i)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self(vec![0.05, 0.025, 0.0125])
    }
}

impl TryFrom<Vec<f64>> for EpsSchedule {
    type Error = String;
    fn try_from(v: Vec<f64>) -> Result<Self, String> {
        Self::new(v)
    }
}

impl From<EpsSchedule> for Vec<f64> {
    fn from(s: EpsSchedule) -> Self {
        s.0
    }
}
