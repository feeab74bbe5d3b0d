use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{trace_boundary, BoundaryBranch, Curve, DomainSpec, GeomError, TraceOptions};

/// On-disk cache of traced boundary branches keyed by curve digest, radius
/// and node count.
#[derive(Clone, Debug)]
pub struct BoundaryCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    curve_digest: String,
    radius: f64,
    n_t: usize,
    branches: Vec<BoundaryBranch>,
}

impl BoundaryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File holding the trace for this key.
    pub fn entry_path(&self, curve: &Curve, radius: f64, n_t: usize) -> PathBuf {
        self.dir.join(format!(
            "boundary-{}-{:016x}-{n_t}.json",
            &curve.digest()[..16],
            radius.to_bits()
        ))
    }

    /// Returns cached branches when present and matching, tracing otherwise.
    pub fn load_or_trace(
        &self,
        curve: &Curve,
        domain: &DomainSpec,
        n_t: usize,
        opts: &TraceOptions,
    ) -> Result<Vec<BoundaryBranch>, GeomError> {
        let path = self.entry_path(curve, domain.radius, n_t);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(entry) = serde_json::from_str::<Entry>(&text) {
                if entry.curve_digest == curve.digest() && entry.radius == domain.radius && entry.n_t == n_t {
                    return Ok(entry.branches);
                }
            }
        }
        let branches = trace_boundary(curve, domain, n_t, opts)?;
        let entry = Entry {
            curve_digest: curve.digest().to_string(),
            radius: domain.radius,
            n_t,
            branches,
        };
        fs::create_dir_all(&self.dir).map_err(|e| GeomError::Cache(e.to_string()))?;
        let text = serde_json::to_string(&entry).map_err(|e| GeomError::Cache(e.to_string()))?;
        fs::write(&path, text).map_err(|e| GeomError::Cache(e.to_string()))?;
        Ok(entry.branches)
    }
}
