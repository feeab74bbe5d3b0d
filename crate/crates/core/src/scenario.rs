//! Scenario files: schema, canonical digest, built-in references, validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::curve::{
    check_base_point, check_smooth, lift_to_sphere, pick_base_point, trace_boundary, BaseChoice, BaseOptions,
    BoundaryCache, Curve, CurvePoint, DomainSpec, IntersectionSet, TraceOptions,
};
use crate::kernel::FunctionSpec;
use crate::tube::{EpsSchedule, GridPolicy};
use crate::{Poly, C64};

pub const SCHEMA_VERSION: u32 = 1;

fn default_seed() -> u64 {
    0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePoint {
    pub x: C64,
    pub y: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub curve: Poly,
    pub radius: f64,
    pub f: FunctionSpec<f64>,
    pub w: AffinePoint,
    /// Explicit base point `c`; otherwise drawn from `seed`.
    #[serde(default)]
    pub base_point: Option<[C64; 3]>,
    #[serde(default)]
    pub eps_schedule: EpsSchedule,
    #[serde(default)]
    pub grid_policy: GridPolicy,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Overrides the recovery constant.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Multiply `f` by `ζ0^{−ℓ−1}` before integrating and undo it afterwards.
    #[serde(default)]
    pub reduce_homogeneity: bool,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::Schema(s.schema_version));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical JSON (sorted keys, defaults filled in).
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("scenario serialises");
        let text = serde_json::to_string(&value).expect("value serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The shipped reference scenarios: line, conic and Fermat cubic, each with
/// `f = 1/ζ0` and `f = ζ1/ζ0²`.
pub fn reference_scenarios() -> Vec<Scenario> {
    let curves: [(&str, Curve, AffinePoint, Option<[C64; 3]>); 3] = [
        (
            "line",
            Curve::line(),
            AffinePoint {
                x: c(0.1, 0.05),
                y: c(0.0, 0.0),
            },
            Some([c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)]),
        ),
        (
            "conic",
            Curve::conic(),
            AffinePoint {
                x: c(0.0, 0.0),
                y: c(0.0, 0.0),
            },
            Some([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]),
        ),
        (
            "fermat",
            Curve::fermat_cubic(),
            AffinePoint {
                x: c(0.0, 0.0),
                y: c(-1.0, 0.0),
            },
            None,
        ),
    ];
    let fs = [
        ("inv-z0", FunctionSpec::inv_z0()),
        ("z1-over-z0sq", FunctionSpec::z1_over_z0_squared()),
    ];
    let mut out = Vec::new();
    for (cname, curve, w, base) in &curves {
        for (fname, f) in &fs {
            out.push(Scenario {
                schema_version: SCHEMA_VERSION,
                name: format!("{cname}-{fname}"),
                curve: curve.poly().clone(),
                radius: 0.5,
                f: f.clone(),
                w: w.clone(),
                base_point: *base,
                eps_schedule: EpsSchedule::default(),
                grid_policy: GridPolicy::default(),
                seed: 0,
                kappa: None,
                reduce_homogeneity: false,
            });
        }
    }
    out
}

pub fn reference_scenario(name: &str) -> Option<Scenario> {
    reference_scenarios().into_iter().find(|s| s.name == name)
}

/// One named validation check with its measured values.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub scenario: String,
    pub digest: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Everything downstream stages need from a valid scenario.
#[derive(Clone, Debug)]
pub struct Validated {
    pub scenario: Scenario,
    pub digest: String,
    pub curve: Curve,
    pub domain: DomainSpec,
    pub w: CurvePoint,
    /// The function actually integrated (reduced when requested).
    pub f_integrated: FunctionSpec<f64>,
    /// Recovered values are multiplied by `ζ0^{back_exponent}`.
    pub back_exponent: i64,
    pub intersections: IntersectionSet,
    pub base_attempts: usize,
    pub report: ValidationReport,
}

/// Smallest `|∇P|` accepted by the smoothness sampling.
pub const SMOOTHNESS_FLOOR: f64 = 1e-8;
/// Relative radius beyond `r` covered by the smoothness sampling.
pub const SMOOTHNESS_MARGIN: f64 = 0.05;

/// Runs every check and reports each; returns the validated context only if
/// all of them pass.
pub fn validate(scenario: &Scenario, cache: Option<&BoundaryCache>) -> (ValidationReport, Option<Validated>) {
    let digest = scenario.digest();
    let mut rep = ValidationReport {
        scenario: scenario.name.clone(),
        digest: digest.clone(),
        checks: Vec::new(),
    };

    let curve = match Curve::new(scenario.curve.clone()) {
        Ok(c) => {
            rep.push("curve", true, format!("degree {}", c.degree()));
            c
        }
        Err(e) => {
            rep.push("curve", false, e.to_string());
            return (rep, None);
        }
    };
    if !(scenario.radius > 0.0 && scenario.radius.is_finite()) {
        rep.push("domain radius", false, format!("r = {}", scenario.radius));
        return (rep, None);
    }
    let domain = DomainSpec::new(scenario.radius);

    let ell = scenario.f.homogeneity();
    let (f_integrated, back_exponent) = if scenario.reduce_homogeneity {
        let (g, back) = scenario.f.reduce_to_minus_one();
        rep.push(
            "homogeneity must be negative",
            true,
            format!("ℓ = {ell}, reduced to −1 (back exponent {back})"),
        );
        (g, back)
    } else {
        rep.push("homogeneity must be negative", ell < 0, format!("ℓ = {ell}"));
        (scenario.f.clone(), 0)
    };

    let w = lift_to_sphere(scenario.w.x, scenario.w.y);
    let residual = w.residual(&curve);
    rep.push(
        "w off curve",
        residual <= crate::curve::ON_CURVE_TOL,
        format!("|P(w)| = {residual:e} at the unit lift"),
    );
    rep.push(
        "w inside domain",
        scenario.w.x.norm() < domain.radius,
        format!("|x| = {:.6}, r = {}", scenario.w.x.norm(), domain.radius),
    );

    match check_smooth(&curve, &domain, SMOOTHNESS_MARGIN, SMOOTHNESS_FLOOR) {
        Ok(g) => rep.push("smoothness", true, format!("min |∇P| = {g:.4e} over samples")),
        Err(e) => rep.push("smoothness", false, e.to_string()),
    }

    let n_t_max = scenario
        .eps_schedule
        .values()
        .iter()
        .map(|&e| scenario.grid_policy.grid_for(e).n_t)
        .max()
        .unwrap_or(scenario.grid_policy.base.n_t);
    let traced = match cache {
        Some(c) => c.load_or_trace(&curve, &domain, n_t_max, &TraceOptions::default()),
        None => trace_boundary(&curve, &domain, n_t_max, &TraceOptions::default()),
    };
    match traced {
        Ok(branches) => {
            let min_z0 = branches
                .iter()
                .flat_map(|b| (0..b.n_t()).map(move |j| lift_to_sphere(b.x(j), b.values[j]).lift[0].norm()))
                .fold(f64::INFINITY, f64::min);
            rep.push(
                "branch non-degeneracy",
                true,
                format!("{} branches over {n_t_max} nodes", branches.len()),
            );
            let ok = min_z0 >= BaseOptions::default().min_z0 || f_integrated.z0_power == 0;
            rep.push(
                "f holomorphic on the tube",
                ok,
                format!("min |ζ0| on the boundary = {min_z0:.4}"),
            );
        }
        Err(e) => rep.push("branch non-degeneracy", false, e.to_string()),
    }

    if !rep.passed() {
        return (rep, None);
    }

    let opts = BaseOptions::default();
    let chosen: Result<BaseChoice, _> = match &scenario.base_point {
        Some(cpt) => check_base_point(&curve, &domain, &w, cpt, &opts).map(|set| BaseChoice {
            seed: scenario.seed,
            attempts: 0,
            set,
            rejections: Vec::new(),
        }),
        None => pick_base_point(&curve, &domain, &w, scenario.seed, &opts),
    };
    let choice = match chosen {
        Ok(c) => c,
        Err(e) => {
            rep.push("base point", false, e.to_string());
            return (rep, None);
        }
    };
    let set = choice.set;
    rep.push(
        "base point",
        true,
        if choice.attempts == 0 {
            "explicit".to_string()
        } else {
            format!("seeded draw {} of seed {}", choice.attempts, choice.seed)
        },
    );
    rep.push(
        "Bezout count",
        set.points.len() == curve.degree() as usize,
        format!("|S(w)| = {}, d = {}", set.points.len(), curve.degree()),
    );
    let ratios = set.ratios();
    let mut min_sep = f64::INFINITY;
    for i in 0..ratios.len() {
        for j in i + 1..ratios.len() {
            min_sep = min_sep.min((ratios[i] - ratios[j]).norm());
        }
    }
    rep.push(
        "ratio distinctness",
        min_sep >= opts.min_ratio_separation,
        format!("min |r_i − r_j| = {min_sep:.4e}"),
    );
    let min_z0 = set
        .points
        .iter()
        .map(|p| p.lift[0].norm())
        .fold(f64::INFINITY, f64::min);
    let min_dist = set
        .points
        .iter()
        .map(|p| domain.chordal_distance_to_boundary(p.x))
        .fold(f64::INFINITY, f64::min);
    rep.push(
        "margins",
        min_z0 >= opts.min_z0 && min_dist >= opts.boundary_margin,
        format!("min |ζ0| = {min_z0:.4}, min chordal distance to |x| = r: {min_dist:.4}"),
    );
    if !rep.passed() {
        return (rep, None);
    }
    let validated = Validated {
        scenario: scenario.clone(),
        digest,
        curve,
        domain,
        w,
        f_integrated,
        back_exponent,
        intersections: set,
        base_attempts: choice.attempts,
        report: rep.clone(),
    };
    (rep, Some(validated))
}
