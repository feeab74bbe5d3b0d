//! The end-to-end run: per-ε tube integrals, extrapolation, Vandermonde
//! recovery, truth comparison, constant audit and the reports on disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::curve::{trace_boundary, BoundaryBranch, BoundaryCache, TraceOptions};
use crate::kernel::KernelContext;
use crate::recovery::{
    constant_audit, kappa_closed_form, kappa_recount, multiformula_check, ConstantAudit, Hypothesis, MultiFormulaCheck,
    VandermondeSystem,
};
use crate::scalar::Triple;
use crate::scenario::Validated;
use crate::tube::{
    build_tube_grid, extrapolate, integrate, Diagnostics, EpsSchedule, GridSize, TubeIntegrals, TubeOptions,
};
use crate::C64;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[{stage}] {message}")]
    Stage { stage: &'static str, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("writing {path}: {message}")]
    Output { path: String, message: String },
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Run-time overrides on top of the scenario.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub grid: Option<GridSize>,
    pub eps: Option<EpsSchedule>,
    pub kappa: Option<f64>,
    /// Orientation of `(t, θ, φ)`; `None` uses +1.
    pub orientation: Option<f64>,
    pub cache: Option<BoundaryCache>,
    pub tube: TubeOptions,
}

impl RunOptions {
    fn schedule<'a>(&'a self, v: &'a Validated) -> &'a EpsSchedule {
        self.eps.as_ref().unwrap_or(&v.scenario.eps_schedule)
    }

    fn grid_for(&self, v: &Validated, eps: f64) -> GridSize {
        self.grid.unwrap_or_else(|| v.scenario.grid_policy.grid_for(eps))
    }

    fn orientation_sign(&self) -> f64 {
        self.orientation.unwrap_or(1.0)
    }
}

fn branches_for(
    v: &Validated,
    n_t: usize,
    cache: Option<&BoundaryCache>,
) -> Result<Vec<BoundaryBranch>, PipelineError> {
    match cache {
        Some(c) => c.load_or_trace(&v.curve, &v.domain, n_t, &TraceOptions::default()),
        None => trace_boundary(&v.curve, &v.domain, n_t, &TraceOptions::default()),
    }
    .map_err(stage("boundary"))
}

/// Kernel contexts for every center of `S(w)`, in `S(w)` order.
pub fn kernel_contexts(v: &Validated) -> Result<Vec<KernelContext<f64>>, PipelineError> {
    let base = v.intersections.base_point;
    v.intersections
        .points
        .iter()
        .map(|p| KernelContext::new(v.curve.poly(), v.curve.hefer(), p.lift, &base))
        .collect::<Result<_, _>>()
        .map_err(stage("kernel"))
}

/// Tube integrals `values[center][k]`, `k ≤ p`, at one ε and grid.
pub fn integrate_at(
    v: &Validated,
    eps: f64,
    size: GridSize,
    opts: &RunOptions,
) -> Result<TubeIntegrals, PipelineError> {
    let branches = branches_for(v, size.n_t, opts.cache.as_ref())?;
    let grid = build_tube_grid(&v.curve, &v.domain, &branches, eps, size, &opts.tube).map_err(stage("tube"))?;
    let contexts = kernel_contexts(v)?;
    integrate(
        &grid,
        &contexts,
        v.curve.poly(),
        &v.f_integrated,
        v.intersections.points.len(),
        opts.orientation_sign(),
    )
    .map_err(stage("integrate"))
}

#[derive(Clone, Debug, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub x: C64,
    pub y: C64,
    pub lift: Triple<f64>,
    pub mu: C64,
    pub ratio: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsRecord {
    pub eps: f64,
    pub grid: GridSize,
    /// `[center][k]`
    pub per_center: Vec<Vec<C64>>,
    pub g: Vec<C64>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    pub value: C64,
    /// `None` when the schedule has a single ε.
    pub error_estimate: Option<f64>,
    pub non_monotone: bool,
}

fn limit(seq: &[(f64, C64)]) -> LimitEstimate {
    if seq.len() < 2 {
        return LimitEstimate {
            value: seq[0].1,
            error_estimate: None,
            non_monotone: false,
        };
    }
    let e = extrapolate(seq).expect("schedule is validated as strictly decreasing");
    LimitEstimate {
        value: e.value,
        error_estimate: Some(e.error_estimate),
        non_monotone: e.non_monotone,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Orientation {
    pub sign: f64,
    pub source: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub report_schema_version: u32,
    pub artifact_version: &'static str,
    pub scenario: String,
    pub scenario_digest: String,
    pub curve_digest: String,
    pub degree: u32,
    pub homogeneity: i64,
    pub reduced_homogeneity: bool,
    pub p: usize,
    pub base_point: Triple<f64>,
    pub base_point_draws: usize,
    pub points: Vec<PointRecord>,
    pub vandermonde_ratio_convention: &'static str,
    pub vandermonde: Vec<Vec<C64>>,
    pub det_a: C64,
    pub per_eps: Vec<EpsRecord>,
    pub g: Vec<LimitEstimate>,
    pub single_center_g0: LimitEstimate,
    pub kappa: f64,
    pub kappa_source: &'static str,
    pub recovered: Vec<C64>,
    pub truth: Vec<C64>,
    pub rel_errors: Vec<f64>,
    pub audit: ConstantAudit,
    /// Recovery redone with the audit's constant, when it picks one.
    pub recovered_audit_kappa: Option<Vec<C64>>,
    pub rel_errors_audit_kappa: Option<Vec<f64>>,
    pub multiformula: MultiFormulaCheck,
    pub orientation: Orientation,
}

impl RecoveryReport {
    pub fn max_rel_error(&self) -> f64 {
        self.rel_errors.iter().cloned().fold(0.0, f64::max)
    }

    /// Pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Wall-clock data kept out of the report body.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub stage_ms: BTreeMap<String, f64>,
}

impl Timings {
    fn record(&mut self, name: impl Into<String>, since: Instant) {
        self.stage_ms.insert(name.into(), since.elapsed().as_secs_f64() * 1e3);
    }
}

fn rel_error(got: C64, want: C64) -> f64 {
    if want.norm() == 0.0 {
        got.norm()
    } else {
        (got - want).norm() / want.norm()
    }
}

/// The full recovery for a validated scenario.
pub fn run_recover(v: &Validated, opts: &RunOptions) -> Result<(RecoveryReport, Timings), PipelineError> {
    let mut timings = Timings::default();
    let set = &v.intersections;
    let p = set.p();
    let k_count = p + 1;
    let schedule = opts.schedule(v).clone();

    let mut per_eps = Vec::new();
    for &eps in schedule.values() {
        let started = Instant::now();
        let size = opts.grid_for(v, eps);
        let r = integrate_at(v, eps, size, opts)?;
        timings.record(format!("integrate eps={eps}"), started);
        per_eps.push(EpsRecord {
            eps,
            grid: size,
            g: r.g_all(),
            per_center: r.values,
            diagnostics: r.diagnostics,
        });
    }

    let g: Vec<LimitEstimate> = (0..k_count)
        .map(|k| limit(&per_eps.iter().map(|e| (e.eps, e.g[k])).collect::<Vec<_>>()))
        .collect();
    let single = limit(&per_eps.iter().map(|e| (e.eps, e.per_center[0][0])).collect::<Vec<_>>());

    let started = Instant::now();
    let sys = VandermondeSystem::from_ratios(set.ratios(), 1e-6).map_err(stage("vandermonde"))?;
    let (kappa, kappa_source) = match (opts.kappa, v.scenario.kappa) {
        (Some(k), _) => (k, "override"),
        (None, Some(k)) => (k, "scenario"),
        (None, None) => (kappa_closed_form(p), "(p+1)/(p+2)"),
    };
    let g_values: Vec<C64> = g.iter().map(|e| e.value).collect();
    let lifts = set.lifts();
    let back = |vals: Vec<C64>| -> Vec<C64> {
        vals.into_iter()
            .zip(&lifts)
            .map(|(val, z)| val * z[0].powi(v.back_exponent as i32))
            .collect()
    };
    let recovered = back(sys.recover_values(&g_values, kappa).map_err(stage("recover"))?);
    let truth: Vec<C64> = lifts.iter().map(|z| v.scenario.f.eval(z)).collect();
    let rel_errors: Vec<f64> = recovered.iter().zip(&truth).map(|(a, b)| rel_error(*a, *b)).collect();

    let f_int_truth: Vec<C64> = lifts.iter().map(|z| v.f_integrated.eval(z)).collect();
    let audit = constant_audit(&sys, &f_int_truth, &g_values).map_err(stage("audit"))?;
    let audit_kappa = match audit.verdict {
        Hypothesis::H1 => Some(kappa_closed_form(p)),
        Hypothesis::H2 => Some(kappa_recount(p)),
        Hypothesis::Neither => None,
    };
    let recovered_audit = match audit_kappa {
        Some(k) => Some(back(sys.recover_values(&g_values, k).map_err(stage("recover"))?)),
        None => None,
    };
    let rel_errors_audit = recovered_audit
        .as_ref()
        .map(|r| r.iter().zip(&truth).map(|(a, b)| rel_error(*a, *b)).collect());
    let multiformula = multiformula_check(&v.f_integrated, &lifts, single.value);
    timings.record("recover", started);

    let points = set
        .points
        .iter()
        .enumerate()
        .map(|(index, pt)| PointRecord {
            index,
            x: pt.x,
            y: pt.y,
            lift: pt.lift,
            mu: set.mu[index],
            ratio: pt.ratio(),
        })
        .collect();

    let report = RecoveryReport {
        report_schema_version: REPORT_SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION"),
        scenario: v.scenario.name.clone(),
        scenario_digest: v.digest.clone(),
        curve_digest: v.curve.digest().to_string(),
        degree: v.curve.degree(),
        homogeneity: v.scenario.f.homogeneity(),
        reduced_homogeneity: v.scenario.reduce_homogeneity,
        p,
        base_point: set.base_point,
        base_point_draws: v.base_attempts,
        points,
        vandermonde_ratio_convention: "A[i][j] = (ζ1/ζ0 of point j)^i, each point's own ratio",
        vandermonde: sys.matrix().rows(),
        det_a: sys.matrix().det_elimination(),
        per_eps,
        g,
        single_center_g0: single,
        kappa,
        kappa_source,
        recovered,
        truth,
        rel_errors,
        audit,
        recovered_audit_kappa: recovered_audit,
        rel_errors_audit_kappa: rel_errors_audit,
        multiformula,
        orientation: Orientation {
            sign: opts.orientation_sign(),
            source: if opts.orientation.is_some() { "given" } else { "default" },
        },
    };
    Ok((report, timings))
}

/// Outcome of fixing the orientation from a `p = 0` run.
#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub ratio: C64,
    pub sign: f64,
    /// `false` when `recovered/truth` is neither near `+1` nor near `−1`; the
    /// sign then stays `+1`.
    pub determinate: bool,
}

/// Relative window around `±1` accepted as a decisive calibration.
pub const CALIBRATION_WINDOW: f64 = 0.5;

pub fn calibrate_orientation(recovered: C64, truth: C64) -> Calibration {
    let ratio = recovered / truth;
    let plus = (ratio - 1.0).norm() <= CALIBRATION_WINDOW;
    let minus = (ratio + 1.0).norm() <= CALIBRATION_WINDOW;
    Calibration {
        ratio,
        sign: if minus { -1.0 } else { 1.0 },
        determinate: plus || minus,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub scenario_digest: String,
    pub artifact_version: &'static str,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub stage_ms: BTreeMap<String, f64>,
    pub cache_keys: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, bytes).map_err(|e| PipelineError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// `summary.csv`: one row per point of `S(w)`.
pub fn summary_csv(report: &RecoveryReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "point",
        "re_recovered",
        "im_recovered",
        "re_truth",
        "im_truth",
        "rel_error",
    ])
    .unwrap();
    for (i, ((r, t), e)) in report
        .recovered
        .iter()
        .zip(&report.truth)
        .zip(&report.rel_errors)
        .enumerate()
    {
        w.write_record([
            i.to_string(),
            r.re.to_string(),
            r.im.to_string(),
            t.re.to_string(),
            t.im.to_string(),
            e.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Writes `report.json`, `summary.csv` and `manifest.json` into `out`.
pub fn write_outputs(
    v: &Validated,
    report: &RecoveryReport,
    timings: &Timings,
    opts: &RunOptions,
    started_unix: f64,
    out: &Path,
) -> Result<Manifest, PipelineError> {
    fs::create_dir_all(out).map_err(|e| PipelineError::Output {
        path: out.display().to_string(),
        message: e.to_string(),
    })?;
    let report_path = out.join("report.json");
    let csv_path = out.join("summary.csv");
    let manifest_path = out.join("manifest.json");
    write_file(&report_path, report.to_json().as_bytes())?;
    write_file(&csv_path, summary_csv(report).as_bytes())?;
    let cache_keys = match &opts.cache {
        Some(c) => report
            .per_eps
            .iter()
            .map(|e| {
                c.entry_path(&v.curve, v.domain.radius, e.grid.n_t)
                    .display()
                    .to_string()
            })
            .collect(),
        None => Vec::new(),
    };
    let manifest = Manifest {
        scenario: v.scenario.name.clone(),
        scenario_digest: v.digest.clone(),
        artifact_version: env!("CARGO_PKG_VERSION"),
        started_unix,
        finished_unix: unix_now(),
        stage_ms: timings.stage_ms.clone(),
        cache_keys,
        outputs: [&report_path, &csv_path, &manifest_path]
            .iter()
            .map(|p: &&PathBuf| p.display().to_string())
            .collect(),
    };
    write_file(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serialises")
            .as_bytes(),
    )?;
    Ok(manifest)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub n_t: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub k: usize,
    pub re_g: f64,
    pub im_g: f64,
    pub min_abs_f: f64,
    pub min_p_slack: f64,
    pub runtime_ms: f64,
    /// `base`, `t2`, `theta2` or `phi2`.
    pub variant: &'static str,
    /// `|G − G_base| / |G_base|` at the same ε (0 for the base row).
    pub rel_change_vs_base: f64,
    /// `|G_base(ε) − G_base(previous ε)|`; empty for the first ε.
    pub delta_prev_eps: Option<f64>,
}

const VARIANTS: [(&str, Option<usize>); 4] = [("base", None), ("t2", Some(0)), ("theta2", Some(1)), ("phi2", Some(2))];

/// G_k over the ε list, each ε at its base grid and with each dimension
/// doubled once.
pub fn run_convergence(v: &Validated, eps: &[f64], opts: &RunOptions) -> Result<Vec<ConvergenceRow>, PipelineError> {
    if eps.is_empty() {
        return Err(PipelineError::Usage("the ε list is empty".into()));
    }
    EpsSchedule::new(eps.to_vec()).map_err(PipelineError::Usage)?;
    let k_count = v.intersections.points.len();
    let mut rows = Vec::new();
    let mut prev_base: Option<Vec<C64>> = None;
    for &e in eps {
        let base_size = opts.grid_for(v, e);
        let mut base_g: Vec<C64> = Vec::new();
        for (name, axis) in VARIANTS {
            let size = axis.map_or(base_size, |a| base_size.doubled(a));
            let started = Instant::now();
            let r = integrate_at(v, e, size, opts)?;
            let ms = started.elapsed().as_secs_f64() * 1e3;
            let g = r.g_all();
            if axis.is_none() {
                base_g = g.clone();
            }
            for k in 0..k_count {
                rows.push(ConvergenceRow {
                    eps: e,
                    n_t: size.n_t,
                    n_theta: size.n_theta,
                    n_phi: size.n_phi,
                    k,
                    re_g: g[k].re,
                    im_g: g[k].im,
                    min_abs_f: r.diagnostics.min_abs_f,
                    min_p_slack: r.diagnostics.min_p_slack,
                    runtime_ms: ms,
                    variant: name,
                    rel_change_vs_base: rel_error(g[k], base_g[k]),
                    delta_prev_eps: if axis.is_none() {
                        prev_base.as_ref().map(|pg| (g[k] - pg[k]).norm())
                    } else {
                        None
                    },
                });
            }
        }
        prev_base = Some(base_g);
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_windows() {
        let c = calibrate_orientation(C64::new(-0.9, 0.05), C64::new(1.0, 0.0));
        assert!(c.determinate);
        assert_eq!(c.sign, -1.0);
        let c = calibrate_orientation(C64::new(1e-6, 0.0), C64::new(1.0, 0.0));
        assert!(!c.determinate);
        assert_eq!(c.sign, 1.0);
    }
}
