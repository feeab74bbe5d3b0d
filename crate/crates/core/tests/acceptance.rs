//! Acceptance suite: one PASS/FAIL line per criterion, each checked at its
//! stated tolerance and runtime budget. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use curvecauchy::curve::{intersect_line, lift_to_sphere, Curve};
use curvecauchy::kernel::FunctionSpec;
use curvecauchy::pipeline::{calibrate_orientation, integrate_at, run_recover, Calibration, RunOptions};
use curvecauchy::poly::{univariate_roots, HomogPoly3, RootOptions};
use curvecauchy::recovery::{kappa_closed_form, kappa_recount, Hypothesis};
use curvecauchy::scalar::{det3_columns, normalize3, Triple};
use curvecauchy::scenario::{reference_scenario, reference_scenarios, validate, Validated};
use curvecauchy::tube::{residue_line_check, GridPolicy};
use curvecauchy::{Hefer, Poly, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn rand_triple(rng: &mut ChaCha8Rng) -> Triple<f64> {
    [rand_c(rng), rand_c(rng), rand_c(rng)]
}

fn random_poly(rng: &mut ChaCha8Rng, degree: u32) -> Poly {
    let mut terms = Vec::new();
    for a in 0..=degree {
        for b in 0..=degree - a {
            if rng.gen_bool(0.7) {
                terms.push(([a, b, degree - a - b], rand_c(rng)));
            }
        }
    }
    if terms.is_empty() {
        terms.push(([degree, 0, 0], C64::new(1.0, 0.0)));
    }
    HomogPoly3::from_terms(degree, terms).unwrap()
}

fn validated(name: &str) -> Validated {
    let s = reference_scenario(name).unwrap();
    let (rep, v) = validate(&s, None);
    v.unwrap_or_else(|| panic!("{name} rejected: {:?}", rep.failures()))
}

/// Orientation fixed once from the d=1 recovery and reused afterwards.
fn calibration() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(|| {
        let v = validated("line-inv-z0");
        let (rep, _) = run_recover(&v, &RunOptions::default()).expect("line recovery runs");
        calibrate_orientation(rep.recovered[0], rep.truth[0])
    })
}

fn calibrated_options() -> RunOptions {
    RunOptions {
        orientation: Some(calibration().sign),
        ..RunOptions::default()
    }
}

/// Hefer identity and homogeneity on random polynomials of degree ≤ 4.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e_f3);
    let mut worst_identity = 0.0f64;
    let mut worst_homog = 0.0f64;
    let mut bad_degree = 0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=4);
        let p = random_poly(&mut rng, d);
        let h = Hefer::decompose(&p);
        for comp in h.components() {
            if comp.terms().any(|(e, _)| e.iter().sum::<u32>() != d - 1) {
                bad_degree += 1;
            }
        }
        let zeta = rand_triple(&mut rng);
        let z = rand_triple(&mut rng);
        let q = h.eval(&zeta, &z);
        let rhs: C64 = (0..3).map(|i| q[i] * (zeta[i] - z[i])).sum();
        worst_identity = worst_identity.max((p.eval(&zeta) - p.eval(&z) - rhs).norm());
        let lam = rand_c(&mut rng);
        let scaled = h.eval(&zeta.map(|c| c * lam), &z.map(|c| c * lam));
        for i in 0..3 {
            let want = q[i] * lam.powu(d - 1);
            worst_homog = worst_homog.max((scaled[i] - want).norm());
        }
    }
    let el = start.elapsed();
    outcome(
        worst_identity <= 1e-10 && worst_homog <= 1e-10 && bad_degree == 0 && within(el, 5.0),
        format!(
            "max identity residual {worst_identity:.2e}, max homogeneity residual {worst_homog:.2e}, \
             {bad_degree} mis-degree components, {:.2} s",
            el.as_secs_f64()
        ),
    )
}

/// Bezout count, on-curve residuals, collinearity and simplicity for random w.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe_20);
    let r = 0.5;
    let mut failures = Vec::new();
    let (mut worst_p, mut worst_det) = (0.0f64, 0.0f64);
    for curve in [Curve::line(), Curve::conic(), Curve::fermat_cubic()] {
        let d = curve.degree() as usize;
        for trial in 0..20 {
            let x = C64::from_polar(
                r * rng.gen_range(0.0f64..0.9).sqrt(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let ys = univariate_roots(&curve.y_polynomial(x), &RootOptions::default()).unwrap();
            let y = ys[rng.gen_range(0..ys.len())].value;
            let w = lift_to_sphere(x, y);
            let c = loop {
                let c = rand_triple(&mut rng);
                if curve.eval(&normalize3(&c)).norm() > 1e-6 {
                    break c;
                }
            };
            match intersect_line(&curve, &w, &c, 0.0) {
                Ok(set) => {
                    if set.points.len() != d {
                        failures.push(format!("d={d} trial {trial}: |S(w)| = {}", set.points.len()));
                    }
                    let cu = normalize3(&c);
                    for pt in &set.points {
                        worst_p = worst_p.max(curve.eval(&pt.lift).norm());
                        worst_det = worst_det.max(det3_columns(&w.lift, &cu, &pt.lift).norm());
                    }
                    let q = curve.poly().restrict_to_line(&w.lift, &c).unwrap();
                    let roots = univariate_roots(&q, &RootOptions::default()).unwrap();
                    if roots.iter().any(|r| !r.is_simple()) || roots.len() != d {
                        failures.push(format!("d={d} trial {trial}: non-simple roots"));
                    }
                }
                Err(e) => failures.push(format!("d={d} trial {trial}: {e}")),
            }
        }
    }
    let el = start.elapsed();
    let ok = failures.is_empty() && worst_p <= 1e-10 && worst_det <= 1e-10 && within(el, 5.0);
    outcome(
        ok,
        format!(
            "max |P(w^(j))| {worst_p:.2e}, max line determinant {worst_det:.2e}, {} failures{}, {:.2} s",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
            el.as_secs_f64()
        ),
    )
}

/// One-dimensional contour check at δ = 1e−4 against direct evaluation.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let delta = 1e-4;
    let conic = validated("conic-inv-z0");
    let mut pts: Vec<Triple<f64>> = conic.intersections.lifts();
    pts.push(validated("line-inv-z0").w.lift);
    let mut worst = 0.0f64;
    for f in [FunctionSpec::inv_z0(), FunctionSpec::z1_over_z0_squared()] {
        for pt in &pts {
            let got = residue_line_check(&f, pt, delta);
            let want = f.eval(&pt.map(|c| c * (1.0 - delta)));
            let rel = (got - want).norm() / want.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(if want.norm() == 0.0 { got.norm() } else { rel });
        }
    }
    let el = start.elapsed();
    outcome(
        worst <= 1e-8 && within(el, 1.0),
        format!(
            "max relative deviation {worst:.3e} (tol 1e-8), {:.3} s",
            el.as_secs_f64()
        ),
    )
}

/// d = 1 recovery of 1/ζ0 on the line scenario with default schedule and grids.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let v = validated("line-inv-z0");
    let cal = calibration();
    let (rep, _) = match run_recover(&v, &calibrated_options()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline error: {e}")),
    };
    let el = start.elapsed();
    let rel = rep.rel_errors[0];
    outcome(
        rel <= 1e-2 && within(el, 60.0),
        format!(
            "recovered {:.6e}, truth {:.6e}, rel. error {rel:.3e} (tol 1e-2); orientation sign {} ({}), \
             extrapolation error {:.2e}, cancellation {:.2e}, {:.2} s",
            rep.recovered[0],
            rep.truth[0],
            cal.sign,
            if cal.determinate {
                "calibrated"
            } else {
                "indeterminate, default"
            },
            rep.g[0].error_estimate.unwrap_or(f64::NAN),
            rep.per_eps.last().unwrap().diagnostics.cancellation[0][0],
            el.as_secs_f64()
        ),
    )
}

/// Single-center k = 0 tube integral against 2f(w) + f(w^(1)) on the conic.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let v = validated("conic-inv-z0");
    let (rep, _) = match run_recover(&v, &calibrated_options()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline error: {e}")),
    };
    let el = start.elapsed();
    let target = 2.0 + 3f64.sqrt();
    let lhs_ok = (rep.multiformula.lhs - C64::new(target, 0.0)).norm() <= 1e-12;
    outcome(
        lhs_ok && rep.multiformula.rel_gap <= 1e-2 && within(el, 300.0),
        format!(
            "lhs {:.12} (target 2+√3 = {target:.12}), rhs {:.6e}, rel. gap {:.3e} (tol 1e-2), {:.2} s",
            rep.multiformula.lhs.re,
            rep.multiformula.rhs,
            rep.multiformula.rel_gap,
            el.as_secs_f64()
        ),
    )
}

/// d = 2 recovery of both values with the audit-selected constant.
fn criterion_6() -> Outcome {
    let start = Instant::now();
    let v = validated("conic-inv-z0");
    let (rep, _) = match run_recover(&v, &calibrated_options()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline error: {e}")),
    };
    let el = start.elapsed();
    let fmt = |e: &[f64]| e.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    match &rep.rel_errors_audit_kappa {
        Some(errs) => {
            let worst = errs.iter().cloned().fold(0.0, f64::max);
            outcome(
                worst <= 1e-2 && within(el, 600.0),
                format!(
                    "audit κ rel. errors [{}] (tol 1e-2), {:.2} s",
                    fmt(errs),
                    el.as_secs_f64()
                ),
            )
        }
        None => outcome(
            false,
            format!(
                "audit selected no constant; with κ = {:.4}: recovered [{:.3e}, {:.3e}] vs truth [{:.3e}, {:.3e}], \
                 rel. errors [{}], {:.2} s",
                rep.kappa,
                rep.recovered[0],
                rep.recovered[1],
                rep.truth[0],
                rep.truth[1],
                fmt(&rep.rel_errors),
                el.as_secs_f64()
            ),
        ),
    }
}

/// The constant audit on the d = 2 scenario is decisive.
fn criterion_7() -> Outcome {
    let v = validated("conic-inv-z0");
    let (rep, _) = match run_recover(&v, &calibrated_options()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline error: {e}")),
    };
    let a = &rep.audit;
    outcome(
        a.verdict != Hypothesis::Neither,
        format!(
            "verdict {:?}; fitted κ = {:.4e}{:+.1e}i vs (p+1)/(p+2) = {:.4} (gap {:.2e}) and 1/(p+2) = {:.4} \
             (gap {:.2e}); fit residual {:.2e}",
            a.verdict,
            a.kappa_fit_re,
            a.kappa_fit_im,
            kappa_closed_form(a.p),
            a.rel_gap_h1,
            kappa_recount(a.p),
            a.rel_gap_h2,
            a.fit_residual
        ),
    )
}

/// Doubling each grid dimension at fixed ε moves every G_k by ≤ 1e−3.
fn criterion_8() -> Outcome {
    let start = Instant::now();
    let eps = 0.05;
    let opts = calibrated_options();
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for s in reference_scenarios() {
        let (_, v) = validate(&s, None);
        let v = v.unwrap();
        let base = GridPolicy::default().grid_for(eps);
        let g0 = match integrate_at(&v, eps, base, &opts) {
            Ok(r) => r.g_all(),
            Err(e) => return outcome(false, format!("{}: {e}", s.name)),
        };
        for axis in 0..3 {
            let g1 = match integrate_at(&v, eps, base.doubled(axis), &opts) {
                Ok(r) => r.g_all(),
                Err(e) => return outcome(false, format!("{}: {e}", s.name)),
            };
            for (k, (a, b)) in g0.iter().zip(&g1).enumerate() {
                let rel = (b - a).norm() / a.norm();
                if rel.is_nan() || rel > worst {
                    worst = rel;
                    worst_at = format!("{} k={k} axis {}", s.name, ["t", "θ", "φ"][axis]);
                }
            }
        }
    }
    outcome(
        worst <= 1e-3,
        format!(
            "max relative change {worst:.3e} (tol 1e-3) at {worst_at}, {:.2} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

/// Identical scenario and seed give byte-identical report bodies.
fn criterion_9() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["conic-inv-z0", "fermat-inv-z0"] {
        let v1 = validated(name);
        let v2 = validated(name);
        let a = run_recover(&v1, &calibrated_options()).map(|r| r.0.to_json());
        let b = run_recover(&v2, &calibrated_options()).map(|r| r.0.to_json());
        match (a, b) {
            (Ok(a), Ok(b)) => {
                ok &= a == b;
                details.push(format!("{name}: {} bytes, identical = {}", a.len(), a == b));
            }
            (Err(e), _) | (_, Err(e)) => {
                ok = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, details.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Hefer identity and homogeneity", criterion_1),
        ("line intersections", criterion_2),
        ("one-dimensional contour endpoint", criterion_3),
        ("d=1 recovery", criterion_4),
        ("two-point identity at d=2", criterion_5),
        ("d=2 full recovery", criterion_6),
        ("constant audit decisive", criterion_7),
        ("grid-doubling self-consistency", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
