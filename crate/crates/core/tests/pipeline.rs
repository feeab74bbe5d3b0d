use curvecauchy::kernel::FunctionSpec;
use curvecauchy::pipeline::{run_convergence, run_recover, summary_csv, write_outputs, PipelineError, RunOptions};
use curvecauchy::poly::HomogPoly3;
use curvecauchy::scenario::{reference_scenario, reference_scenarios, validate, Scenario, Validated};
use curvecauchy::tube::{EpsSchedule, GridSize};
use curvecauchy::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn small_opts() -> RunOptions {
    RunOptions {
        grid: Some(GridSize::new(16, 8, 8)),
        eps: Some(EpsSchedule::new(vec![0.05, 0.025]).unwrap()),
        ..RunOptions::default()
    }
}

fn validated(s: &Scenario) -> Validated {
    let (report, v) = validate(s, None);
    v.unwrap_or_else(|| panic!("{} rejected: {:?}", s.name, report.failures()))
}

fn failed_checks(s: &Scenario) -> Vec<String> {
    let (report, v) = validate(s, None);
    assert!(v.is_none());
    report.failures().iter().map(|c| c.name.clone()).collect()
}

#[test]
fn every_reference_scenario_validates() {
    for s in reference_scenarios() {
        let v = validated(&s);
        assert_eq!(v.intersections.points.len() as u32, v.curve.degree());
        assert!(v.report.passed());
    }
}

#[test]
fn conic_report_has_the_expected_shape() {
    let v = validated(&reference_scenario("conic-inv-z0").unwrap());
    let (report, _) = run_recover(&v, &small_opts()).unwrap();
    assert_eq!(report.p, 1);
    assert_eq!(report.points.len(), 2);
    assert_eq!(report.vandermonde.len(), 2);
    // ratios 0 and 1
    assert!((report.det_a.norm() - 1.0).abs() < 1e-14);
    // f = 1/ζ0 at the unit lifts of (0,0) and (1,1)
    assert!((report.truth[0] - c(1.0, 0.0)).norm() < 1e-14);
    assert!((report.truth[1] - c(3f64.sqrt(), 0.0)).norm() < 1e-14);
    assert_eq!(report.per_eps.len(), 2);
    assert_eq!(report.g.len(), 2);
    assert_eq!(report.kappa, 2.0 / 3.0);
    let lhs = 2.0 + 3f64.sqrt();
    assert!((report.multiformula.lhs - c(lhs, 0.0)).norm() < 1e-13);
}

#[test]
fn recovery_is_deterministic() {
    let v = validated(&reference_scenario("fermat-inv-z0").unwrap());
    let a = run_recover(&v, &small_opts()).unwrap().0.to_json();
    let b = run_recover(&v, &small_opts()).unwrap().0.to_json();
    assert_eq!(a, b);
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let v = validated(&reference_scenario("line-inv-z0").unwrap());
    let opts = small_opts();
    let (report, timings) = run_recover(&v, &opts).unwrap();
    let m = write_outputs(&v, &report, &timings, &opts, 0.0, dir.path()).unwrap();
    assert_eq!(m.outputs.len(), 3);
    for name in ["report.json", "summary.csv", "manifest.json"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["scenario"], "line-inv-z0");
    assert_eq!(summary_csv(&report).lines().count(), report.p + 2);
}

#[test]
fn off_curve_w_is_rejected() {
    let mut s = reference_scenario("conic-inv-z0").unwrap();
    s.w.y = c(0.3, 0.0);
    assert!(failed_checks(&s).contains(&"w off curve".to_string()));
}

#[test]
fn w_outside_the_domain_is_rejected() {
    let mut s = reference_scenario("conic-inv-z0").unwrap();
    s.w.x = c(0.6, 0.0);
    s.w.y = c(0.36, 0.0);
    assert!(failed_checks(&s).contains(&"w inside domain".to_string()));
}

#[test]
fn nonnegative_homogeneity_needs_the_reduce_flag() {
    let mut s = reference_scenario("conic-inv-z0").unwrap();
    s.f = FunctionSpec::new(HomogPoly3::from_real(1, &[([0, 1, 0], 1.0)]).unwrap(), 0);
    assert!(failed_checks(&s).contains(&"homogeneity must be negative".to_string()));
    s.reduce_homogeneity = true;
    let v = validated(&s);
    assert_eq!(v.f_integrated.homogeneity(), -1);
    for pt in v.intersections.lifts() {
        let back = v.f_integrated.eval(&pt) * pt[0].powi(v.back_exponent as i32);
        assert!((back - s.f.eval(&pt)).norm() < 1e-14);
    }
}

#[test]
fn reduced_minus_two_function_round_trips() {
    let mut s = reference_scenario("fermat-inv-z0").unwrap();
    s.f = FunctionSpec::new(HomogPoly3::from_real(0, &[([0, 0, 0], 1.0)]).unwrap(), 2);
    s.reduce_homogeneity = true;
    let v = validated(&s);
    assert_eq!(v.back_exponent, -1);
    let (report, _) = run_recover(&v, &small_opts()).unwrap();
    assert!(report.reduced_homogeneity);
    for (pt, truth) in v.intersections.lifts().iter().zip(&report.truth) {
        assert!((s.f.eval(pt) - truth).norm() < 1e-14);
    }
}

#[test]
fn empty_eps_list_is_a_usage_error() {
    let v = validated(&reference_scenario("line-inv-z0").unwrap());
    let err = run_convergence(&v, &[], &small_opts()).unwrap_err();
    assert!(matches!(err, PipelineError::Usage(_)));
    let err = run_convergence(&v, &[0.01, 0.02], &small_opts()).unwrap_err();
    assert!(matches!(err, PipelineError::Usage(_)));
}

#[test]
fn convergence_covers_every_variant() {
    let v = validated(&reference_scenario("conic-inv-z0").unwrap());
    let rows = run_convergence(&v, &[0.05, 0.025], &small_opts()).unwrap();
    assert_eq!(rows.len(), 2 * 4 * 2);
    let base: Vec<_> = rows.iter().filter(|r| r.variant == "base").collect();
    assert!(base.iter().all(|r| r.rel_change_vs_base == 0.0));
    assert!(base[..2].iter().all(|r| r.delta_prev_eps.is_none()));
    assert!(base[2..].iter().all(|r| r.delta_prev_eps.is_some()));
    let phi2 = rows.iter().find(|r| r.variant == "phi2").unwrap();
    assert_eq!((phi2.n_t, phi2.n_theta, phi2.n_phi), (16, 8, 16));
}

#[test]
fn scenario_files_round_trip() {
    for s in reference_scenarios() {
        let back = Scenario::from_json(&s.to_pretty_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.digest(), s.digest());
    }
    let mut v = serde_json::to_value(reference_scenario("line-inv-z0").unwrap()).unwrap();
    v["schema_version"] = 2.into();
    assert!(Scenario::from_json(&v.to_string()).is_err());
    let mut v = serde_json::to_value(reference_scenario("line-inv-z0").unwrap()).unwrap();
    v["colour"] = "blue".into();
    assert!(Scenario::from_json(&v.to_string()).is_err());
}

#[test]
fn shipped_scenario_files_match_the_builtins() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for s in reference_scenarios() {
        let loaded = Scenario::load(&dir.join(format!("{}.json", s.name))).unwrap();
        assert_eq!(loaded, s);
    }
}
